use std::path::PathBuf;

use randterm::graph::io::ParseError;
use randterm::grid::io::ScenarioError;
use randterm::{GraphError, GridError};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input: unparseable files, failed assumptions, bad flags.
    #[error("{message}")]
    Validation {
        message: String,
        line: Option<usize>,
        details: Vec<String>,
    },
    #[error("{message}")]
    NotConverged {
        message: String,
        iterations: usize,
        residual: f64,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError::Validation {
            message: message.into(),
            line: None,
            details: Vec::new(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation { .. } => 2,
            CliError::NotConverged { .. } => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn report(&self) -> Value {
        match self {
            CliError::Validation {
                message,
                line,
                details,
            } => json!({
                "error": "validation",
                "message": message,
                "line": line,
                "details": details,
            }),
            CliError::NotConverged {
                message,
                iterations,
                residual,
            } => json!({
                "error": "nonconvergence",
                "message": message,
                "iterations": iterations,
                "residual": residual,
            }),
            CliError::Io { path, source } => json!({
                "error": "io",
                "message": source.to_string(),
                "path": path.display().to_string(),
            }),
        }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Validation {
            message: e.to_string(),
            line: Some(e.line),
            details: Vec::new(),
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::Invalid(v) => CliError::Validation {
                message: "problem violates the label-setting assumptions".into(),
                line: None,
                details: v.iter().map(|x| x.to_string()).collect(),
            },
            GraphError::NotConverged {
                iterations,
                residual,
                ..
            } => CliError::NotConverged {
                message: e.to_string(),
                iterations,
                residual,
            },
            other => CliError::validation(other.to_string()),
        }
    }
}

impl From<GridError> for CliError {
    fn from(e: GridError) -> Self {
        match e {
            GridError::NotConverged { sweeps, change, .. } => CliError::NotConverged {
                message: e.to_string(),
                iterations: sweeps,
                residual: change,
            },
            other => CliError::validation(other.to_string()),
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Io { path, source } => CliError::Io { path, source },
            ScenarioError::Csv { line, .. } => CliError::Validation {
                message: e.to_string(),
                line: Some(line),
                details: Vec::new(),
            },
            other => CliError::validation(other.to_string()),
        }
    }
}
