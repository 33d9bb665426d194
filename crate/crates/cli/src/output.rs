use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const COMMIT: &str = env!("RANDTERM_COMMIT");

/// Inputs that determine a run's outputs.  Hashed together with the crate
/// version and commit.
#[derive(Default)]
pub struct Config(BTreeMap<&'static str, String>);

impl Config {
    pub fn set(&mut self, key: &'static str, value: impl ToString) -> &mut Self {
        self.0.insert(key, value.to_string());
        self
    }

    pub fn set_opt<T: ToString>(&mut self, key: &'static str, value: Option<T>) -> &mut Self {
        if let Some(v) = value {
            self.set(key, v);
        }
        self
    }

    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.0 {
            h.update(format!("{k}={v}\n"));
        }
        h.update(format!("version={VERSION}\ncommit={COMMIT}\n"));
        hex(&h.finalize())
    }
}

pub fn digest_bytes(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Where artifacts go: files under `--out`, or stdout when there is no
/// output directory (one artifact only; the summary then goes to stderr).
pub struct Sink {
    dir: Option<PathBuf>,
    written: Vec<String>,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>) -> Result<Self, CliError> {
        if let Some(d) = &dir {
            fs::create_dir_all(d).map_err(|source| CliError::Io {
                path: d.clone(),
                source,
            })?;
        }
        Ok(Self {
            dir,
            written: Vec::new(),
        })
    }

    pub fn has_dir(&self) -> bool {
        self.dir.is_some()
    }

    pub fn emit(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        match &self.dir {
            Some(d) => {
                let path = d.join(name);
                fs::write(&path, contents).map_err(|source| CliError::Io { path, source })?;
            }
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(contents.as_bytes())
                    .map_err(|source| CliError::Io {
                        path: "<stdout>".into(),
                        source,
                    })?;
            }
        }
        self.written.push(name.to_string());
        Ok(())
    }

    /// Adds version, commit, config hash and the artifact list, then writes
    /// `summary.json` (or prints it to stderr).
    pub fn finish(
        mut self,
        mut summary: Map<String, Value>,
        config: &Config,
    ) -> Result<(), CliError> {
        summary.insert("version".into(), VERSION.into());
        summary.insert("commit".into(), COMMIT.into());
        summary.insert("config_hash".into(), config.hash().into());
        summary.insert("outputs".into(), self.written.clone().into());
        let text = serde_json::to_string_pretty(&Value::Object(summary))
            .expect("summary serializes")
            + "\n";
        if self.dir.is_some() {
            self.emit("summary.json", &text)?;
            print!("{text}");
        } else {
            eprint!("{text}");
        }
        self.written.clear();
        Ok(())
    }
}
