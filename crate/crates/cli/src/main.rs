//! `randterm`: solve graph and grid problems with random termination.
//!
//! Exit codes: 0 success, 2 invalid input, 3 nonconvergence, 4 I/O.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod convergence;
mod error;
mod graph_cmd;
mod grid_cmd;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "randterm",
    version,
    about = "Value functions for randomly terminated control problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a problem on a graph (or an idle-time scenario).
    Graph(graph_cmd::GraphArgs),
    /// Solve a JSON grid scenario and write CSV fields.
    Grid(grid_cmd::GridArgs),
    /// Error table against the radial closed-form solutions.
    Convergence(convergence::ConvergenceArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Graph(a) => graph_cmd::run(a),
        Command::Grid(a) => grid_cmd::run(a),
        Command::Convergence(a) => convergence::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("{}", e.report());
            ExitCode::from(e.exit_code())
        }
    }
}
