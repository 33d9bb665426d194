use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use randterm::analytic::{error_norms, ErrorNorms, RadialCase};
use randterm::grid::fmm_solve;
use serde_json::Map;

use crate::error::CliError;
use crate::grid_cmd::parse_grid;
use crate::output::{Config, Sink};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Case {
    /// K = 0; every point flows to the origin.
    Trivial,
    /// K = |x|; a circular free boundary.
    Circular,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    #[arg(long, value_enum)]
    pub case: Case,
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    /// Square grid sizes, e.g. `101,201,401` or `101x101`.
    #[arg(long = "grid", value_delimiter = ',', value_parser = parse_grid, default_values = ["101", "201", "401"])]
    pub grids: Vec<(usize, usize)>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn table(case: RadialCase, sizes: &[usize]) -> Vec<ErrorNorms> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = sizes
            .iter()
            .map(|&n| {
                scope.spawn(move || {
                    let p = case.problem(n);
                    let s = fmm_solve(&p);
                    error_norms(p.grid(), &s.values, &case.exact_field(p.grid()))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread"))
            .collect()
    })
}

pub fn csv(sizes: &[usize], rows: &[ErrorNorms]) -> String {
    let mut s = String::from("grid,line_Linf,L2,Linf,order\n");
    for (i, (n, e)) in sizes.iter().zip(rows).enumerate() {
        let order = if i == 0 {
            String::new()
        } else {
            let ratio = (sizes[i] - 1) as f64 / (sizes[i - 1] - 1) as f64;
            format!("{}", (rows[i - 1].linf / e.linf).ln() / ratio.ln())
        };
        writeln!(s, "{n}x{n},{},{},{},{order}", e.line_linf, e.l2, e.linf).unwrap();
    }
    s
}

pub fn run(args: ConvergenceArgs) -> Result<(), CliError> {
    if !(args.lambda > 0.0 && args.lambda.is_finite()) {
        return Err(CliError::validation(format!(
            "--lambda {} must be positive",
            args.lambda
        )));
    }
    let mut sizes = Vec::new();
    for &(a, b) in &args.grids {
        if a != b || a < 3 {
            return Err(CliError::validation(format!(
                "grid {a}x{b}: need square grids of at least 3x3"
            )));
        }
        sizes.push(a);
    }
    let case = match args.case {
        Case::Trivial => RadialCase::trivial(args.lambda),
        Case::Circular => RadialCase::circular(args.lambda),
    };
    let name = match args.case {
        Case::Trivial => "trivial",
        Case::Circular => "circular",
    };
    let mut config = Config::default();
    config
        .set("command", "convergence")
        .set("case", name)
        .set("lambda", args.lambda)
        .set("grids", format!("{sizes:?}"));
    let start = Instant::now();
    let rows = table(case, &sizes);
    let secs = start.elapsed().as_secs_f64();
    let mut sink = Sink::new(args.out)?;
    sink.emit("convergence.csv", &csv(&sizes, &rows))?;
    let mut summary = Map::new();
    summary.insert("command".into(), "convergence".into());
    summary.insert("case".into(), name.into());
    summary.insert("lambda".into(), args.lambda.into());
    summary.insert("solver".into(), "fmm".into());
    summary.insert(
        "nodes".into(),
        sizes.iter().map(|n| n * n).sum::<usize>().into(),
    );
    summary.insert("wall_time_s".into(), secs.into());
    sink.finish(summary, &config)
}
