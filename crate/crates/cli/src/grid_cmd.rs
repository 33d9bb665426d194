use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, ValueEnum};
use randterm::grid::io::{write_field_csv, write_mask_csv, write_points_csv, Scenario};
use randterm::grid::{fmm_solve, motionless_set, sweep_oracle, SweepOptions};
use randterm::trajectory::{trace, TraceError, TraceOptions};
use serde_json::Map;

use crate::error::CliError;
use crate::output::{digest_bytes, read_file, Config, Sink};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridSolver {
    Fmm,
    Sweep,
}

impl GridSolver {
    fn name(self) -> &'static str {
        match self {
            GridSolver::Fmm => "fmm",
            GridSolver::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Emit {
    Value,
    Mask,
    Boundary,
    Q,
    Trajectory(f64, f64),
}

impl Emit {
    fn file_name(&self) -> String {
        match self {
            Emit::Value => "value.csv".into(),
            Emit::Mask => "mask.csv".into(),
            Emit::Boundary => "boundary.csv".into(),
            Emit::Q => "q.csv".into(),
            Emit::Trajectory(x, y) => format!("trajectory_{x}_{y}.csv"),
        }
    }
}

pub fn parse_emit(s: &str) -> Result<Emit, String> {
    match s {
        "value" => Ok(Emit::Value),
        "mask" => Ok(Emit::Mask),
        "boundary" => Ok(Emit::Boundary),
        "q" => Ok(Emit::Q),
        _ => {
            let rest = s.strip_prefix("trajectory:").ok_or_else(|| {
                format!("unknown output `{s}` (value, mask, boundary, q or trajectory:x,y)")
            })?;
            let (x, y) = rest
                .split_once(',')
                .ok_or("trajectory needs `trajectory:x,y`")?;
            let num = |t: &str| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("bad coordinate `{t}`: {e}"))
            };
            Ok(Emit::Trajectory(num(x)?, num(y)?))
        }
    }
}

/// `NxM` or a bare `N` for a square grid.
pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|e| format!("bad grid size `{t}`: {e}"))
    };
    match s.split_once(['x', 'X']) {
        Some((a, b)) => Ok((num(a)?, num(b)?)),
        None => num(s).map(|n| (n, n)),
    }
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// JSON scenario file.
    pub file: PathBuf,
    #[arg(long, value_enum, default_value_t = GridSolver::Fmm)]
    pub solver: GridSolver,
    /// Replace the scenario's λ field with a constant.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Resample the scenario on an `NxM` grid.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<(usize, usize)>,
    /// value, mask, boundary, q or trajectory:x,y; repeat for several.
    #[arg(long = "emit", value_parser = parse_emit, default_values = ["value"])]
    pub emit: Vec<Emit>,
    /// Threshold on q - V for motionless points.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Sweep stopping tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Sweep cap.
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: GridArgs) -> Result<(), CliError> {
    let text = read_file(&args.file)?;
    let mut config = Config::default();
    config
        .set("command", "grid")
        .set("input_sha256", digest_bytes(text.as_bytes()))
        .set("solver", args.solver.name())
        .set_opt("lambda", args.lambda)
        .set_opt("grid", args.grid.map(|(a, b)| format!("{a}x{b}")))
        .set("emit", format!("{:?}", args.emit))
        .set_opt("eps", args.eps)
        .set_opt("tol", args.tol)
        .set_opt("max_iters", args.max_iters);
    if args.out.is_none() && args.emit.len() > 1 {
        return Err(CliError::validation("several --emit outputs need --out"));
    }
    if let Some(l) = args.lambda {
        if !(l > 0.0 && l.is_finite()) {
            return Err(CliError::validation(format!(
                "--lambda {l} must be positive"
            )));
        }
    }
    let scenario = Scenario::from_json(&text)?;
    let base = args.file.parent().unwrap_or(Path::new("."));
    let mut problem = scenario.build(base, args.grid)?;
    if let Some(l) = args.lambda {
        problem = problem.with_lambda(l);
    }
    let grid = *problem.grid();
    let mut sink = Sink::new(args.out.clone())?;

    let start = Instant::now();
    let solution = match args.solver {
        GridSolver::Fmm => fmm_solve(&problem),
        GridSolver::Sweep => {
            let mut opts = SweepOptions::default();
            if let Some(t) = args.tol {
                opts.tol = t;
            }
            if let Some(m) = args.max_iters {
                opts.max_sweeps = m;
            }
            sweep_oracle(&problem, &opts)?
        }
    };
    let secs = start.elapsed().as_secs_f64();
    let eps = args.eps.unwrap_or_else(|| problem.default_motionless_eps());
    let mset = motionless_set(&solution, &problem, eps);

    let mut trace_failure = None;
    for e in &args.emit {
        let name = e.file_name();
        match *e {
            Emit::Value => sink.emit(&name, &write_field_csv(&grid, &solution.values))?,
            Emit::Q => sink.emit(&name, &write_field_csv(&grid, problem.q()))?,
            Emit::Mask => sink.emit(&name, &write_mask_csv(&grid, &mset.mask))?,
            Emit::Boundary => sink.emit(&name, &write_points_csv(&grid, &mset.boundary))?,
            Emit::Trajectory(x, y) => {
                let opts = TraceOptions {
                    eps: Some(eps),
                    ..Default::default()
                };
                match trace(&solution, &problem, (x, y), &opts) {
                    Ok(path) => sink.emit(&name, &path.to_csv())?,
                    Err(TraceError::MaxSteps { steps, partial }) => {
                        sink.emit(&name, &partial.to_csv())?;
                        trace_failure.get_or_insert(CliError::NotConverged {
                            message: format!(
                                "trajectory from ({x}, {y}) reached no motionless point"
                            ),
                            iterations: steps,
                            residual: f64::NAN,
                        });
                    }
                    Err(other) => return Err(CliError::validation(other.to_string())),
                }
            }
        }
    }

    let masked = (0..grid.len()).filter(|&k| problem.is_masked(k)).count();
    let mut summary = Map::new();
    summary.insert("command".into(), "grid".into());
    summary.insert("input".into(), args.file.display().to_string().into());
    summary.insert("solver".into(), args.solver.name().into());
    summary.insert("grid".into(), format!("{}x{}", grid.nx, grid.ny).into());
    summary.insert("nodes".into(), grid.len().into());
    summary.insert("masked".into(), masked.into());
    summary.insert("wall_time_s".into(), secs.into());
    summary.insert(
        "heap_operations".into(),
        solution.stats.heap_operations.into(),
    );
    summary.insert("updates".into(), solution.stats.updates.into());
    summary.insert("sweeps".into(), solution.stats.sweeps.into());
    summary.insert("motionless_eps".into(), eps.into());
    summary.insert("motionless".into(), mset.count().into());
    summary.insert("free_boundary".into(), mset.boundary.len().into());
    sink.finish(summary, &config)?;
    trace_failure.map_or(Ok(()), Err)
}
