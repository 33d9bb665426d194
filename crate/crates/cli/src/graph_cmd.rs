use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use randterm::graph::io::{
    is_idle_scenario, parse_graph, parse_idle_scenario, solution_csv, write_graph,
};
use randterm::graph::random::{random_problem, RandomSpec};
use randterm::graph::{dial_solve, dijkstra_solve, value_iteration, ValueIterationOptions};
use randterm::idle::{build_problem, IdleScenario};
use randterm::{GraphProblem, GraphSolution};
use serde_json::{json, Map, Value};

use crate::error::CliError;
use crate::output::{digest_bytes, read_file, Config, Sink};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphSolver {
    Dijkstra,
    Dial,
    Vi,
}

impl GraphSolver {
    fn name(self) -> &'static str {
        match self {
            GraphSolver::Dijkstra => "dijkstra",
            GraphSolver::Dial => "dial",
            GraphSolver::Vi => "vi",
        }
    }
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Problem or idle-time scenario file.
    #[arg(required_unless_present = "seed")]
    pub file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = GraphSolver::Dijkstra)]
    pub solver: GraphSolver,
    /// Replace every termination probability with this value.
    #[arg(long)]
    pub p: Option<f64>,
    /// Call rate for idle-time scenarios.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Value iteration stopping tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Value iteration cap.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Solve a random instance instead of a file.
    #[arg(long, conflicts_with = "file")]
    pub seed: Option<u64>,
    /// Node count for `--seed` instances.
    #[arg(long, default_value_t = 60, requires = "seed")]
    pub nodes: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn load(args: &GraphArgs, config: &mut Config) -> Result<(GraphProblem, Option<String>), CliError> {
    if let Some(seed) = args.seed {
        if args.lambda.is_some() {
            return Err(CliError::validation(
                "--lambda applies to idle-time scenario files only",
            ));
        }
        config.set("seed", seed).set("nodes", args.nodes);
        let spec = RandomSpec {
            nodes: args.nodes,
            ..Default::default()
        };
        let g = random_problem(&spec, seed);
        let text = write_graph(&g);
        return Ok((g, Some(text)));
    }
    let path = args
        .file
        .as_ref()
        .expect("clap requires a file without --seed");
    let text = read_file(path)?;
    config.set("input_sha256", digest_bytes(text.as_bytes()));
    if is_idle_scenario(&text) {
        let mut s = parse_idle_scenario(&text)?;
        if let Some(l) = args.lambda {
            s = IdleScenario::new(s.node_count, s.edges, l, s.calls)
                .map_err(|e| CliError::validation(e.to_string()))?;
        }
        Ok((build_problem(&s), None))
    } else if args.lambda.is_some() {
        Err(CliError::validation(
            "--lambda applies to idle-time scenario files only",
        ))
    } else {
        Ok((parse_graph(&text)?, None))
    }
}

fn solve(g: &GraphProblem, args: &GraphArgs) -> Result<GraphSolution, CliError> {
    Ok(match args.solver {
        GraphSolver::Dijkstra => dijkstra_solve(g, &Default::default())?,
        GraphSolver::Dial => dial_solve(g, &Default::default())?,
        GraphSolver::Vi => {
            let mut opts = ValueIterationOptions::default();
            if let Some(t) = args.tol {
                opts.tol = t;
            }
            if let Some(m) = args.max_iters {
                opts.max_iters = m;
            }
            value_iteration(g, &opts)?
        }
    })
}

pub fn run(args: GraphArgs) -> Result<(), CliError> {
    let mut config = Config::default();
    config
        .set("command", "graph")
        .set("solver", args.solver.name())
        .set_opt("p", args.p)
        .set_opt("lambda", args.lambda)
        .set_opt("tol", args.tol)
        .set_opt("max_iters", args.max_iters);
    if let Some(p) = args.p {
        if !(p > 0.0 && p <= 1.0) {
            return Err(CliError::validation(format!("--p {p} is outside (0, 1]")));
        }
    }
    if let Some(t) = args.tol {
        if !(t >= 0.0) {
            return Err(CliError::validation(format!(
                "--tol {t} must be nonnegative"
            )));
        }
    }
    let (mut g, generated) = load(&args, &mut config)?;
    if let Some(p) = args.p {
        g = g.with_uniform_p(p);
    }
    let mut sink = Sink::new(args.out.clone())?;
    let start = Instant::now();
    let s = solve(&g, &args)?;
    let secs = start.elapsed().as_secs_f64();
    if let Some(text) = generated.filter(|_| sink.has_dir()) {
        sink.emit("problem.txt", &text)?;
    }
    sink.emit("solution.csv", &solution_csv(&g, &s))?;
    let mut summary = Map::new();
    let input: Value = match (&args.file, args.seed) {
        (Some(p), _) => p.display().to_string().into(),
        (None, Some(seed)) => json!({ "seed": seed, "nodes": args.nodes }),
        (None, None) => Value::Null,
    };
    summary.insert("command".into(), "graph".into());
    summary.insert("input".into(), input);
    summary.insert("solver".into(), args.solver.name().into());
    summary.insert("nodes".into(), g.node_count().into());
    summary.insert("edges".into(), g.edges().len().into());
    summary.insert("wall_time_s".into(), secs.into());
    summary.insert("heap_operations".into(), s.stats.heap_operations.into());
    summary.insert("label_updates".into(), s.stats.label_updates.into());
    summary.insert("iterations".into(), s.stats.iterations.into());
    summary.insert("motionless".into(), s.motionless_nodes().len().into());
    sink.finish(summary, &config)
}
