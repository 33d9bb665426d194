//! Line-oriented text formats for graph problems and idle-time scenarios,
//! and CSV output of solutions.
//!
//! ```text
//! # comment
//! nodes 3
//! p 0.5              # default probability (optional)
//! selfloops none     # disable implicit free self-loops (optional)
//! q 1 10.0
//! edge 1 2 2.0 0.5   # from to K [p]
//! ```
//!
//! Node ids are one-based.  Every node gets a free self-loop unless one is
//! listed explicitly or `selfloops none` is given.
//!
//! Idle-time scenarios use the same header with travel-time edges:
//!
//! ```text
//! nodes 3
//! lambda 1.0
//! edge 1 2 1.5       # from to tau (one direction)
//! link 2 3 1.0       # both directions
//! call 3 1.0
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use super::{GraphProblem, GraphSolution};
use crate::idle::IdleScenario;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

/// Problem file contents before they are turned into a graph or scenario.
#[derive(Debug, Default)]
struct Raw {
    nodes: Option<usize>,
    default_p: Option<f64>,
    self_loops: bool,
    lambda: Option<f64>,
    q: Vec<(usize, usize, f64)>,
    /// (line, from, to, numbers)
    edges: Vec<(usize, usize, usize, Vec<f64>)>,
    links: Vec<(usize, usize, usize, f64)>,
    calls: Vec<(usize, usize, f64)>,
}

fn parse_raw(text: &str) -> Result<Raw, ParseError> {
    let mut raw = Raw {
        self_loops: true,
        ..Default::default()
    };
    for (k, full) in text.lines().enumerate() {
        let ln = k + 1;
        let line = full.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut words = line.split_whitespace();
        let key = words.next().unwrap();
        let rest: Vec<&str> = words.collect();
        let num = |s: &str| -> Result<f64, ParseError> {
            s.parse::<f64>()
                .map_err(|_| err(ln, format!("expected a number, found `{s}`")))
        };
        let node = |s: &str, raw: &Raw| -> Result<usize, ParseError> {
            let n = raw
                .nodes
                .ok_or_else(|| err(ln, "`nodes` must come first"))?;
            let i: usize = s
                .parse()
                .map_err(|_| err(ln, format!("expected a node id, found `{s}`")))?;
            if i == 0 || i > n {
                return Err(err(ln, format!("node id {i} outside 1..={n}")));
            }
            Ok(i - 1)
        };
        let arity = |lo: usize, hi: usize| -> Result<(), ParseError> {
            if rest.len() < lo || rest.len() > hi {
                Err(err(
                    ln,
                    format!("`{key}` takes {lo}..={hi} fields, found {}", rest.len()),
                ))
            } else {
                Ok(())
            }
        };
        match key {
            "nodes" => {
                arity(1, 1)?;
                let n: usize = rest[0]
                    .parse()
                    .map_err(|_| err(ln, "node count must be a positive integer"))?;
                if n == 0 {
                    return Err(err(ln, "node count must be positive"));
                }
                raw.nodes = Some(n);
            }
            "p" => {
                arity(1, 1)?;
                raw.default_p = Some(num(rest[0])?);
            }
            "lambda" => {
                arity(1, 1)?;
                raw.lambda = Some(num(rest[0])?);
            }
            "selfloops" => {
                arity(1, 1)?;
                raw.self_loops = match rest[0] {
                    "none" => false,
                    "implicit" => true,
                    other => return Err(err(ln, format!("unknown selfloops mode `{other}`"))),
                };
            }
            "q" => {
                arity(2, 2)?;
                raw.q.push((ln, node(rest[0], &raw)?, num(rest[1])?));
            }
            "edge" => {
                arity(3, 4)?;
                let (i, j) = (node(rest[0], &raw)?, node(rest[1], &raw)?);
                let vals = rest[2..]
                    .iter()
                    .map(|s| num(s))
                    .collect::<Result<Vec<_>, _>>()?;
                raw.edges.push((ln, i, j, vals));
            }
            "link" => {
                arity(3, 3)?;
                raw.links.push((
                    ln,
                    node(rest[0], &raw)?,
                    node(rest[1], &raw)?,
                    num(rest[2])?,
                ));
            }
            "call" => {
                arity(2, 2)?;
                raw.calls.push((ln, node(rest[0], &raw)?, num(rest[1])?));
            }
            other => return Err(err(ln, format!("unknown directive `{other}`"))),
        }
    }
    if raw.nodes.is_none() {
        return Err(err(text.lines().count().max(1), "missing `nodes` line"));
    }
    Ok(raw)
}

/// True when the text describes an idle-time scenario (has a `lambda` line).
pub fn is_idle_scenario(text: &str) -> bool {
    text.lines()
        .any(|l| l.split('#').next().unwrap_or("").split_whitespace().next() == Some("lambda"))
}

pub fn parse_graph(text: &str) -> Result<GraphProblem, ParseError> {
    let raw = parse_raw(text)?;
    let n = raw.nodes.unwrap();
    if let Some(&(ln, ..)) = raw.calls.first() {
        return Err(err(
            ln,
            "`call` lines belong to idle-time scenarios (add a `lambda` line)",
        ));
    }
    if let Some(&(ln, ..)) = raw.links.first() {
        return Err(err(ln, "`link` lines belong to idle-time scenarios"));
    }
    let mut q = vec![0.0; n];
    for &(_, i, v) in &raw.q {
        q[i] = v;
    }
    let mut b = GraphProblem::builder(q);
    for (ln, i, j, vals) in &raw.edges {
        let p = match (vals.get(1), raw.default_p) {
            (Some(&p), _) | (None, Some(p)) => p,
            (None, None) => return Err(err(*ln, "edge needs a probability (or a `p` line)")),
        };
        b = b.edge(*i, *j, vals[0], p);
    }
    if raw.self_loops {
        b = b.self_loops(raw.default_p.unwrap_or(crate::idle::SELF_LOOP_P));
    }
    Ok(b.build())
}

pub fn parse_idle_scenario(text: &str) -> Result<IdleScenario, ParseError> {
    let raw = parse_raw(text)?;
    let n = raw.nodes.unwrap();
    let lambda = raw
        .lambda
        .ok_or_else(|| err(1, "idle-time scenario needs a `lambda` line"))?;
    if let Some(&(ln, ..)) = raw.q.first() {
        return Err(err(
            ln,
            "`q` is derived from call locations in idle-time scenarios",
        ));
    }
    let mut edges = Vec::new();
    for (ln, i, j, vals) in &raw.edges {
        if vals.len() != 1 {
            return Err(err(*ln, "idle-time edges take `edge from to tau`"));
        }
        edges.push((*i, *j, vals[0]));
    }
    for &(_, i, j, tau) in &raw.links {
        edges.push((i, j, tau));
        edges.push((j, i, tau));
    }
    let calls = raw.calls.iter().map(|&(_, i, p)| (i, p)).collect();
    IdleScenario::new(n, edges, lambda, calls).map_err(|e| err(1, e.to_string()))
}

/// CSV with columns `node,V,q,motionless,policy_successor` (one-based ids).
pub fn solution_csv(problem: &GraphProblem, solution: &GraphSolution) -> String {
    let mut s = String::from("node,V,q,motionless,policy_successor\n");
    for i in 0..problem.node_count() {
        writeln!(
            s,
            "{},{},{},{},{}",
            i + 1,
            solution.values[i],
            problem.q()[i],
            u8::from(solution.motionless[i]),
            solution.policy[i] + 1
        )
        .unwrap();
    }
    s
}

/// Inverse of [`parse_graph`] with every edge written explicitly.
pub fn write_graph(problem: &GraphProblem) -> String {
    let mut s = format!("nodes {}\nselfloops none\n", problem.node_count());
    for (i, q) in problem.q().iter().enumerate() {
        writeln!(s, "q {} {}", i + 1, q).unwrap();
    }
    for e in problem.edges() {
        writeln!(s, "edge {} {} {} {}", e.from + 1, e.to + 1, e.cost, e.p).unwrap();
    }
    s
}
