//! Randomly-terminated control on finite directed graphs.
//!
//! A [`GraphProblem`] holds transition costs `K_ij`, terminal costs `q_i` and
//! per-edge termination probabilities `p_ij`.  Its value function satisfies
//!
//! ```text
//! V_i = min_{j ∈ N(i)} { K_ij + p_ij q_j + (1 - p_ij) V_j }
//! ```
//!
//! Node ids are zero-based in code; text formats and messages use one-based
//! labels `x_1 .. x_M`.

mod convert;
pub mod io;
mod path;
pub mod random;
mod solve;
pub mod taxonomy;

use std::fmt;

use thiserror::Error;

pub use convert::{
    from_infinite_horizon, normalize_self_costs, to_infinite_horizon, InfiniteHorizonProblem,
};
pub use path::{extract_path, path_cost};
pub use solve::{
    dial_solve, dijkstra_solve, motionless_threshold_probability, solve_v0, solve_v1,
    value_iteration, LabelSettingOptions, Seeding, SolveStats, Sweep, ValueIterationOptions,
};

/// Relative tolerance for `V_i == q_i` in exact graph arithmetic.
pub const MOTIONLESS_RTOL: f64 = 1e-12;

/// `|v - q| <= 1e-12 * max(1, |q|)`.
pub fn is_motionless_value(v: f64, q: f64) -> bool {
    (v - q).abs() <= MOTIONLESS_RTOL * q.abs().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub cost: f64,
    pub p: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("problem violates assumptions: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("node index {0} out of range")]
    NodeOutOfRange(usize),
    #[error(
        "value iteration did not converge after {iterations} iterations (last change {residual:e})"
    )]
    NotConverged {
        iterations: usize,
        residual: f64,
        last: Vec<f64>,
    },
    #[error("Dial's method needs a positive minimal transition cost, got {0}")]
    ZeroDelta(f64),
    #[error("termination probability varies across edges ({0} and {1}); this transform needs a uniform p")]
    NonUniformProbability(f64, f64),
    #[error("value range needs {0} buckets of width Δ; too many for Dial's method")]
    BucketOverflow(f64),
    #[error("discount factor {0} outside (0, 1)")]
    BadDiscount(f64),
    #[error("transformed cost K({}, {}) = {cost} is negative", label(*.from), label(*.to))]
    NegativeCost { from: usize, to: usize, cost: f64 },
    #[error("no transition from {} to {}", label(*.from), label(*.to))]
    MissingTransition { from: usize, to: usize },
    #[error("path is empty")]
    EmptyPath,
    #[error("policy revisits {} before reaching a motionless node", label(*.0))]
    PolicyCycle(usize),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub(crate) fn label(i: usize) -> String {
    format!("x_{}", i + 1)
}

/// One failed assumption reported by [`GraphProblem::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// A1: `x_i ∈ N(x_i)`.
    MissingSelfLoop {
        node: usize,
    },
    /// A2: `K_ii = 0`.
    NonzeroSelfCost {
        node: usize,
        cost: f64,
    },
    /// A3: `K_ij >= Δ >= 0` for `j != i`.
    NegativeCost {
        from: usize,
        to: usize,
        cost: f64,
    },
    ProbabilityOutOfRange {
        from: usize,
        to: usize,
        p: f64,
    },
    NonFiniteTerminal {
        node: usize,
        q: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::MissingSelfLoop { node } => {
                write!(f, "A1 missing self-transition at {}", label(node))
            }
            Violation::NonzeroSelfCost { node, cost } => {
                write!(f, "A2 nonzero self-cost K = {cost} at {}", label(node))
            }
            Violation::NegativeCost { from, to, cost } => {
                write!(
                    f,
                    "A3 negative transition cost K = {cost} from {} to {}",
                    label(from),
                    label(to)
                )
            }
            Violation::ProbabilityOutOfRange { from, to, p } => {
                write!(
                    f,
                    "termination probability p = {p} outside (0, 1] on {} -> {}",
                    label(from),
                    label(to)
                )
            }
            Violation::NonFiniteTerminal { node, q } => {
                write!(f, "terminal cost q = {q} at {} is not finite", label(node))
            }
        }
    }
}

/// Directed graph with transition costs, terminal costs and termination
/// probabilities.  Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphProblem {
    q: Vec<f64>,
    edges: Vec<Edge>,
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
    delta: f64,
}

impl GraphProblem {
    pub fn builder(q: Vec<f64>) -> GraphBuilder {
        let n = q.len();
        GraphBuilder {
            q,
            edges: Vec::new(),
            slot: vec![Vec::new(); n],
        }
    }

    pub fn node_count(&self) -> usize {
        self.q.len()
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Outgoing edges of `i` (its neighborhood `N(x_i)`).
    pub fn out_edges(&self, i: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.out[i].iter().map(move |&e| &self.edges[e])
    }

    /// Edges `i -> j` entering `j`.
    pub fn in_edges(&self, j: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.inc[j].iter().map(move |&e| &self.edges[e])
    }

    pub fn edge(&self, from: usize, to: usize) -> Option<&Edge> {
        self.out_edges(from).find(|e| e.to == to)
    }

    /// Largest out-degree `κ`.
    pub fn max_out_degree(&self) -> usize {
        self.out.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `Δ`: the smallest cost over transitions `i -> j`, `j != i`
    /// (`+∞` when there are none).
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// The single termination probability shared by every edge, if any.
    pub fn uniform_p(&self) -> Result<Option<f64>, GraphError> {
        let mut it = self.edges.iter().map(|e| e.p);
        let Some(first) = it.next() else {
            return Ok(None);
        };
        for p in it {
            if p != first {
                return Err(GraphError::NonUniformProbability(first, p));
            }
        }
        Ok(Some(first))
    }

    /// Returns a copy with every termination probability replaced by `p`.
    pub fn with_uniform_p(&self, p: f64) -> GraphProblem {
        let mut b = GraphProblem::builder(self.q.clone());
        for e in &self.edges {
            b = b.edge(e.from, e.to, e.cost, p);
        }
        b.build()
    }

    /// Local minima of `q` over each node's neighborhood (the set `Q_l`).
    pub fn local_minima(&self) -> Vec<usize> {
        (0..self.node_count())
            .filter(|&i| self.out_edges(i).all(|e| self.q[i] <= self.q[e.to]))
            .collect()
    }

    /// Global minima of `q` (the set `Q_g`).
    pub fn global_minima(&self) -> Vec<usize> {
        let m = self.q.iter().copied().fold(f64::INFINITY, f64::min);
        (0..self.node_count()).filter(|&i| self.q[i] <= m).collect()
    }

    /// Checks the standing assumptions A1-A3 plus basic sanity of `p` and `q`.
    /// An empty list means the label-setting solvers apply.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (i, &q) in self.q.iter().enumerate() {
            if !q.is_finite() {
                out.push(Violation::NonFiniteTerminal { node: i, q });
            }
            match self.edge(i, i) {
                None => out.push(Violation::MissingSelfLoop { node: i }),
                Some(e) if e.cost != 0.0 => out.push(Violation::NonzeroSelfCost {
                    node: i,
                    cost: e.cost,
                }),
                Some(_) => {}
            }
        }
        for e in &self.edges {
            if e.from != e.to && !(e.cost >= 0.0) {
                out.push(Violation::NegativeCost {
                    from: e.from,
                    to: e.to,
                    cost: e.cost,
                });
            }
            if !(e.p > 0.0 && e.p <= 1.0) {
                out.push(Violation::ProbabilityOutOfRange {
                    from: e.from,
                    to: e.to,
                    p: e.p,
                });
            }
        }
        out
    }

    pub(crate) fn ensure_valid(&self) -> Result<(), GraphError> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(GraphError::Invalid(v))
        }
    }

    /// Right-hand side of the optimality principle along one edge.
    #[inline]
    pub(crate) fn candidate(&self, e: &Edge, v_to: f64) -> f64 {
        // exact at v_to == q, so zero-cost self-loops never lift V above q
        if e.p == 1.0 {
            return e.cost + self.q[e.to];
        }
        e.cost + v_to + e.p * (self.q[e.to] - v_to)
    }
}

pub struct GraphBuilder {
    q: Vec<f64>,
    edges: Vec<Edge>,
    slot: Vec<Vec<(usize, usize)>>,
}

impl GraphBuilder {
    /// Adds (or replaces) the transition `from -> to`.
    ///
    /// Panics if either index is out of range.
    pub fn edge(mut self, from: usize, to: usize, cost: f64, p: f64) -> Self {
        let n = self.q.len();
        assert!(
            from < n && to < n,
            "edge {from}->{to} out of range for {n} nodes"
        );
        let e = Edge { from, to, cost, p };
        match self.slot[from].iter().find(|(t, _)| *t == to) {
            Some(&(_, idx)) => self.edges[idx] = e,
            None => {
                self.slot[from].push((to, self.edges.len()));
                self.edges.push(e);
            }
        }
        self
    }

    /// Edge in both directions with the same cost and probability.
    pub fn undirected(self, a: usize, b: usize, cost: f64, p: f64) -> Self {
        self.edge(a, b, cost, p).edge(b, a, cost, p)
    }

    /// Adds a free self-transition at every node lacking one.
    pub fn self_loops(mut self, p: f64) -> Self {
        for i in 0..self.q.len() {
            if !self.slot[i].iter().any(|(t, _)| *t == i) {
                self = self.edge(i, i, 0.0, p);
            }
        }
        self
    }

    pub fn build(self) -> GraphProblem {
        let n = self.q.len();
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        let mut delta = f64::INFINITY;
        for (k, e) in self.edges.iter().enumerate() {
            out[e.from].push(k);
            inc[e.to].push(k);
            if e.from != e.to {
                delta = delta.min(e.cost);
            }
        }
        GraphProblem {
            q: self.q,
            edges: self.edges,
            out,
            inc,
            delta,
        }
    }
}

/// Solved value function on the nodes of a [`GraphProblem`].
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSolution {
    pub values: Vec<f64>,
    /// Chosen successor for each node; a node maps to itself when motionless.
    pub policy: Vec<usize>,
    pub motionless: Vec<bool>,
    /// Nodes in the order they were accepted (label-setting solvers only).
    pub acceptance_order: Vec<usize>,
    pub stats: SolveStats,
}

impl GraphSolution {
    pub fn motionless_nodes(&self) -> Vec<usize> {
        (0..self.values.len())
            .filter(|&i| self.motionless[i])
            .collect()
    }
}
