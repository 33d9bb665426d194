//! Conversions between randomly-terminated problems and their discounted or
//! self-cost-free equivalents.  All of them need a single `p` for the whole
//! graph.

use super::{GraphError, GraphProblem};

/// Deterministic infinite-horizon problem with discount factor `alpha` and
/// transition costs `K̃_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct InfiniteHorizonProblem {
    pub node_count: usize,
    /// `(from, to, K̃)`.
    pub edges: Vec<(usize, usize, f64)>,
    pub alpha: f64,
}

impl InfiniteHorizonProblem {
    pub fn self_cost(&self, i: usize) -> Option<f64> {
        self.edges
            .iter()
            .find(|&&(a, b, _)| a == i && b == i)
            .map(|e| e.2)
    }
}

fn require_uniform_p(problem: &GraphProblem) -> Result<f64, GraphError> {
    Ok(problem.uniform_p()?.unwrap_or(0.5))
}

/// Moves self-transition costs into the terminal cost:
/// `q_i' = q_i + K_ii / p`, `K_ij' = K_ij - K_jj`, `K_ii' = 0`.
/// The value function is unchanged.
pub fn normalize_self_costs(problem: &GraphProblem) -> Result<GraphProblem, GraphError> {
    let n = problem.node_count();
    let p = require_uniform_p(problem)?;
    let mut self_cost = vec![0.0; n];
    for (i, sc) in self_cost.iter_mut().enumerate() {
        *sc = problem
            .edge(i, i)
            .ok_or_else(|| {
                GraphError::Invalid(vec![super::Violation::MissingSelfLoop { node: i }])
            })?
            .cost;
    }
    let q: Vec<f64> = problem
        .q()
        .iter()
        .zip(&self_cost)
        .map(|(q, k)| q + k / p)
        .collect();
    let mut b = GraphProblem::builder(q);
    for e in problem.edges() {
        let cost = if e.from == e.to {
            0.0
        } else {
            let c = e.cost - self_cost[e.to];
            if c < 0.0 {
                return Err(GraphError::NegativeCost {
                    from: e.from,
                    to: e.to,
                    cost: c,
                });
            }
            c
        };
        b = b.edge(e.from, e.to, cost, e.p);
    }
    Ok(b.build())
}

/// Restates a discounted problem as a randomly-terminated one:
/// `p = 1 - alpha`, `q_i = K̃_ii / p`, `K_ij = K̃_ij - p q_j`, `K_ii = 0`.
pub fn from_infinite_horizon(ih: &InfiniteHorizonProblem) -> Result<GraphProblem, GraphError> {
    if !(ih.alpha > 0.0 && ih.alpha < 1.0) {
        return Err(GraphError::BadDiscount(ih.alpha));
    }
    let p = 1.0 - ih.alpha;
    let mut q = vec![0.0; ih.node_count];
    for (i, qi) in q.iter_mut().enumerate() {
        let k = ih.self_cost(i).ok_or_else(|| {
            GraphError::Invalid(vec![super::Violation::MissingSelfLoop { node: i }])
        })?;
        *qi = k / p;
    }
    let mut b = GraphProblem::builder(q.clone());
    for &(i, j, k) in &ih.edges {
        if i >= ih.node_count || j >= ih.node_count {
            return Err(GraphError::NodeOutOfRange(i.max(j)));
        }
        let cost = if i == j { 0.0 } else { k - p * q[j] };
        if cost < 0.0 {
            return Err(GraphError::NegativeCost {
                from: i,
                to: j,
                cost,
            });
        }
        b = b.edge(i, j, cost, p);
    }
    Ok(b.build())
}

/// Inverse of [`from_infinite_horizon`]: `K̃_ij = K_ij + p q_j`,
/// `alpha = 1 - p`.
pub fn to_infinite_horizon(problem: &GraphProblem) -> Result<InfiniteHorizonProblem, GraphError> {
    let p = require_uniform_p(problem)?;
    let q = problem.q();
    Ok(InfiniteHorizonProblem {
        node_count: problem.node_count(),
        edges: problem
            .edges()
            .iter()
            .map(|e| (e.from, e.to, e.cost + p * q[e.to]))
            .collect(),
        alpha: 1.0 - p,
    })
}
