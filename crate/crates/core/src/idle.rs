//! Optimal use of idle time on a graph: a single vehicle repositions while
//! waiting for the first request of a Poisson stream, minimizing the expected
//! wait of that request.
//!
//! A transition `i -> j` takes time `τ_ij` and cannot be aborted.  A request
//! arriving at `t < τ_ij` waits the remaining `τ_ij - t` on top of the
//! response time from `j`, which gives
//!
//! ```text
//! K_ij = (e^{-λτ} - (1 - λτ)) / λ,    p_ij = 1 - e^{-λτ},
//! q(x) = Σ P̃(x̃) d(x, x̃).
//! ```

use thiserror::Error;

use crate::graph::GraphProblem;
use crate::heap::MinHeap;

/// Probability stored on the free self-loops.  The label-setting solvers
/// never read it: a self-loop candidate `p q_i + (1 - p) V_i` cannot undercut
/// `V_i <= q_i` for any `p`.
pub const SELF_LOOP_P: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("call rate must be positive, got {0}")]
    BadRate(f64),
    #[error("travel time on edge {from}->{to} must be positive, got {tau}")]
    BadTravelTime { from: usize, to: usize, tau: f64 },
    #[error("call probabilities sum to {0}, expected 1")]
    ProbabilitySum(f64),
    #[error("negative call probability {0}")]
    NegativeProbability(f64),
    #[error("node {0} out of range")]
    NodeOutOfRange(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdleScenario {
    pub node_count: usize,
    /// Directed `(from, to, τ)`.
    pub edges: Vec<(usize, usize, f64)>,
    /// Calls per unit time.
    pub lambda: f64,
    /// `(node, P̃)`; probabilities sum to one.
    pub calls: Vec<(usize, f64)>,
}

impl IdleScenario {
    pub fn new(
        node_count: usize,
        edges: Vec<(usize, usize, f64)>,
        lambda: f64,
        calls: Vec<(usize, f64)>,
    ) -> Result<Self, ScenarioError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(ScenarioError::BadRate(lambda));
        }
        for &(from, to, tau) in &edges {
            if from >= node_count || to >= node_count {
                return Err(ScenarioError::NodeOutOfRange(from.max(to)));
            }
            if from != to && !(tau > 0.0 && tau.is_finite()) {
                return Err(ScenarioError::BadTravelTime { from, to, tau });
            }
        }
        let mut sum = 0.0;
        for &(x, p) in &calls {
            if x >= node_count {
                return Err(ScenarioError::NodeOutOfRange(x));
            }
            if p < 0.0 {
                return Err(ScenarioError::NegativeProbability(p));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(ScenarioError::ProbabilitySum(sum));
        }
        Ok(Self {
            node_count,
            edges,
            lambda,
            calls,
        })
    }

    fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self
            .calls
            .iter()
            .filter(|c| c.1 > 0.0)
            .map(|c| c.0)
            .collect();
        s.sort_unstable();
        s.dedup();
        s
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum DistanceMethod {
    /// Repeated Dijkstra when the call support is small relative to
    /// `M / ln M`, Floyd-Warshall otherwise.
    #[default]
    Auto,
    RepeatedDijkstra,
    FloydWarshall,
}

/// Expected extra wait `∫_0^τ (τ - t) λ e^{-λt} dt` caused by committing to
/// a transition of duration `tau`.
pub fn transition_cost(lambda: f64, tau: f64) -> f64 {
    let x = lambda * tau;
    // e^{-x} - 1 + x loses all digits to cancellation for small x
    let g = if x < 1e-3 {
        x * x * (0.5 - x * (1.0 / 6.0 - x * (1.0 / 24.0 - x / 120.0)))
    } else {
        (-x).exp_m1() + x
    };
    g / lambda
}

/// Probability that a call arrives during a transition of duration `tau`.
pub fn termination_probability(lambda: f64, tau: f64) -> f64 {
    -(-lambda * tau).exp_m1()
}

/// Single-source shortest travel times over `adj[u] = [(v, τ)]`.
fn dijkstra(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut heap = MinHeap::with_capacity(adj.len());
    dist[source] = 0.0;
    heap.push(0.0, source);
    while let Some((d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(nd, v);
            }
        }
    }
    dist
}

fn floyd_warshall(s: &IdleScenario) -> Vec<Vec<f64>> {
    let n = s.node_count;
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(i, j, tau) in &s.edges {
        if i != j && tau < d[i][j] {
            d[i][j] = tau;
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i][k];
            if !dik.is_finite() {
                continue;
            }
            for j in 0..n {
                let c = dik + d[k][j];
                if c < d[i][j] {
                    d[i][j] = c;
                }
            }
        }
    }
    d
}

fn adjacency(s: &IdleScenario, reverse: bool) -> Vec<Vec<(usize, f64)>> {
    let mut adj = vec![Vec::new(); s.node_count];
    for &(i, j, tau) in &s.edges {
        if i == j {
            continue;
        }
        if reverse {
            adj[j].push((i, tau));
        } else {
            adj[i].push((j, tau));
        }
    }
    adj
}

fn use_dijkstra(method: DistanceMethod, sources: usize, n: usize) -> bool {
    match method {
        DistanceMethod::RepeatedDijkstra => true,
        DistanceMethod::FloydWarshall => false,
        DistanceMethod::Auto => (sources as f64) < n as f64 / (n as f64).ln().max(1.0),
    }
}

/// Matrix `d[x][y]` of minimal travel times from `x` to `y`
/// (`+∞` when unreachable).
pub fn all_pairs_times(s: &IdleScenario, method: DistanceMethod) -> Vec<Vec<f64>> {
    if use_dijkstra(method, s.node_count, s.node_count) {
        let adj = adjacency(s, false);
        (0..s.node_count).map(|x| dijkstra(&adj, x)).collect()
    } else {
        floyd_warshall(s)
    }
}

/// For each target `t`, the travel times `d(x, t)` from every node `x`.
pub fn times_to(s: &IdleScenario, targets: &[usize], method: DistanceMethod) -> Vec<Vec<f64>> {
    if use_dijkstra(method, targets.len(), s.node_count) {
        let radj = adjacency(s, true);
        targets.iter().map(|&t| dijkstra(&radj, t)).collect()
    } else {
        let d = floyd_warshall(s);
        targets
            .iter()
            .map(|&t| d.iter().map(|row| row[t]).collect())
            .collect()
    }
}

/// Expected response time `q(x) = Σ P̃(x̃) d(x, x̃)`.
pub fn response_times(s: &IdleScenario, method: DistanceMethod) -> Vec<f64> {
    let support = s.support();
    let cols = times_to(s, &support, method);
    let mut q = vec![0.0; s.node_count];
    for &(x, p) in &s.calls {
        if p == 0.0 {
            continue;
        }
        let col = &cols[support.binary_search(&x).unwrap()];
        for (qi, d) in q.iter_mut().zip(col) {
            *qi += p * d;
        }
    }
    q
}

/// Randomly-terminated graph problem whose value is the minimal expected
/// wait for the first call.  Every node gets a free self-loop.
pub fn build_problem(s: &IdleScenario) -> GraphProblem {
    let q = response_times(s, DistanceMethod::Auto);
    let mut b = GraphProblem::builder(q);
    for &(i, j, tau) in &s.edges {
        if i == j {
            continue;
        }
        b = b.edge(
            i,
            j,
            transition_cost(s.lambda, tau),
            termination_probability(s.lambda, tau),
        );
    }
    b.self_loops(SELF_LOOP_P).build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{dijkstra_solve, value_iteration};

    fn chain(lambda: f64) -> IdleScenario {
        // a - b - c, unit travel times, every call at c
        IdleScenario::new(
            3,
            vec![(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0), (2, 1, 1.0)],
            lambda,
            vec![(2, 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn closed_forms() {
        let k = transition_cost(1.0, 1.0);
        let p = termination_probability(1.0, 1.0);
        assert!((k - 0.367_879_441_171_442_3).abs() < 1e-15);
        assert!((p - 0.632_120_558_828_557_7).abs() < 1e-15);
    }

    #[test]
    fn small_rate_limit() {
        // K ~ λτ²/2, p ~ λτ
        for x in [1e-2, 1e-4, 1e-6, 1e-9] {
            let k = transition_cost(x, 1.0);
            assert!((k / (x / 2.0) - 1.0).abs() < 1.0 * x, "x = {x}: K = {k}");
            assert!((termination_probability(x, 1.0) / x - 1.0).abs() < x);
        }
    }

    #[test]
    fn cost_matches_quadrature() {
        // midpoint rule on ∫_0^τ (τ - t) λ e^{-λt} dt
        for (lambda, tau) in [(0.3, 2.0), (1.0, 1.0), (4.0, 0.7), (0.01, 3.0)] {
            let n = 200_000;
            let dt = tau / n as f64;
            let quad: f64 = (0..n)
                .map(|k| {
                    let t = (k as f64 + 0.5) * dt;
                    (tau - t) * lambda * (-lambda * t).exp() * dt
                })
                .sum();
            assert!((transition_cost(lambda, tau) - quad).abs() < 1e-9);
        }
    }

    #[test]
    fn cost_is_increasing_in_tau() {
        let mut prev = 0.0;
        for k in 1..200 {
            let c = transition_cost(0.7, k as f64 * 0.05);
            assert!(c > prev);
            prev = c;
        }
    }

    #[test]
    fn path_graph_distances() {
        let s = chain(1.0);
        let d = all_pairs_times(&s, DistanceMethod::RepeatedDijkstra);
        assert_eq!(d[0][2], 2.0);
        assert_eq!(d[2][0], 2.0);
        assert_eq!(d[1][1], 0.0);
        assert_eq!(d, all_pairs_times(&s, DistanceMethod::FloydWarshall));
    }

    #[test]
    fn unreachable_is_infinite() {
        let s = IdleScenario::new(2, vec![(0, 1, 3.0)], 1.0, vec![(1, 1.0)]).unwrap();
        let d = all_pairs_times(&s, DistanceMethod::Auto);
        assert_eq!(d[0][1], 3.0);
        assert_eq!(d[1][0], f64::INFINITY);
    }

    #[test]
    fn chain_value_matches_direct_expectation() {
        // From a the vehicle heads a -> b -> c; the expected wait is
        // ∫_0^2 (2 - t) e^{-t} dt = 1 + e^{-2} for λ = 1.
        let g = build_problem(&chain(1.0));
        assert_eq!(g.q(), &[2.0, 1.0, 0.0]);
        assert!(g.validate().is_empty());
        let s = dijkstra_solve(&g, &Default::default()).unwrap();
        assert!((s.values[0] - (1.0 + (-2.0f64).exp())).abs() < 1e-14);
        assert!((s.values[1] - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(s.values[2], 0.0);
        assert!(s.motionless[2]);
        let vi = value_iteration(&g, &Default::default()).unwrap();
        assert!((vi.values[0] - s.values[0]).abs() < 1e-12);
    }

    #[test]
    fn single_call_location_is_motionless() {
        for lambda in [0.01, 0.5, 3.0, 50.0] {
            let g = build_problem(&chain(lambda));
            let s = dijkstra_solve(&g, &Default::default()).unwrap();
            assert_eq!(g.global_minima(), vec![2]);
            assert!(s.motionless[2]);
        }
    }

    #[test]
    fn invalid_scenarios() {
        assert_eq!(
            IdleScenario::new(1, vec![], 0.0, vec![(0, 1.0)]),
            Err(ScenarioError::BadRate(0.0))
        );
        assert!(matches!(
            IdleScenario::new(2, vec![(0, 1, 0.0)], 1.0, vec![(0, 1.0)]),
            Err(ScenarioError::BadTravelTime { .. })
        ));
        assert!(matches!(
            IdleScenario::new(2, vec![], 1.0, vec![(0, 0.5)]),
            Err(ScenarioError::ProbabilitySum(_))
        ));
    }
}
