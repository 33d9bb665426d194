//! Classic deterministic problems on graphs solved by plain dynamic
//! programming.  They serve as independent references for the
//! randomly-terminated solvers (discounted restatement, `p -> 0` and `p -> 1`
//! limits).  Costs are taken from a [`GraphProblem`]; its probabilities are
//! ignored.

use super::{GraphError, GraphProblem};

/// `U^k_i = min_j {K_ij + U^{k+1}_j}`, `U^t = q`; returns `U^0` after a
/// single backward sweep over `steps` stages.
pub fn finite_horizon(problem: &GraphProblem, steps: usize) -> Vec<f64> {
    let mut u = problem.q().to_vec();
    for _ in 0..steps {
        u = (0..problem.node_count())
            .map(|i| {
                problem
                    .out_edges(i)
                    .map(|e| e.cost + u[e.to])
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
    }
    u
}

/// Exit-time (shortest path) problem: `U_i = q_i` on the exit set and
/// `U_i = min_j {K_ij + U_j}` elsewhere, by Bellman-Ford style iteration.
pub fn exit_time(
    problem: &GraphProblem,
    exits: &[usize],
    max_iters: usize,
) -> Result<Vec<f64>, GraphError> {
    let n = problem.node_count();
    let mut is_exit = vec![false; n];
    for &x in exits {
        *is_exit.get_mut(x).ok_or(GraphError::NodeOutOfRange(x))? = true;
    }
    let mut u: Vec<f64> = (0..n)
        .map(|i| {
            if is_exit[i] {
                problem.q()[i]
            } else {
                f64::INFINITY
            }
        })
        .collect();
    for it in 0..max_iters {
        let mut changed = false;
        for i in (0..n).filter(|&i| !is_exit[i]) {
            let best = problem
                .out_edges(i)
                .map(|e| e.cost + u[e.to])
                .fold(f64::INFINITY, f64::min);
            if best < u[i] {
                u[i] = best;
                changed = true;
            }
        }
        if !changed {
            return Ok(u);
        }
        if it + 1 == max_iters {
            break;
        }
    }
    Err(GraphError::NotConverged {
        iterations: max_iters,
        residual: f64::NAN,
        last: u,
    })
}

/// Discounted problem `U_i = min_j {K_ij + alpha U_j}` with an optional
/// stopping cost: when `stop` is set, `U_i = min(q_i, ...)`.
/// `alpha = 1` is allowed only with stopping.
pub fn discounted(
    problem: &GraphProblem,
    alpha: f64,
    stop: bool,
    tol: f64,
    max_iters: usize,
) -> Result<Vec<f64>, GraphError> {
    let n = problem.node_count();
    let mut u = problem.q().to_vec();
    let mut residual = f64::INFINITY;
    for _ in 0..max_iters {
        residual = 0.0;
        for i in 0..n {
            let mut best = problem
                .out_edges(i)
                .map(|e| e.cost + alpha * u[e.to])
                .fold(f64::INFINITY, f64::min);
            if stop {
                best = best.min(problem.q()[i]);
            }
            residual = residual.max((best - u[i]).abs());
            u[i] = best;
        }
        if residual <= tol {
            return Ok(u);
        }
    }
    Err(GraphError::NotConverged {
        iterations: max_iters,
        residual,
        last: u,
    })
}

/// Infinite-horizon discounted problem with explicit costs `K̃`.
pub fn infinite_horizon(
    ih: &super::InfiniteHorizonProblem,
    tol: f64,
    max_iters: usize,
) -> Result<Vec<f64>, GraphError> {
    let mut b = GraphProblem::builder(vec![0.0; ih.node_count]);
    for &(i, j, k) in &ih.edges {
        b = b.edge(i, j, k, 0.5);
    }
    discounted(&b.build(), ih.alpha, false, tol, max_iters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::random::{random_problem, ProbabilitySpec, RandomSpec};
    use crate::graph::{dijkstra_solve, solve_v0, solve_v1, to_infinite_horizon};

    #[test]
    fn one_step_horizon_is_v1() {
        let g = random_problem(&RandomSpec::default(), 5);
        assert_eq!(finite_horizon(&g, 1), solve_v1(&g));
        assert_eq!(finite_horizon(&g, 0), g.q());
    }

    #[test]
    fn undiscounted_stopping_is_v0() {
        let g = random_problem(&RandomSpec::default(), 6);
        let a = discounted(&g, 1.0, true, 0.0, 10_000).unwrap();
        let b = solve_v0(&g).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn discounted_restatement_matches_label_setting() {
        let spec = RandomSpec {
            p: ProbabilitySpec::Uniform(0.3),
            ..Default::default()
        };
        for seed in 0..5 {
            let g = random_problem(&spec, seed);
            let ih = to_infinite_horizon(&g).unwrap();
            let a = infinite_horizon(&ih, 1e-14, 100_000).unwrap();
            let b = dijkstra_solve(&g, &Default::default()).unwrap();
            for (x, y) in a.iter().zip(&b.values) {
                assert!((x - y).abs() < 1e-9, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn exit_time_on_a_chain() {
        let g = GraphProblem::builder(vec![0.0, 0.0, 5.0])
            .edge(0, 1, 1.0, 0.5)
            .edge(1, 2, 2.0, 0.5)
            .build();
        assert_eq!(exit_time(&g, &[2], 10).unwrap(), vec![8.0, 7.0, 5.0]);
    }
}
