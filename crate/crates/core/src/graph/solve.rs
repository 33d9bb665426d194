use super::{is_motionless_value, GraphError, GraphProblem, GraphSolution};
use crate::heap::MinHeap;

/// Counters reported alongside a solution.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub iterations: usize,
    pub heap_operations: usize,
    pub label_updates: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Sweep {
    /// Every component of `T W` computed from the previous iterate.
    #[default]
    Jacobi,
    /// In-place updates in natural node order.
    GaussSeidel,
}

#[derive(Debug, Clone)]
pub struct ValueIterationOptions {
    /// Starting guess; `q` when `None`.
    pub initial: Option<Vec<f64>>,
    /// Stop once the sup-norm change of one sweep is at most this.
    pub tol: f64,
    pub max_iters: usize,
    pub sweep: Sweep,
}

impl Default for ValueIterationOptions {
    fn default() -> Self {
        Self {
            initial: None,
            tol: 1e-13,
            max_iters: 100_000,
            sweep: Sweep::Jacobi,
        }
    }
}

/// Which nodes start out `Considered`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Seeding {
    /// Local minima of `q` (sufficient by the causal-chain argument).
    #[default]
    LocalMinima,
    /// Every node; slower but needs no preprocessing.
    AllNodes,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LabelSettingOptions {
    pub seeding: Seeding,
}

/// Fixed-point iteration `W <- T W`.  Works on any problem, including ones
/// violating A1-A3, so it serves as the reference for the label-setting
/// solvers.
pub fn value_iteration(
    problem: &GraphProblem,
    opts: &ValueIterationOptions,
) -> Result<GraphSolution, GraphError> {
    let n = problem.node_count();
    let mut w = match &opts.initial {
        Some(init) => {
            assert_eq!(init.len(), n, "initial guess has wrong length");
            init.clone()
        }
        None => problem.q().to_vec(),
    };
    let mut next = w.clone();
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iters {
        residual = 0.0;
        for i in 0..n {
            let src = match opts.sweep {
                Sweep::Jacobi => &w,
                Sweep::GaussSeidel => &next,
            };
            let tw = problem
                .out_edges(i)
                .map(|e| problem.candidate(e, src[e.to]))
                .fold(f64::INFINITY, f64::min);
            residual = residual.max(change(tw, w[i]));
            next[i] = tw;
        }
        std::mem::swap(&mut w, &mut next);
        if opts.sweep == Sweep::GaussSeidel {
            next.copy_from_slice(&w);
        }
        if residual <= opts.tol {
            let stats = SolveStats {
                iterations: it,
                ..SolveStats::default()
            };
            let policy = greedy_policy(problem, &w);
            return Ok(assemble(problem, w, policy, Vec::new(), stats));
        }
    }
    Err(GraphError::NotConverged {
        iterations: opts.max_iters,
        residual,
        last: w,
    })
}

fn change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs()
    }
}

/// Label-setting method in the style of Dijkstra.  Requires A1-A3.
///
/// Tentative labels start at `q`; the smallest `Considered` label is
/// accepted and every not-yet-accepted predecessor `i` of the accepted node
/// `j` is relaxed with `V_i := min(V_i, K_ij + p_ij q_j + (1 - p_ij) V_j)`.
/// Heap ties go to the lowest node index.
pub fn dijkstra_solve(
    problem: &GraphProblem,
    opts: &LabelSettingOptions,
) -> Result<GraphSolution, GraphError> {
    problem.ensure_valid()?;
    let n = problem.node_count();
    let mut values = problem.q().to_vec();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut state = vec![State::Far; n];
    let mut order = Vec::with_capacity(n);
    let mut heap = MinHeap::with_capacity(n);
    let mut updates = 0;

    for i in seeds(problem, opts.seeding) {
        state[i] = State::Considered;
        heap.push(values[i], i);
    }

    while let Some((v, j)) = heap.pop() {
        if state[j] == State::Accepted || v > values[j] {
            continue;
        }
        state[j] = State::Accepted;
        order.push(j);
        for e in problem.in_edges(j) {
            let i = e.from;
            if state[i] == State::Accepted {
                continue;
            }
            let c = problem.candidate(e, values[j]);
            if c < values[i] {
                values[i] = c;
                parent[i] = j;
                updates += 1;
                state[i] = State::Considered;
                heap.push(c, i);
            } else if state[i] == State::Far {
                state[i] = State::Considered;
                heap.push(values[i], i);
            }
        }
    }

    let stats = SolveStats {
        iterations: order.len(),
        heap_operations: heap.operations(),
        label_updates: updates,
    };
    Ok(assemble(problem, values, parent, order, stats))
}

/// Upper bound on the bucket array used by [`dial_solve`].
const MAX_BUCKETS: usize = 1 << 26;

/// Dial-like label setting with buckets of width `Δ`.  Requires A1-A3 with
/// `Δ > 0`.  Everything in the current bucket is accepted before moving on:
/// a label in the same bucket as the accepted node cannot be improved by it
/// since every candidate exceeds the accepted value by at least `Δ`.
pub fn dial_solve(
    problem: &GraphProblem,
    opts: &LabelSettingOptions,
) -> Result<GraphSolution, GraphError> {
    problem.ensure_valid()?;
    let n = problem.node_count();
    let delta = problem.delta();
    if !(delta > 0.0) {
        return Err(GraphError::ZeroDelta(delta));
    }
    let mut values = problem.q().to_vec();
    let mut parent: Vec<usize> = (0..n).collect();
    if n == 0 {
        return Ok(assemble(
            problem,
            values,
            parent,
            Vec::new(),
            SolveStats::default(),
        ));
    }
    let q_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let q_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // Live labels always lie in [start of current bucket, q_max].
    let span = if delta.is_finite() {
        ((q_max - q_min) / delta).floor()
    } else {
        0.0
    };
    if span >= MAX_BUCKETS as f64 {
        return Err(GraphError::BucketOverflow(span));
    }
    let nb = span as usize + 2;
    let bucket_of = |v: f64| -> usize {
        if delta.is_finite() {
            ((v - q_min) / delta).floor().max(0.0) as usize
        } else {
            0
        }
    };

    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); nb];
    let mut slot: Vec<Option<usize>> = vec![None; n];
    let mut accepted = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut live = 0usize;
    let mut ops = 0usize;
    let mut updates = 0usize;

    for i in seeds(problem, opts.seeding) {
        let b = bucket_of(values[i]);
        slot[i] = Some(b);
        buckets[b % nb].push(i);
        live += 1;
        ops += 1;
    }

    let mut cur = 0usize;
    while live > 0 {
        let s = cur % nb;
        while !buckets[s].is_empty() {
            let mut batch = std::mem::take(&mut buckets[s]);
            batch.sort_unstable();
            batch.dedup();
            for j in batch {
                ops += 1;
                if accepted[j] || slot[j] != Some(cur) {
                    continue;
                }
                accepted[j] = true;
                live -= 1;
                order.push(j);
                for e in problem.in_edges(j) {
                    let i = e.from;
                    if accepted[i] {
                        continue;
                    }
                    let c = problem.candidate(e, values[j]);
                    let target = if c < values[i] {
                        values[i] = c;
                        parent[i] = j;
                        updates += 1;
                        Some(bucket_of(c).max(cur))
                    } else if slot[i].is_none() {
                        Some(bucket_of(values[i]).max(cur))
                    } else {
                        None
                    };
                    if let Some(b) = target {
                        if slot[i] != Some(b) {
                            if slot[i].is_none() {
                                live += 1;
                            }
                            slot[i] = Some(b);
                            buckets[b % nb].push(i);
                            ops += 1;
                        }
                    }
                }
            }
        }
        cur += 1;
    }

    let stats = SolveStats {
        iterations: cur,
        heap_operations: ops,
        label_updates: updates,
    };
    Ok(assemble(problem, values, parent, order, stats))
}

/// Undiscounted optimal stopping value
/// `V0_i = min(q_i, min_{j != i} {K_ij + V0_j})`, the `p -> 0` limit.
pub fn solve_v0(problem: &GraphProblem) -> Result<Vec<f64>, GraphError> {
    problem.ensure_valid()?;
    let n = problem.node_count();
    let mut values = problem.q().to_vec();
    let mut done = vec![false; n];
    let mut heap = MinHeap::with_capacity(n);
    for i in 0..n {
        heap.push(values[i], i);
    }
    while let Some((v, j)) = heap.pop() {
        if done[j] || v > values[j] {
            continue;
        }
        done[j] = true;
        for e in problem.in_edges(j) {
            if e.from == j || done[e.from] {
                continue;
            }
            let c = e.cost + values[j];
            if c < values[e.from] {
                values[e.from] = c;
                heap.push(c, e.from);
            }
        }
    }
    Ok(values)
}

/// Single-step lookahead value `V1_i = min_{j ∈ N(i)} {K_ij + q_j}`, the
/// `p -> 1` limit.
pub fn solve_v1(problem: &GraphProblem) -> Vec<f64> {
    let q = problem.q();
    (0..problem.node_count())
        .map(|i| {
            problem
                .out_edges(i)
                .map(|e| e.cost + q[e.to])
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// For `x_i` in the strict set `M¹₀` (staying put is the only
/// single-step-optimal move) returns `q_i / min_{j != i} {K_ij + q_j}`, a
/// probability above which the node is motionless.  `None` otherwise.
///
/// Diagnostic only: assumes `q >= 0` and is not used to certify anything.
pub fn motionless_threshold_probability(problem: &GraphProblem, i: usize) -> Option<f64> {
    let q = problem.q();
    let best = problem
        .out_edges(i)
        .filter(|e| e.to != i)
        .map(|e| e.cost + q[e.to])
        .fold(f64::INFINITY, f64::min);
    (q[i] < best && best.is_finite() && best > 0.0).then(|| q[i] / best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Far,
    Considered,
    Accepted,
}

fn seeds(problem: &GraphProblem, seeding: Seeding) -> Vec<usize> {
    match seeding {
        Seeding::LocalMinima => problem.local_minima(),
        Seeding::AllNodes => (0..problem.node_count()).collect(),
    }
}

/// Argmin successor of the optimality principle; self for motionless nodes.
fn greedy_policy(problem: &GraphProblem, values: &[f64]) -> Vec<usize> {
    (0..problem.node_count())
        .map(|i| {
            let mut best = (f64::INFINITY, i);
            for e in problem.out_edges(i) {
                if e.to == i {
                    continue;
                }
                let c = problem.candidate(e, values[e.to]);
                if c < best.0 || (c == best.0 && e.to < best.1) {
                    best = (c, e.to);
                }
            }
            best.1
        })
        .collect()
}

fn assemble(
    problem: &GraphProblem,
    values: Vec<f64>,
    mut policy: Vec<usize>,
    acceptance_order: Vec<usize>,
    stats: SolveStats,
) -> GraphSolution {
    let q = problem.q();
    let motionless: Vec<bool> = values
        .iter()
        .zip(q)
        .map(|(&v, &q)| is_motionless_value(v, q))
        .collect();
    for (i, m) in motionless.iter().enumerate() {
        if *m {
            policy[i] = i;
        }
    }
    GraphSolution {
        values,
        policy,
        motionless,
        acceptance_order,
        stats,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::random::{random_problem, RandomSpec};

    fn two_node() -> GraphProblem {
        GraphProblem::builder(vec![10.0, 1.0])
            .undirected(0, 1, 2.0, 0.5)
            .self_loops(0.5)
            .build()
    }

    /// Detour: K = 0, q = (1, 10, 0), path x_1 -> x_2 -> x_3.
    pub(crate) fn detour(p: f64) -> GraphProblem {
        GraphProblem::builder(vec![1.0, 10.0, 0.0])
            .self_loops(p)
            .edge(0, 1, 0.0, p)
            .edge(1, 2, 0.0, p)
            .build()
    }

    /// Shortcut chain with `K_23 = c`.
    pub(crate) fn shortcut(c: f64, p: f64) -> GraphProblem {
        GraphProblem::builder(vec![10.0, 9.0, 0.0])
            .self_loops(p)
            .edge(0, 1, 1.0, p)
            .edge(1, 2, c, p)
            .build()
    }

    #[test]
    fn two_node_dijkstra() {
        let s = dijkstra_solve(&two_node(), &Default::default()).unwrap();
        assert_eq!(s.values, vec![3.0, 1.0]);
        assert_eq!(s.acceptance_order, vec![1, 0]);
        assert_eq!(s.policy, vec![1, 1]);
        assert_eq!(s.motionless, vec![false, true]);
    }

    #[test]
    fn two_node_dial() {
        let s = dial_solve(&two_node(), &Default::default()).unwrap();
        assert_eq!(s.values, vec![3.0, 1.0]);
    }

    #[test]
    fn constant_q_is_motionless_everywhere() {
        let g = GraphProblem::builder(vec![4.0; 3])
            .self_loops(0.3)
            .undirected(0, 1, 0.5, 0.3)
            .undirected(1, 2, 0.0, 0.3)
            .build();
        for s in [
            dijkstra_solve(&g, &Default::default()).unwrap(),
            value_iteration(&g, &Default::default()).unwrap(),
        ] {
            assert_eq!(s.values, vec![4.0; 3]);
            assert!(s.motionless.iter().all(|&m| m));
        }
    }

    #[test]
    fn single_node() {
        let g = GraphProblem::builder(vec![2.5]).self_loops(0.5).build();
        assert_eq!(
            dial_solve(&g, &Default::default()).unwrap().values,
            vec![2.5]
        );
        assert_eq!(
            dijkstra_solve(&g, &Default::default()).unwrap().values,
            vec![2.5]
        );
    }

    #[test]
    fn dial_rejects_zero_delta() {
        let g = detour(0.3);
        assert!(matches!(
            dial_solve(&g, &Default::default()),
            Err(GraphError::ZeroDelta(_))
        ));
    }

    #[test]
    fn label_setting_rejects_invalid() {
        let g = GraphProblem::builder(vec![0.0, 0.0])
            .undirected(0, 1, 1.0, 0.5)
            .build();
        assert!(matches!(
            dijkstra_solve(&g, &Default::default()),
            Err(GraphError::Invalid(_))
        ));
    }

    #[test]
    fn two_cycle_value_iteration() {
        let g = GraphProblem::builder(vec![0.0, 0.0])
            .edge(0, 1, 1.0, 0.5)
            .edge(1, 0, 1.0, 0.5)
            .edge(0, 0, 10.0, 0.5)
            .edge(1, 1, 10.0, 0.5)
            .build();
        let s = value_iteration(&g, &Default::default()).unwrap();
        assert!((s.values[0] - 2.0).abs() < 1e-10 && (s.values[1] - 2.0).abs() < 1e-10);
        assert!(s.motionless_nodes().is_empty());
    }

    #[test]
    fn nonconvergence_carries_last_iterate() {
        let g = GraphProblem::builder(vec![0.0, 0.0])
            .edge(0, 1, 1.0, 0.01)
            .edge(1, 0, 1.0, 0.01)
            .build();
        let opts = ValueIterationOptions {
            max_iters: 5,
            ..Default::default()
        };
        match value_iteration(&g, &opts) {
            Err(GraphError::NotConverged {
                iterations, last, ..
            }) => {
                assert_eq!(iterations, 5);
                assert_eq!(last.len(), 2);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn gauss_seidel_matches_jacobi() {
        let g = random_problem(&RandomSpec::default(), 11);
        let j = value_iteration(&g, &Default::default()).unwrap();
        let gs = value_iteration(
            &g,
            &ValueIterationOptions {
                sweep: Sweep::GaussSeidel,
                ..Default::default()
            },
        )
        .unwrap();
        for (a, b) in j.values.iter().zip(&gs.values) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(gs.stats.iterations <= j.stats.iterations);
    }

    #[test]
    fn detour_values() {
        for p in [0.05, 0.1, 0.5] {
            let s = dijkstra_solve(&detour(p), &Default::default()).unwrap();
            assert!((s.values[0] - (1.0f64).min(10.0 * p)).abs() <= 1e-12);
            assert_eq!(s.values[1], 0.0);
            assert_eq!(s.values[2], 0.0);
        }
    }

    #[test]
    fn shortcut_values_and_limits() {
        for p in [0.1, 0.25, 0.5, 0.9] {
            let g = shortcut(1.0, p);
            let s = dijkstra_solve(&g, &Default::default()).unwrap();
            assert!((s.values[0] - (2.0 + 8.0 * p)).abs() <= 1e-12);
            assert_eq!(&s.values[1..], &[1.0, 0.0]);
            assert!(!s.motionless[0]);
        }
        let g = shortcut(1.0, 0.5);
        assert_eq!(solve_v0(&g).unwrap(), vec![2.0, 1.0, 0.0]);
        assert_eq!(solve_v1(&g), vec![10.0, 1.0, 0.0]);
        // C > 9 keeps x_1 motionless for every p
        let s = dijkstra_solve(&shortcut(9.5, 0.3), &Default::default()).unwrap();
        assert!(s.motionless[0]);
    }

    #[test]
    fn seeding_all_nodes_agrees() {
        let g = random_problem(&RandomSpec::default(), 3);
        let a = dijkstra_solve(&g, &Default::default()).unwrap();
        let b = dijkstra_solve(
            &g,
            &LabelSettingOptions {
                seeding: Seeding::AllNodes,
            },
        )
        .unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn threshold_probability_diagnostic() {
        // x_1 in M¹₀ when q_1 < K_12 + q_2
        let g = shortcut(1.0, 0.5).with_uniform_p(0.5);
        assert_eq!(motionless_threshold_probability(&g, 0), None);
        let g = GraphProblem::builder(vec![4.0, 1.0])
            .self_loops(0.5)
            .edge(0, 1, 4.0, 0.5)
            .build();
        let p = motionless_threshold_probability(&g, 0).unwrap();
        assert_eq!(p, 0.8);
        let s = dijkstra_solve(&g.with_uniform_p(0.9), &Default::default()).unwrap();
        assert!(s.motionless[0]);
    }
}
