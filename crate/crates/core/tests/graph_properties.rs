#![allow(clippy::needless_range_loop)]

use proptest::prelude::*;

use randterm::graph::random::{random_problem, ProbabilitySpec, RandomSpec};
use randterm::graph::{
    dial_solve, dijkstra_solve, extract_path, is_motionless_value, path_cost, solve_v0, solve_v1,
    value_iteration, GraphProblem, LabelSettingOptions, Seeding,
};
use randterm::idle::{build_problem, IdleScenario};

fn instance(seed: u64, nodes: usize, degree: usize, p: ProbabilitySpec) -> GraphProblem {
    let spec = RandomSpec {
        nodes,
        max_degree: degree,
        p,
        ..Default::default()
    };
    random_problem(&spec, seed)
}

fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn graphs() -> impl Strategy<Value = GraphProblem> {
    (
        any::<u64>(),
        2usize..200,
        2usize..=8,
        0.02f64..0.5,
        0.5f64..1.0,
    )
        .prop_map(|(seed, n, d, lo, hi)| instance(seed, n, d, ProbabilitySpec::PerEdge(lo, hi)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_solver_respects_the_obstacle(g in graphs()) {
        let d = dijkstra_solve(&g, &Default::default()).unwrap();
        let b = dial_solve(&g, &Default::default()).unwrap();
        let v = value_iteration(&g, &Default::default()).unwrap();
        for s in [&d.values, &b.values, &v.values] {
            for (v, q) in s.iter().zip(g.q()) {
                prop_assert!(v <= q, "{v} > {q}");
            }
        }
    }

    #[test]
    fn label_setting_matches_value_iteration(g in graphs()) {
        let d = dijkstra_solve(&g, &Default::default()).unwrap();
        let v = value_iteration(&g, &Default::default()).unwrap();
        let b = dial_solve(&g, &Default::default()).unwrap();
        prop_assert!(sup(&d.values, &v.values) <= 1e-9);
        prop_assert!(sup(&d.values, &b.values) <= 1e-12);
    }

    #[test]
    fn seeding_every_node_changes_nothing(g in graphs()) {
        let a = dijkstra_solve(&g, &Default::default()).unwrap();
        let b = dijkstra_solve(&g, &LabelSettingOptions { seeding: Seeding::AllNodes }).unwrap();
        prop_assert!(sup(&a.values, &b.values) <= 1e-12);
    }

    #[test]
    fn sandwich_and_p_monotonicity(seed in any::<u64>(), n in 2usize..150, ps in prop::collection::vec(0.01f64..0.99, 2..5)) {
        let base = instance(seed, n, 6, ProbabilitySpec::Uniform(0.5));
        let v0 = solve_v0(&base).unwrap();
        let v1 = solve_v1(&base);
        let mut ps = ps;
        ps.sort_by(f64::total_cmp);
        let mut prev: Option<Vec<f64>> = None;
        for p in ps {
            let s = dijkstra_solve(&base.with_uniform_p(p), &Default::default()).unwrap();
            for i in 0..n {
                prop_assert!(v0[i] <= s.values[i] + 1e-12 && s.values[i] <= v1[i] + 1e-12);
            }
            if let Some(pv) = &prev {
                for i in 0..n {
                    prop_assert!(pv[i] <= s.values[i] + 1e-12, "node {i}");
                    // nesting: motionless at smaller p stays motionless
                    if is_motionless_value(pv[i], base.q()[i]) {
                        prop_assert!(s.motionless[i], "node {i} left M");
                    }
                }
            }
            prev = Some(s.values);
        }
    }

    #[test]
    fn extreme_minima_are_motionless(g in graphs()) {
        let v0 = solve_v0(&g).unwrap();
        let v1 = solve_v1(&g);
        for i in g.global_minima() {
            prop_assert!(is_motionless_value(v0[i], g.q()[i]));
        }
        for i in g.local_minima() {
            prop_assert!(is_motionless_value(v1[i], g.q()[i]));
        }
    }

    #[test]
    fn optimal_paths_cost_their_value(g in graphs()) {
        let s = dijkstra_solve(&g, &Default::default()).unwrap();
        for i in 0..g.node_count() {
            let path = extract_path(&s, i).unwrap();
            let c = path_cost(&g, &path).unwrap();
            prop_assert!((c - s.values[i]).abs() <= 1e-9 * s.values[i].abs().max(1.0), "node {i}: {c} vs {}", s.values[i]);
        }
    }

    #[test]
    fn acceptance_is_causal(g in graphs()) {
        let s = dijkstra_solve(&g, &Default::default()).unwrap();
        let delta = g.delta();
        prop_assert!(delta > 0.0);
        let mut rank = vec![usize::MAX; g.node_count()];
        for (r, &i) in s.acceptance_order.iter().enumerate() {
            rank[i] = r;
        }
        prop_assert!(rank.iter().all(|&r| r != usize::MAX));
        for w in s.acceptance_order.windows(2) {
            prop_assert!(s.values[w[0]] <= s.values[w[1]]);
        }
        for i in 0..g.node_count() {
            let j = s.policy[i];
            if j != i {
                prop_assert!(rank[j] < rank[i]);
                prop_assert!(s.values[i] >= s.values[j] + delta * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn idle_call_nodes_are_motionless(seed in any::<u64>(), lambda in 0.01f64..5.0) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(3..40);
        let mut edges = Vec::new();
        for i in 1..n {
            let tau = rng.gen_range(0.1..3.0);
            edges.extend([(i - 1, i, tau), (i, i - 1, tau)]);
        }
        for _ in 0..n {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if a != b {
                edges.push((a, b, rng.gen_range(0.1..3.0)));
            }
        }
        let call = rng.gen_range(0..n);
        let s = IdleScenario::new(n, edges, lambda, vec![(call, 1.0)]).unwrap();
        let g = build_problem(&s);
        prop_assert!(g.validate().is_empty());
        prop_assert_eq!(g.q()[call], 0.0);
        prop_assert_eq!(g.global_minima(), vec![call]);
        let v = dijkstra_solve(&g, &Default::default()).unwrap();
        prop_assert!(v.motionless[call]);
    }
}

#[test]
fn dial_on_a_thousand_nodes() {
    let g = instance(2024, 1000, 8, ProbabilitySpec::PerEdge(0.05, 0.95));
    assert!(g.validate().is_empty());
    let d = dijkstra_solve(&g, &Default::default()).unwrap();
    let b = dial_solve(&g, &Default::default()).unwrap();
    let v = value_iteration(&g, &Default::default()).unwrap();
    assert!(sup(&d.values, &b.values) <= 1e-12);
    assert!(sup(&d.values, &v.values) <= 1e-9);
}
