use proptest::prelude::*;

use randterm::analytic::RadialCase;
use randterm::eikonal::{response_cost, Call, CallSpec};
use randterm::grid::{
    fmm_solve, motionless_set, node_update, sweep_oracle, Grid2D, GridProblem, NodeParams,
};
use randterm::trajectory::trace;

fn params() -> impl Strategy<Value = NodeParams> {
    (
        0.0f64..2.0,
        0.5f64..3.0,
        0.2f64..2.0,
        0.05f64..10.0,
        0.01f64..0.5,
    )
        .prop_map(|(k, q, f, lambda, h)| NodeParams { k, q, f, lambda, h })
}

fn neighbors() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(prop_oneof![4 => 0.0f64..3.0, 1 => Just(f64::INFINITY)])
}

/// Smooth random fields on a small grid, built from a few cosine modes.
fn random_problem(seed: [f64; 6], n: usize) -> GridProblem {
    let g = Grid2D::square(n, 0.0, 1.0).unwrap();
    let wave = |a: f64, b: f64, x: f64, y: f64| (3.0 * a * x + 2.0 * b * y + a * b).cos();
    let q = g.sample(|x, y| 1.0 + 0.8 * wave(seed[0], seed[1], x, y));
    let f = g.sample(|x, y| 1.0 + 0.7 * wave(seed[2], seed[3], x, y));
    let k = g.sample(|x, y| 0.5 + 0.5 * wave(seed[4], seed[5], x, y));
    let lambda = vec![0.2 + seed[0].abs(); g.len()];
    GridProblem::new(g, f, k, q, lambda).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn update_is_monotone_in_each_neighbor(p in params(), nb in neighbors(), which in 0usize..4, bump in 0.0f64..1.0) {
        let base = node_update(nb, &p);
        let mut up = nb;
        up[which] += bump;
        prop_assert!(node_update(up, &p) >= base - 1e-12 * base.abs().max(1.0));
        prop_assert!(base <= p.q);
    }

    #[test]
    fn larger_neighbors_do_not_matter(p in params(), nb in neighbors(), which in 0usize..4, bump in 0.0f64..5.0) {
        let base = node_update(nb, &p);
        prop_assume!(nb[which] > base);
        let mut up = nb;
        up[which] += bump;
        prop_assert_eq!(node_update(up, &p), base);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fmm_respects_obstacle_and_matches_sweeps(seed in prop::array::uniform6(-2.0f64..2.0), n in 5usize..30) {
        let p = random_problem(seed, n);
        let s = fmm_solve(&p);
        for (v, q) in s.values.iter().zip(p.q()) {
            prop_assert!(v <= q);
        }
        for w in s.order.windows(2) {
            prop_assert!(s.values[w[0]] <= s.values[w[1]]);
        }
        let o = sweep_oracle(&p, &Default::default()).unwrap();
        let d = s.values.iter().zip(&o.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(d <= 1e-8, "{d}");
    }

    #[test]
    fn response_cost_grows_when_travel_slows(seed in prop::array::uniform6(-2.0f64..2.0), slow in 0.1f64..0.9) {
        let g = Grid2D::square(21, 0.0, 1.0).unwrap();
        let f = g.sample(|x, y| 1.0 + 0.5 * (seed[0] * x + seed[1] * y).sin());
        let slower: Vec<f64> = f.iter().enumerate().map(|(k, v)| if k % 3 == 0 { v * slow } else { *v }).collect();
        let calls = CallSpec::new(vec![
            Call { at: (0.2, 0.3), p: 0.25 },
            Call { at: (0.8, 0.7), p: 0.75 },
        ])
        .unwrap();
        let a = response_cost(&g, &f, &calls).unwrap();
        let b = response_cost(&g, &slower, &calls).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(y >= x);
        }
    }
}

#[test]
fn values_grow_with_lambda_and_motionless_sets_nest() {
    let base = RadialCase::circular(0.5).problem(101);
    let lambdas = [0.25, 0.5, 1.0, 5.0, 25.0];
    let runs: Vec<_> = lambdas
        .iter()
        .map(|&l| {
            let p = base.with_lambda(l);
            let s = fmm_solve(&p);
            let m = motionless_set(&s, &p, 1e-6 * p.q_scale());
            (s, m)
        })
        .collect();
    for w in runs.windows(2) {
        let ((a, ma), (b, mb)) = (&w[0], &w[1]);
        for k in 0..a.values.len() {
            assert!(a.values[k] <= b.values[k] + 1e-9);
            assert!(!ma.mask[k] || mb.mask[k]);
        }
    }
}

#[test]
fn values_approach_q_as_lambda_grows() {
    let base = RadialCase::trivial(0.5).problem(101);
    let gaps: Vec<f64> = [1.0, 10.0, 100.0, 1000.0]
        .iter()
        .map(|&l| {
            let p = base.with_lambda(l);
            let s = fmm_solve(&p);
            p.q()
                .iter()
                .zip(&s.values)
                .map(|(q, v)| q - v)
                .fold(0.0, f64::max)
        })
        .collect();
    for w in gaps.windows(2) {
        assert!(w[1] < w[0], "{gaps:?}");
    }
}

#[test]
fn value_does_not_rise_along_traced_paths() {
    let p = RadialCase::circular(0.5).problem(101);
    let h = p.grid().h;
    let s = fmm_solve(&p);
    // |∇V| <= max(K + λq)/f-ish; 3 is a safe bound on [-2, 2]²
    let lip = 3.0;
    for start in [(1.5, 0.2), (-0.7, 1.1), (0.3, -1.4), (-1.2, -0.9)] {
        let t = trace(&s, &p, start, &Default::default()).unwrap();
        for w in t.points.windows(2) {
            assert!(w[1].2 <= w[0].2 + 2.0 * h * lip, "{start:?}");
        }
    }
}
