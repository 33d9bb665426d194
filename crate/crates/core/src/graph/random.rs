//! Seeded generator of random instances satisfying A1-A3, used by the
//! randomized test corpora and the CLI's `--seed` option.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::GraphProblem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbabilitySpec {
    /// One `p` shared by every edge.
    Uniform(f64),
    /// Independent `p_ij` drawn from `[lo, hi]`.
    PerEdge(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomSpec {
    pub nodes: usize,
    /// Maximum out-degree including the self-loop.
    pub max_degree: usize,
    /// Lower bound `Δ` on non-self transition costs.
    pub delta: f64,
    /// Non-self costs are drawn from `[delta, delta + cost_span]`.
    pub cost_span: f64,
    /// Terminal costs are drawn from `[0, q_max]`.
    pub q_max: f64,
    pub p: ProbabilitySpec,
}

impl Default for RandomSpec {
    fn default() -> Self {
        Self {
            nodes: 60,
            max_degree: 6,
            delta: 0.1,
            cost_span: 2.0,
            q_max: 10.0,
            p: ProbabilitySpec::PerEdge(0.05, 0.95),
        }
    }
}

pub fn random_problem(spec: &RandomSpec, seed: u64) -> GraphProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.nodes.max(1);
    let q: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=spec.q_max)).collect();
    let draw_p = |rng: &mut ChaCha8Rng| match spec.p {
        ProbabilitySpec::Uniform(p) => p,
        ProbabilitySpec::PerEdge(lo, hi) => rng.gen_range(lo..=hi),
    };
    let mut b = GraphProblem::builder(q);
    for i in 0..n {
        let p = draw_p(&mut rng);
        b = b.edge(i, i, 0.0, p);
        if n == 1 {
            continue;
        }
        let max_out = spec.max_degree.saturating_sub(1).min(n - 1).max(1);
        let k = rng.gen_range(1..=max_out);
        for t in sample(&mut rng, n - 1, k).into_iter() {
            let j = if t >= i { t + 1 } else { t };
            let cost = spec.delta + rng.gen_range(0.0..=spec.cost_span);
            let p = draw_p(&mut rng);
            b = b.edge(i, j, cost, p);
        }
    }
    b.build()
}
