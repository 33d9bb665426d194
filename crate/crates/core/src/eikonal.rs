//! Travel-time fields `f |∇u| = 1` from point sources and the expected
//! response time `q = Σ P̃_i u_i` of a vehicle answering calls at fixed
//! locations.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Grid2D, GridError};
use crate::heap::MinHeap;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CallError {
    #[error("call probabilities sum to {0}, expected 1")]
    ProbabilitySum(f64),
    #[error("negative call probability {0}")]
    NegativeProbability(f64),
    #[error("no call locations")]
    Empty,
    #[error("speed has {got} values, grid has {expected}")]
    FieldSize { got: usize, expected: usize },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// One possible call location and its probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Call {
    pub at: (f64, f64),
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CallSpec {
    pub calls: Vec<Call>,
}

impl CallSpec {
    pub fn new(calls: Vec<Call>) -> Result<Self, CallError> {
        let spec = Self { calls };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), CallError> {
        if self.calls.is_empty() {
            return Err(CallError::Empty);
        }
        if let Some(c) = self.calls.iter().find(|c| c.p < 0.0) {
            return Err(CallError::NegativeProbability(c.p));
        }
        let sum: f64 = self.calls.iter().map(|c| c.p).sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(CallError::ProbabilitySum(sum));
        }
        Ok(())
    }

    /// Gridpoints nearest to each call location.
    pub fn snapped(&self, grid: &Grid2D) -> Result<Vec<usize>, GridError> {
        self.calls
            .iter()
            .map(|c| grid.nearest(c.at.0, c.at.1))
            .collect()
    }
}

fn passable(f: f64) -> bool {
    f > 0.0 && f.is_finite()
}

/// First-order upwind travel time from `source` with speed `f`.  Points
/// with `f <= 0` are walls; unreachable points get `+∞`.
pub fn eikonal_solve(grid: &Grid2D, f: &[f64], source: usize) -> Vec<f64> {
    let n = grid.len();
    let mut u = vec![f64::INFINITY; n];
    if !passable(f[source]) {
        return u;
    }
    let mut done = vec![false; n];
    let mut heap = MinHeap::with_capacity(n);
    u[source] = 0.0;
    heap.push(0.0, source);
    while let Some((val, k)) = heap.pop() {
        if done[k] || val > u[k] {
            continue;
        }
        done[k] = true;
        for m in grid.neighbors(k).into_iter().flatten() {
            if done[m] || !passable(f[m]) {
                continue;
            }
            let nb = grid.neighbors(m);
            let axis = |a: usize, b: usize| {
                [nb[a], nb[b]]
                    .into_iter()
                    .flatten()
                    .filter(|&x| done[x])
                    .map(|x| u[x])
                    .fold(f64::INFINITY, f64::min)
            };
            let cand = travel_update(axis(0, 2), axis(1, 3), grid.h / f[m]);
            if cand < u[m] {
                u[m] = cand;
                heap.push(cand, m);
            }
        }
    }
    u
}

/// Smallest `u >= max(a, b)` with `(u - a)² + (u - b)² = s²`, or the
/// one-sided `min(a, b) + s`.
fn travel_update(a: f64, b: f64, s: f64) -> f64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let d = hi - lo;
    if hi == f64::INFINITY || d >= s {
        return lo + s;
    }
    lo + 0.5 * (d + (2.0 * s * s - d * d).sqrt())
}

/// `q(x) = Σ P̃_i u_i(x)` with each `u_i` solved from the snapped call
/// location.
pub fn response_cost(grid: &Grid2D, f: &[f64], calls: &CallSpec) -> Result<Vec<f64>, CallError> {
    calls.validate()?;
    if f.len() != grid.len() {
        return Err(CallError::FieldSize {
            got: f.len(),
            expected: grid.len(),
        });
    }
    let sources = calls.snapped(grid)?;
    for (c, &s) in calls.calls.iter().zip(&sources) {
        if !passable(f[s]) {
            return Err(GridError::Masked(c.at.0, c.at.1).into());
        }
    }
    let mut q = vec![0.0; grid.len()];
    for (c, &s) in calls.calls.iter().zip(&sources) {
        if c.p == 0.0 {
            continue;
        }
        let u = eikonal_solve(grid, f, s);
        for (qi, ui) in q.iter_mut().zip(u) {
            *qi += c.p * ui;
        }
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_along_axes() {
        let g = Grid2D::square(41, -2.0, 2.0).unwrap();
        let src = g.nearest(0.0, 0.0).unwrap();
        let u = eikonal_solve(&g, &vec![1.0; g.len()], src);
        assert_eq!(u[src], 0.0);
        let on_axis = u[g.nearest(1.5, 0.0).unwrap()];
        assert!((on_axis - 1.5).abs() < 1e-12);
        // diagonals overestimate by O(h)
        let diag = u[g.nearest(1.0, 1.0).unwrap()];
        assert!(diag >= 2f64.sqrt() && diag < 2f64.sqrt() + 0.2);
        assert!(u.iter().enumerate().all(|(k, &x)| x > 0.0 || k == src));
    }

    #[test]
    fn slow_obstacle_delays_arrival() {
        let g = Grid2D::square(61, 0.0, 3.0).unwrap();
        let free = vec![1.0; g.len()];
        let slow = g.sample(|x, y| {
            if (x - 1.5).hypot(y - 1.5) < 0.6 {
                0.2
            } else {
                1.0
            }
        });
        let src = g.nearest(0.3, 1.5).unwrap();
        let target = g.nearest(2.7, 1.5).unwrap();
        let a = eikonal_solve(&g, &free, src)[target];
        let b = eikonal_solve(&g, &slow, src)[target];
        assert!(b > a + 0.1, "{a} {b}");
    }

    #[test]
    fn walls_are_impassable() {
        let g = Grid2D::square(11, 0.0, 1.0).unwrap();
        let f = g.sample(|x, _| if (0.45..0.55).contains(&x) { 0.0 } else { 1.0 });
        let u = eikonal_solve(&g, &f, 0);
        assert_eq!(u[g.nearest(1.0, 0.0).unwrap()], f64::INFINITY);
        assert!(u[g.nearest(0.4, 1.0).unwrap()].is_finite());
    }

    #[test]
    fn single_call_is_travel_time() {
        let g = Grid2D::square(21, 0.0, 1.0).unwrap();
        let f = vec![1.0; g.len()];
        let calls = CallSpec::new(vec![Call {
            at: (0.3, 0.6),
            p: 1.0,
        }])
        .unwrap();
        let q = response_cost(&g, &f, &calls).unwrap();
        assert_eq!(q, eikonal_solve(&g, &f, g.nearest(0.3, 0.6).unwrap()));
    }

    #[test]
    fn symmetric_calls_give_symmetric_q() {
        let g = Grid2D::square(31, 0.0, 3.0).unwrap();
        let f = g.sample(|x, y| {
            if (x - 1.5).hypot(y - 1.5) < 0.55 {
                0.3
            } else {
                1.0
            }
        });
        let calls = CallSpec::new(vec![
            Call {
                at: (0.5, 1.0),
                p: 0.5,
            },
            Call {
                at: (2.5, 1.0),
                p: 0.5,
            },
        ])
        .unwrap();
        let q = response_cost(&g, &f, &calls).unwrap();
        for k in 0..g.len() {
            let (i, j) = g.ij(k);
            let mirror = g.index(g.nx - 1 - i, j);
            assert!((q[k] - q[mirror]).abs() < 1e-12);
        }
    }

    #[test]
    fn bad_specs() {
        assert_eq!(CallSpec::new(vec![]), Err(CallError::Empty));
        assert!(matches!(
            CallSpec::new(vec![Call {
                at: (0.0, 0.0),
                p: 0.7
            }]),
            Err(CallError::ProbabilitySum(_))
        ));
        let g = Grid2D::square(5, 0.0, 1.0).unwrap();
        let calls = CallSpec::new(vec![Call {
            at: (2.0, 0.0),
            p: 1.0,
        }])
        .unwrap();
        assert!(response_cost(&g, &[1.0; 25], &calls).is_err());
    }
}
