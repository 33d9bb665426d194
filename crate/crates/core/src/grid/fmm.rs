use super::update::{node_update, one_sided_update, quadrant_update};
use super::{GridError, GridProblem, GridSolution, GridStats};
use crate::heap::MinHeap;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Far,
    Considered,
    Accepted,
}

/// Modified Fast Marching: labels start at `q`, the local minima of `q` are
/// the initial front, and each accepted point updates its non-accepted
/// neighbors through the single relevant quadrant.
pub fn fmm_solve(problem: &GridProblem) -> GridSolution {
    let g = *problem.grid();
    let n = g.len();
    let mut v = problem.q().to_vec();
    let mut status = vec![Status::Far; n];
    let mut accepted_at = vec![None; n];
    let mut order = Vec::with_capacity(n);
    let mut heap = MinHeap::with_capacity(n);
    let mut updates = 0;

    for k in problem.local_minima() {
        status[k] = Status::Considered;
        heap.push(v[k], k);
    }

    while let Some((val, k)) = heap.pop() {
        if status[k] == Status::Accepted || val > v[k] {
            continue;
        }
        status[k] = Status::Accepted;
        accepted_at[k] = Some(order.len());
        order.push(k);

        let nb_k = g.neighbors(k);
        for (dir, nb) in nb_k.iter().enumerate() {
            let Some(m) = *nb else { continue };
            if status[m] == Status::Accepted || problem.is_masked(m) {
                continue;
            }
            // the accepted point sits on one axis of m; pair it with the
            // smaller accepted neighbor of m on the other axis
            let nb_m = g.neighbors(m);
            let perp = [(dir + 1) % 4, (dir + 3) % 4]
                .iter()
                .filter_map(|&d| nb_m[d])
                .filter(|&x| status[x] == Status::Accepted)
                .map(|x| v[x])
                .fold(f64::INFINITY, f64::min);
            let p = problem.params(m);
            let cand = if perp.is_finite() {
                quadrant_update(v[k], perp, &p)
            } else {
                one_sided_update(v[k], &p)
            };
            updates += 1;
            if cand < v[m] {
                v[m] = cand;
                status[m] = Status::Considered;
                heap.push(cand, m);
            } else if status[m] == Status::Far {
                status[m] = Status::Considered;
                heap.push(v[m], m);
            }
        }
    }

    GridSolution {
        values: v,
        accepted_at,
        order,
        stats: GridStats {
            heap_operations: heap.operations(),
            updates,
            sweeps: 0,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// Stop once a sweep changes no value by more than this.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            tol: 1e-13,
            max_sweeps: 10_000,
        }
    }
}

/// Gauss-Seidel iteration of [`node_update`] in the four alternating
/// directions, starting from `q`.  Test oracle for [`fmm_solve`].
pub fn sweep_oracle(problem: &GridProblem, opts: &SweepOptions) -> Result<GridSolution, GridError> {
    let g = *problem.grid();
    let mut v = problem.q().to_vec();
    let mut updates = 0;
    let mut change = f64::INFINITY;
    for sweep in 0..opts.max_sweeps {
        change = 0.0f64;
        let (rev_i, rev_j) = (sweep % 2 == 1, (sweep / 2) % 2 == 1);
        for jj in 0..g.ny {
            let j = if rev_j { g.ny - 1 - jj } else { jj };
            for ii in 0..g.nx {
                let i = if rev_i { g.nx - 1 - ii } else { ii };
                let k = g.index(i, j);
                if problem.is_masked(k) {
                    continue;
                }
                let nb = g.neighbors(k).map(|m| m.map_or(f64::INFINITY, |m| v[m]));
                let new = node_update(nb, &problem.params(k));
                updates += 1;
                if new < v[k] {
                    change = change.max(v[k] - new);
                    v[k] = new;
                }
            }
        }
        // a pass that changes nothing means every point already satisfies
        // the update
        if change <= opts.tol {
            return Ok(GridSolution {
                accepted_at: vec![None; g.len()],
                order: Vec::new(),
                values: v,
                stats: GridStats {
                    heap_operations: 0,
                    updates,
                    sweeps: sweep + 1,
                },
            });
        }
    }
    Err(GridError::NotConverged {
        sweeps: opts.max_sweeps,
        change,
        last: v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{residual, Grid2D};

    fn cone(n: usize, k: f64, lambda: f64) -> GridProblem {
        let g = Grid2D::square(n, -2.0, 2.0).unwrap();
        let q = g.sample(|x, y| x.hypot(y));
        GridProblem::uniform(g, 1.0, k, lambda, q).unwrap()
    }

    #[test]
    fn constant_q_is_fixed() {
        let g = Grid2D::square(11, 0.0, 1.0).unwrap();
        let p = GridProblem::uniform(g, 1.0, 0.3, 2.0, vec![4.0; g.len()]).unwrap();
        let s = fmm_solve(&p);
        assert!(s.values.iter().all(|&v| v == 4.0));
        assert_eq!(s.order.len(), g.len());
        let o = sweep_oracle(&p, &Default::default()).unwrap();
        assert_eq!(o.values, s.values);
        assert_eq!(o.stats.sweeps, 1);
    }

    #[test]
    fn scheme_holds_everywhere() {
        let p = cone(41, 0.0, 0.5);
        let s = fmm_solve(&p);
        let g = p.grid();
        for k in 0..g.len() {
            let nb = g
                .neighbors(k)
                .map(|m| m.map_or(f64::INFINITY, |m| s.values[m]));
            assert!(residual(s.values[k], nb, &p.params(k)) < 1e-9, "point {k}");
            assert!(s.values[k] <= p.q()[k]);
        }
    }

    #[test]
    fn acceptance_is_monotone() {
        let p = cone(41, 1.0, 0.5);
        let s = fmm_solve(&p);
        assert_eq!(s.order.len(), p.grid().len());
        for w in s.order.windows(2) {
            assert!(s.values[w[0]] <= s.values[w[1]]);
        }
    }

    #[test]
    fn matches_sweeps() {
        for (k, lambda) in [(0.0, 0.5), (1.0, 0.5), (1.0, 25.0)] {
            let p = cone(31, k, lambda);
            let a = fmm_solve(&p);
            let b = sweep_oracle(&p, &Default::default()).unwrap();
            let diff = a
                .values
                .iter()
                .zip(&b.values)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            assert!(diff < 1e-12, "K = {k}, λ = {lambda}: {diff}");
        }
    }

    #[test]
    fn masked_points_stay_infinite() {
        let g = Grid2D::square(21, 0.0, 1.0).unwrap();
        let q = g.sample(|x, y| {
            if (0.4..0.6).contains(&x) && y > 0.2 {
                f64::INFINITY
            } else {
                (x - 1.0).hypot(y)
            }
        });
        let p = GridProblem::uniform(g, 1.0, 0.1, 1.0, q).unwrap();
        let s = fmm_solve(&p);
        for k in 0..g.len() {
            assert_eq!(p.is_masked(k), s.values[k] == f64::INFINITY);
            assert_eq!(p.is_masked(k), s.accepted_at[k].is_none());
        }
        let o = sweep_oracle(&p, &Default::default()).unwrap();
        for (a, b) in s.values.iter().zip(&o.values) {
            assert!(a == b || (a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sweep_reports_nonconvergence() {
        let p = cone(31, 0.0, 0.5);
        let e = sweep_oracle(
            &p,
            &SweepOptions {
                tol: 0.0,
                max_sweeps: 2,
            },
        )
        .unwrap_err();
        assert!(matches!(e, GridError::NotConverged { sweeps: 2, .. }));
    }
}
