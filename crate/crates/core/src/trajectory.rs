//! Optimal trajectories by gradient descent on a solved value field.
//!
//! Near the free boundary the descent direction degenerates when `K = 0`,
//! so once the path is within a few cells of the discrete boundary it
//! finishes with a straight segment to the nearest boundary point that is
//! not uphill of it.

use thiserror::Error;

use crate::grid::{motionless_set, GridProblem, GridSolution};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    /// Arclength per step, capped at `h / 2`.
    pub step: Option<f64>,
    /// Snap distance in grid cells.
    pub snap_cells: f64,
    /// Motionless threshold on `q - V`; the problem default when `None`.
    pub eps: Option<f64>,
    /// Defaults to `10 (nx + ny)`.
    pub max_steps: Option<usize>,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            step: None,
            snap_cells: 3.0,
            eps: None,
            max_steps: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPath {
    /// `(x, y, V)` with `V` interpolated.
    pub points: Vec<(f64, f64, f64)>,
    /// Whether the path ended with the straight snap segment.
    pub snapped: bool,
}

impl TrajectoryPath {
    pub fn end(&self) -> (f64, f64) {
        let p = self.points.last().expect("paths are nonempty");
        (p.0, p.1)
    }

    pub fn length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1))
            .sum()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,V\n");
        for (x, y, v) in &self.points {
            s.push_str(&format!("{x},{y},{v}\n"));
        }
        s
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceError {
    #[error("start ({0}, {1}) is outside the domain")]
    OutsideDomain(f64, f64),
    #[error("the motionless set is empty")]
    NoMotionlessSet,
    #[error("no motionless point reached after {steps} steps")]
    MaxSteps {
        steps: usize,
        partial: TrajectoryPath,
    },
}

struct Field<'a> {
    problem: &'a GridProblem,
    v: &'a [f64],
}

impl Field<'_> {
    fn ok(&self, k: usize) -> bool {
        self.v[k].is_finite() && !self.problem.is_masked(k)
    }

    /// Central differences, one-sided next to masked points or the edge.
    fn grad_at(&self, k: usize) -> (f64, f64) {
        let g = self.problem.grid();
        let nb = g.neighbors(k);
        let axis = |plus: Option<usize>, minus: Option<usize>| {
            let p = plus.filter(|&m| self.ok(m));
            let m = minus.filter(|&m| self.ok(m));
            match (p, m) {
                (Some(p), Some(m)) => (self.v[p] - self.v[m]) / (2.0 * g.h),
                (Some(p), None) => (self.v[p] - self.v[k]) / g.h,
                (None, Some(m)) => (self.v[k] - self.v[m]) / g.h,
                (None, None) => 0.0,
            }
        };
        (axis(nb[0], nb[2]), axis(nb[1], nb[3]))
    }

    /// Bilinear interpolation of `value(k)` over the in-domain corners of
    /// the cell containing `(x, y)`.
    fn interp<T, F>(&self, x: f64, y: f64, value: F) -> Option<T>
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
        F: Fn(usize) -> T,
    {
        let g = self.problem.grid();
        let fx = ((x - g.x0) / g.h).clamp(0.0, (g.nx - 1) as f64);
        let fy = ((y - g.y0) / g.h).clamp(0.0, (g.ny - 1) as f64);
        let i = (fx.floor() as usize).min(g.nx - 2);
        let j = (fy.floor() as usize).min(g.ny - 2);
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        let mut acc: Option<T> = None;
        let mut wsum = 0.0;
        for (di, dj, w) in [
            (0, 0, (1.0 - tx) * (1.0 - ty)),
            (1, 0, tx * (1.0 - ty)),
            (0, 1, (1.0 - tx) * ty),
            (1, 1, tx * ty),
        ] {
            let k = g.index(i + di, j + dj);
            if w == 0.0 || !self.ok(k) {
                continue;
            }
            let term = value(k) * w;
            acc = Some(match acc {
                Some(a) => a + term,
                None => term,
            });
            wsum += w;
        }
        acc.map(|a| a * (1.0 / wsum))
    }
}

#[derive(Clone, Copy)]
struct Vec2(f64, f64);

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2(self.0 * s, self.1 * s)
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2(self.0 + o.0, self.1 + o.1)
    }
}

/// Follows `-∇V` from `start` until the path reaches the motionless set.
pub fn trace(
    solution: &GridSolution,
    problem: &GridProblem,
    start: (f64, f64),
    opts: &TraceOptions,
) -> Result<TrajectoryPath, TraceError> {
    let g = *problem.grid();
    let field = Field {
        problem,
        v: &solution.values,
    };
    let k0 = g
        .nearest(start.0, start.1)
        .map_err(|_| TraceError::OutsideDomain(start.0, start.1))?;
    if problem.is_masked(k0) {
        return Err(TraceError::OutsideDomain(start.0, start.1));
    }
    let eps = opts.eps.unwrap_or_else(|| problem.default_motionless_eps());
    let mset = motionless_set(solution, problem, eps);
    let targets: Vec<usize> = if mset.boundary.is_empty() {
        (0..g.len()).filter(|&k| mset.mask[k]).collect()
    } else {
        mset.boundary.clone()
    };
    if targets.is_empty() {
        return Err(TraceError::NoMotionlessSet);
    }
    let step = opts.step.map_or(0.5 * g.h, |s| s.min(0.5 * g.h));
    let max_steps = opts.max_steps.unwrap_or(10 * (g.nx + g.ny));
    let snap = opts.snap_cells * g.h;
    let value_at = |x: f64, y: f64| {
        field
            .interp(x, y, |k| solution.values[k])
            .unwrap_or(f64::NAN)
    };

    let mut path = TrajectoryPath {
        points: vec![(start.0, start.1, value_at(start.0, start.1))],
        snapped: false,
    };
    let (mut x, mut y) = start;
    for _ in 0..max_steps {
        let here = g.nearest(x, y).expect("path stays on the grid");
        let v_here = value_at(x, y);
        // descent never climbs, so uphill motionless points are not targets
        let downhill = |k: usize| !(solution.values[k] > v_here + eps);
        if mset.mask[here] && downhill(here) {
            return Ok(path);
        }
        let nearest_target = targets
            .iter()
            .filter(|&&t| downhill(t))
            .map(|&t| {
                let (tx, ty) = g.point(t);
                (t, (tx - x).hypot(ty - y))
            })
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let Some((b, dist)) = nearest_target else {
            return Err(TraceError::NoMotionlessSet);
        };
        let grad = field.interp(x, y, |k| {
            let (gx, gy) = field.grad_at(k);
            Vec2(gx, gy)
        });
        let norm = grad.map_or(0.0, |d| d.0.hypot(d.1));
        if dist <= snap || !(norm > 1e-12) {
            let (bx, by) = g.point(b);
            path.points.push((bx, by, solution.values[b]));
            path.snapped = true;
            return Ok(path);
        }
        let d = grad.unwrap();
        x = (x - step * d.0 / norm).clamp(g.x0, g.x_max());
        y = (y - step * d.1 / norm).clamp(g.y0, g.y_max());
        path.points.push((x, y, value_at(x, y)));
    }
    Err(TraceError::MaxSteps {
        steps: max_steps,
        partial: path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{free_boundary_radius, RadialCase};
    use crate::grid::fmm_solve;

    #[test]
    fn start_in_motionless_set() {
        let p = RadialCase::circular(0.5).problem(81);
        let s = fmm_solve(&p);
        let t = trace(&s, &p, (1.9, 0.0), &Default::default()).unwrap();
        assert_eq!(t.points.len(), 1);
        assert!(free_boundary_radius(0.5) < 1.9);
    }

    #[test]
    fn trivial_case_runs_straight_to_origin() {
        let p = RadialCase::trivial(0.5).problem(101);
        let h = p.grid().h;
        let s = fmm_solve(&p);
        let t = trace(&s, &p, (1.5, 0.0), &Default::default()).unwrap();
        for &(_, y, _) in &t.points {
            assert!(y.abs() <= 2.0 * h);
        }
        let (ex, ey) = t.end();
        assert!(ex.hypot(ey) <= 1e-12);
        for w in t.points.windows(2) {
            assert!(w[1].2 <= w[0].2 + 2.0 * h);
        }
    }

    #[test]
    fn diagonal_start_stays_near_the_ray() {
        let p = RadialCase::trivial(0.5).problem(101);
        let h = p.grid().h;
        let s = fmm_solve(&p);
        let t = trace(&s, &p, (1.0, 1.2), &Default::default()).unwrap();
        let (ux, uy) = (1.0 / 1.2f64.hypot(1.0), 1.2 / 1.2f64.hypot(1.0));
        for &(x, y, _) in &t.points {
            assert!((x * uy - y * ux).abs() <= 2.0 * h, "({x}, {y})");
        }
    }

    #[test]
    fn costly_patch_beside_the_path_is_not_a_target() {
        let base = RadialCase::trivial(0.5).problem(101);
        let g = *base.grid();
        let k = g.sample(|x, y| {
            if (0.7..=0.9).contains(&x) && (0.08..=0.2).contains(&y) {
                50.0
            } else {
                0.0
            }
        });
        let p = GridProblem::new(
            g,
            base.f().to_vec(),
            k,
            base.q().to_vec(),
            base.lambda().to_vec(),
        )
        .unwrap();
        let s = fmm_solve(&p);
        let m = motionless_set(&s, &p, p.default_motionless_eps());
        assert!(m.mask[g.nearest(0.8, 0.12).unwrap()]);
        let t = trace(&s, &p, (1.5, 0.0), &Default::default()).unwrap();
        let (ex, ey) = t.end();
        assert!(ex.hypot(ey) <= 1e-12, "ended at ({ex}, {ey})");
    }

    #[test]
    fn outside_start_is_rejected() {
        let p = RadialCase::trivial(0.5).problem(21);
        let s = fmm_solve(&p);
        assert_eq!(
            trace(&s, &p, (3.0, 0.0), &Default::default()),
            Err(TraceError::OutsideDomain(3.0, 0.0))
        );
    }

    #[test]
    fn step_limit_returns_partial_path() {
        let p = RadialCase::trivial(0.5).problem(101);
        let s = fmm_solve(&p);
        let opts = TraceOptions {
            max_steps: Some(3),
            ..Default::default()
        };
        match trace(&s, &p, (1.5, 0.0), &opts) {
            Err(TraceError::MaxSteps { steps: 3, partial }) => assert_eq!(partial.points.len(), 4),
            other => panic!("{other:?}"),
        }
    }
}
