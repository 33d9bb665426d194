//! Radially symmetric problems on `[-2, 2]²` with `f = 1`, `q = |x|` and
//! closed-form value functions, plus the error norms used to compare grid
//! solutions against them.

use crate::grid::{Grid2D, GridProblem};
use crate::idle::transition_cost;

pub const DOMAIN: (f64, f64) = (-2.0, 2.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialKind {
    /// `K = 0`: everything flows to the origin.
    Trivial,
    /// `K = |x|`: points beyond a radius `r(λ)` stay put.
    Circular,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialCase {
    pub kind: RadialKind,
    pub lambda: f64,
}

/// `|x| - (1 - e^{-λ|x|}) / λ`, the expected time a straight run to the
/// origin is cut short by.  Evaluated without cancellation near the origin.
fn shortfall(lambda: f64, r: f64) -> f64 {
    transition_cost(lambda, r)
}

impl RadialCase {
    pub fn trivial(lambda: f64) -> Self {
        Self {
            kind: RadialKind::Trivial,
            lambda,
        }
    }

    pub fn circular(lambda: f64) -> Self {
        Self {
            kind: RadialKind::Circular,
            lambda,
        }
    }

    pub fn exact_radial(&self, r: f64) -> f64 {
        let s = shortfall(self.lambda, r);
        match self.kind {
            RadialKind::Trivial => s,
            RadialKind::Circular => r.min((self.lambda + 1.0) / self.lambda * s),
        }
    }

    pub fn exact_value(&self, x: f64, y: f64) -> f64 {
        self.exact_radial(x.hypot(y))
    }

    pub fn exact_field(&self, grid: &Grid2D) -> Vec<f64> {
        grid.sample(|x, y| self.exact_value(x, y))
    }

    /// Grid problem on `n x n` points over the fixed domain.
    pub fn problem(&self, n: usize) -> GridProblem {
        let grid = Grid2D::square(n, DOMAIN.0, DOMAIN.1).expect("n >= 2");
        let r = grid.sample(f64::hypot);
        let k = match self.kind {
            RadialKind::Trivial => vec![0.0; grid.len()],
            RadialKind::Circular => r.clone(),
        };
        GridProblem::new(
            grid,
            vec![1.0; grid.len()],
            k,
            r,
            vec![self.lambda; grid.len()],
        )
        .expect("valid radial problem")
    }
}

/// Radius of the circular free boundary: the root of
/// `((λ + 1)/λ)(r - (1 - e^{-λr})/λ) = r` in `[0.5, 2.5]`.
pub fn free_boundary_radius(lambda: f64) -> f64 {
    let g = |r: f64| (lambda + 1.0) / lambda * shortfall(lambda, r) - r;
    let dg = |r: f64| (lambda + 1.0) / lambda * -(-lambda * r).exp_m1() - 1.0;
    let (mut lo, mut hi) = (0.5, 2.5);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut r = 0.5 * (lo + hi);
    for _ in 0..3 {
        let d = dg(r);
        if d == 0.0 {
            break;
        }
        let next = r - g(r) / d;
        if !(next > lo - 1e-9 && next < hi + 1e-9) {
            break;
        }
        r = next;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    /// Max error on the grid row through `y = 0` (`NaN` if no row is there).
    pub line_linf: f64,
    /// `sqrt(h² Σ e² / area)`.
    pub l2: f64,
    pub linf: f64,
}

/// Errors of `values` against `exact`, skipping points where either is
/// infinite.
pub fn error_norms(grid: &Grid2D, values: &[f64], exact: &[f64]) -> ErrorNorms {
    let row = ((0.0 - grid.y0) / grid.h).round();
    let line_j =
        (row >= 0.0 && (row as usize) < grid.ny && (grid.y0 + row * grid.h).abs() < 0.5 * grid.h)
            .then_some(row as usize);
    let mut sum = 0.0;
    let mut linf = 0.0f64;
    let mut line = if line_j.is_some() { 0.0f64 } else { f64::NAN };
    for k in 0..grid.len() {
        if !(values[k].is_finite() && exact[k].is_finite()) {
            continue;
        }
        let e = (values[k] - exact[k]).abs();
        sum += e * e;
        linf = linf.max(e);
        if Some(grid.ij(k).1) == line_j {
            line = line.max(e);
        }
    }
    let area = (grid.x_max() - grid.x0) * (grid.y_max() - grid.y0);
    ErrorNorms {
        line_linf: line,
        l2: (grid.h * grid.h * sum / area).sqrt(),
        linf,
    }
}
