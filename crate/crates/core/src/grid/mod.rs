//! Isotropic randomly-terminated control on a uniform 2-D grid.
//!
//! The value function solves the obstacle problem
//! `v = min(q, q + (K - f|∇v|)/λ)` discretized with first-order upwind
//! differences.  Points are indexed row-major, `k = j * nx + i`, with `x`
//! increasing along `i` and `y` along `j`.  Points with `q = +∞` lie outside
//! the domain.

mod fmm;
pub mod io;
mod update;

use thiserror::Error;

pub use fmm::{fmm_solve, sweep_oracle, SweepOptions};
pub use update::{
    node_update, one_sided_update, quadrant_update, residual, semi_lagrangian_update, NodeParams,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid needs at least 2x2 points, got {0}x{1}")]
    TooSmall(usize, usize),
    #[error("grid spacing must be positive and finite, got {0}")]
    BadSpacing(f64),
    #[error("x spacing {0} differs from y spacing {1}; cells must be square")]
    UnequalSpacing(f64, f64),
    #[error("field `{name}` has {got} values, expected {expected}")]
    FieldSize {
        name: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("field `{name}` has invalid value {value} at ({i}, {j})")]
    FieldValue {
        name: &'static str,
        value: f64,
        i: usize,
        j: usize,
    },
    #[error("sweeps did not converge after {sweeps} sweeps (last change {change:e})")]
    NotConverged {
        sweeps: usize,
        change: f64,
        last: Vec<f64>,
    },
    #[error("point ({0}, {1}) lies outside the grid")]
    OutsideGrid(f64, f64),
    #[error("point ({0}, {1}) is not in the domain")]
    Masked(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub x0: f64,
    pub y0: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, h: f64, origin: (f64, f64)) -> Result<Self, GridError> {
        if nx < 2 || ny < 2 {
            return Err(GridError::TooSmall(nx, ny));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(GridError::BadSpacing(h));
        }
        Ok(Self {
            nx,
            ny,
            h,
            x0: origin.0,
            y0: origin.1,
        })
    }

    /// `n x n` points spanning `[lo, hi]²`.
    pub fn square(n: usize, lo: f64, hi: f64) -> Result<Self, GridError> {
        Self::new(n, n, (hi - lo) / (n.max(2) - 1) as f64, (lo, lo))
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    pub fn point(&self, k: usize) -> (f64, f64) {
        let (i, j) = self.ij(k);
        (self.x0 + i as f64 * self.h, self.y0 + j as f64 * self.h)
    }

    pub fn x_max(&self) -> f64 {
        self.x0 + (self.nx - 1) as f64 * self.h
    }

    pub fn y_max(&self) -> f64 {
        self.y0 + (self.ny - 1) as f64 * self.h
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let eps = 1e-9 * self.h;
        x >= self.x0 - eps
            && x <= self.x_max() + eps
            && y >= self.y0 - eps
            && y <= self.y_max() + eps
    }

    /// Nearest gridpoint to `(x, y)`.
    pub fn nearest(&self, x: f64, y: f64) -> Result<usize, GridError> {
        if !self.contains(x, y) {
            return Err(GridError::OutsideGrid(x, y));
        }
        let i = (((x - self.x0) / self.h).round().max(0.0) as usize).min(self.nx - 1);
        let j = (((y - self.y0) / self.h).round().max(0.0) as usize).min(self.ny - 1);
        Ok(self.index(i, j))
    }

    /// East, north, west, south neighbors (`None` past the grid edge).
    pub fn neighbors(&self, k: usize) -> [Option<usize>; 4] {
        let (i, j) = self.ij(k);
        [
            (i + 1 < self.nx).then(|| k + 1),
            (j + 1 < self.ny).then(|| k + self.nx),
            (i > 0).then(|| k - 1),
            (j > 0).then(|| k - self.nx),
        ]
    }

    /// Evaluates `f(x, y)` at every gridpoint.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        (0..self.len())
            .map(|k| {
                let (x, y) = self.point(k);
                f(x, y)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridProblem {
    grid: Grid2D,
    f: Vec<f64>,
    k: Vec<f64>,
    q: Vec<f64>,
    lambda: Vec<f64>,
}

impl GridProblem {
    pub fn new(
        grid: Grid2D,
        f: Vec<f64>,
        k: Vec<f64>,
        q: Vec<f64>,
        lambda: Vec<f64>,
    ) -> Result<Self, GridError> {
        let n = grid.len();
        for (name, v) in [("f", &f), ("K", &k), ("q", &q), ("lambda", &lambda)] {
            if v.len() != n {
                return Err(GridError::FieldSize {
                    name,
                    got: v.len(),
                    expected: n,
                });
            }
        }
        for idx in 0..n {
            if q[idx] == f64::INFINITY {
                continue;
            }
            let checks: [(&'static str, f64, bool); 4] = [
                ("q", q[idx], q[idx].is_finite()),
                ("f", f[idx], f[idx] > 0.0 && f[idx].is_finite()),
                ("K", k[idx], k[idx] >= 0.0 && k[idx].is_finite()),
                (
                    "lambda",
                    lambda[idx],
                    lambda[idx] > 0.0 && lambda[idx].is_finite(),
                ),
            ];
            for (name, value, ok) in checks {
                if !ok {
                    let (i, j) = grid.ij(idx);
                    return Err(GridError::FieldValue { name, value, i, j });
                }
            }
        }
        Ok(Self {
            grid,
            f,
            k,
            q,
            lambda,
        })
    }

    /// Constant `f`, `K` and `λ` with the given terminal cost.
    pub fn uniform(
        grid: Grid2D,
        f: f64,
        k: f64,
        lambda: f64,
        q: Vec<f64>,
    ) -> Result<Self, GridError> {
        let n = grid.len();
        Self::new(grid, vec![f; n], vec![k; n], q, vec![lambda; n])
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }
    pub fn f(&self) -> &[f64] {
        &self.f
    }
    pub fn k(&self) -> &[f64] {
        &self.k
    }
    pub fn q(&self) -> &[f64] {
        &self.q
    }
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self {
            lambda: vec![lambda; self.grid.len()],
            ..self.clone()
        }
    }

    pub fn is_masked(&self, k: usize) -> bool {
        self.q[k] == f64::INFINITY
    }

    pub fn params(&self, k: usize) -> NodeParams {
        NodeParams {
            k: self.k[k],
            q: self.q[k],
            f: self.f[k],
            lambda: self.lambda[k],
            h: self.grid.h,
        }
    }

    /// In-domain points whose `q` is `<=` that of every in-domain neighbor.
    pub fn local_minima(&self) -> Vec<usize> {
        (0..self.grid.len())
            .filter(|&k| {
                !self.is_masked(k)
                    && self
                        .grid
                        .neighbors(k)
                        .iter()
                        .flatten()
                        .all(|&n| self.is_masked(n) || self.q[k] <= self.q[n])
            })
            .collect()
    }

    /// Largest finite `|q|`, used to scale tolerances.
    pub fn q_scale(&self) -> f64 {
        self.q
            .iter()
            .filter(|v| v.is_finite())
            .fold(1.0f64, |m, v| m.max(v.abs()))
    }

    /// Default threshold on `q - V` for motionless points: `1e-9` relative
    /// to the size of `q`.
    pub fn default_motionless_eps(&self) -> f64 {
        1e-9 * self.q_scale()
    }
}

/// Counters reported by the grid solvers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GridStats {
    pub heap_operations: usize,
    pub updates: usize,
    pub sweeps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSolution {
    pub values: Vec<f64>,
    /// Position of each point in the acceptance order, `None` if never
    /// accepted (masked points, or every point for the sweep oracle).
    pub accepted_at: Vec<Option<usize>>,
    pub order: Vec<usize>,
    pub stats: GridStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionlessSet {
    pub mask: Vec<bool>,
    /// Motionless points with at least one in-domain, non-motionless
    /// neighbor.
    pub boundary: Vec<usize>,
}

impl MotionlessSet {
    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

/// Points with `q - V <= eps` and the discrete free boundary around them.
pub fn motionless_set(solution: &GridSolution, problem: &GridProblem, eps: f64) -> MotionlessSet {
    let g = problem.grid();
    let mask: Vec<bool> = (0..g.len())
        .map(|k| !problem.is_masked(k) && problem.q()[k] - solution.values[k] <= eps)
        .collect();
    let boundary = (0..g.len())
        .filter(|&k| {
            mask[k]
                && g.neighbors(k)
                    .iter()
                    .flatten()
                    .any(|&n| !mask[n] && !problem.is_masked(n))
        })
        .collect();
    MotionlessSet { mask, boundary }
}
