//! Solvers for deterministic control processes that terminate at a random
//! (Poisson) time.
//!
//! The discrete half of the crate works on finite directed graphs where every
//! transition may be the last one with probability `p_ij`.  The value function
//! is computed by value iteration (the general oracle) or by label-setting
//! methods in the style of Dijkstra and Dial, which are exact whenever every
//! node can stay put for free and every other transition costs at least
//! `Δ >= 0`.
//!
//! The continuous half discretizes the isotropic obstacle problem
//!
//! ```text
//! v(x) = q(x) + (1/λ) [K(x) - f(x) |∇v(x)|]⁻
//! ```
//!
//! with a first-order upwind scheme on a uniform 2-D grid and solves it with a
//! modified Fast Marching Method.  Supporting modules build terminal costs from
//! travel-time fields, provide closed-form radial solutions, and trace optimal
//! trajectories on the solved field.

// `!(x > 0.0)` is how NaN gets rejected throughout
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod analytic;
pub mod eikonal;
pub mod graph;
pub mod grid;
mod heap;
pub mod idle;
pub mod trajectory;

pub use graph::{GraphError, GraphProblem, GraphSolution};
pub use grid::{Grid2D, GridError, GridProblem, GridSolution};
