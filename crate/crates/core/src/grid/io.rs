//! Field CSV files and JSON scenario descriptors.
//!
//! A field CSV holds one grid row per line, `j = 0..ny` from the bottom
//! (`y = ymin`) up, with `nx` comma-separated values per line.
//!
//! A scenario looks like
//!
//! ```json
//! {
//!   "grid": {"nx": 101, "ny": 101, "xmin": -2, "xmax": 2, "ymin": -2, "ymax": 2},
//!   "f": {"constant": 1},
//!   "K": {"radial": {"pieces": [{"a": 0, "b": 1}]}},
//!   "lambda": {"constant": 0.5},
//!   "q": {"radial": {"center": [0, 0], "pieces": [{"a": 0, "b": 1}]}}
//! }
//! ```
//!
//! Field kinds: `constant`, `radial` (`a + b r` on successive rings),
//! `rects` (a default with rectangles painted in order), `csv` (path
//! relative to the scenario file) and, for `q` only, `response` (expected
//! travel time to a set of calls).  An optional `mask` field marks points
//! outside the domain with nonzero values.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Grid2D, GridError, GridProblem};
use crate::eikonal::{response_cost, CallError, CallSpec};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid scenario JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: line {line}: {message}")]
    Csv {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("field `{field}`: {message}")]
    Field {
        field: &'static str,
        message: String,
    },
    #[error("grid: {0}")]
    Grid(#[from] GridError),
    #[error("calls: {0}")]
    Calls(#[from] CallError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid2D, GridError> {
        if self.nx < 2 || self.ny < 2 {
            return Err(GridError::TooSmall(self.nx, self.ny));
        }
        let hx = (self.xmax - self.xmin) / (self.nx - 1) as f64;
        let hy = (self.ymax - self.ymin) / (self.ny - 1) as f64;
        if (hx - hy).abs() > 1e-9 * hx.abs().max(hy.abs()) {
            return Err(GridError::UnequalSpacing(hx, hy));
        }
        Grid2D::new(self.nx, self.ny, hx, (self.xmin, self.ymin))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialPiece {
    /// Outer radius of this ring; omitted for the last one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Constant(f64),
    Radial {
        #[serde(default)]
        center: (f64, f64),
        pieces: Vec<RadialPiece>,
    },
    Rects {
        default: f64,
        rects: Vec<Rect>,
    },
    Csv(PathBuf),
    Response {
        /// Travel speed; the scenario's `f` when omitted.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        speed: Option<Box<FieldSpec>>,
        calls: CallSpec,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub grid: GridSpec,
    pub f: FieldSpec,
    #[serde(rename = "K")]
    pub k: FieldSpec,
    pub lambda: FieldSpec,
    pub q: FieldSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<FieldSpec>,
}

fn in_range(v: f64, (lo, hi): (f64, f64), tol: f64) -> bool {
    v >= lo.min(hi) - tol && v <= lo.max(hi) + tol
}

impl FieldSpec {
    /// Samples the field on `grid`.  `f` is the speed used by `response`.
    pub fn evaluate(
        &self,
        field: &'static str,
        grid: &Grid2D,
        base: &Path,
        f: Option<&[f64]>,
    ) -> Result<Vec<f64>, ScenarioError> {
        let bad = |message: String| ScenarioError::Field { field, message };
        match self {
            FieldSpec::Constant(c) => Ok(vec![*c; grid.len()]),
            FieldSpec::Radial { center, pieces } => {
                if pieces.is_empty() {
                    return Err(bad("radial field needs at least one piece".into()));
                }
                Ok(grid.sample(|x, y| {
                    let r = (x - center.0).hypot(y - center.1);
                    let p = pieces
                        .iter()
                        .find(|p| p.r_max.is_none_or(|m| r < m))
                        .unwrap_or(pieces.last().unwrap());
                    p.a + p.b * r
                }))
            }
            FieldSpec::Rects { default, rects } => {
                let tol = 1e-9 * grid.h;
                Ok(grid.sample(|x, y| {
                    rects
                        .iter()
                        .rev()
                        .find(|r| in_range(x, r.x, tol) && in_range(y, r.y, tol))
                        .map_or(*default, |r| r.value)
                }))
            }
            FieldSpec::Csv(rel) => {
                let path = base.join(rel);
                let text = std::fs::read_to_string(&path).map_err(|source| ScenarioError::Io {
                    path: path.clone(),
                    source,
                })?;
                read_field_csv(&text, grid).map_err(|(line, message)| ScenarioError::Csv {
                    path,
                    line,
                    message,
                })
            }
            FieldSpec::Response { speed, calls } => {
                let speed = match speed {
                    Some(s) => s.evaluate(field, grid, base, None)?,
                    None => f
                        .ok_or_else(|| bad("`response` is only allowed for q".into()))?
                        .to_vec(),
                };
                Ok(response_cost(grid, &speed, calls)?)
            }
        }
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Builds the problem.  CSV paths resolve against `base`; `resolution`
    /// replaces the grid size while keeping the domain.
    pub fn build(
        &self,
        base: &Path,
        resolution: Option<(usize, usize)>,
    ) -> Result<GridProblem, ScenarioError> {
        let mut spec = self.grid.clone();
        if let Some((nx, ny)) = resolution {
            spec.nx = nx;
            spec.ny = ny;
        }
        let grid = spec.build()?;
        let none = |name: &'static str, spec: &FieldSpec| -> Result<Vec<f64>, ScenarioError> {
            if matches!(spec, FieldSpec::Response { .. }) {
                return Err(ScenarioError::Field {
                    field: name,
                    message: "`response` is only allowed for q".into(),
                });
            }
            spec.evaluate(name, &grid, base, None)
        };
        let outside: Vec<bool> = match &self.mask {
            Some(m) => none("mask", m)?.into_iter().map(|v| v != 0.0).collect(),
            None => vec![false; grid.len()],
        };
        let mut f = none("f", &self.f)?;
        let k = none("K", &self.k)?;
        let lambda = none("lambda", &self.lambda)?;
        for (fi, &o) in f.iter_mut().zip(&outside) {
            if o {
                *fi = 0.0;
            }
        }
        let mut q = self.q.evaluate("q", &grid, base, Some(&f))?;
        for (qi, &o) in q.iter_mut().zip(&outside) {
            if o {
                *qi = f64::INFINITY;
            }
        }
        Ok(GridProblem::new(grid, f, k, q, lambda)?)
    }
}

/// Writes `values` one grid row per line.
pub fn write_field_csv(grid: &Grid2D, values: &[f64]) -> String {
    let mut s = String::with_capacity(values.len() * 12);
    for row in values.chunks(grid.nx) {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            write!(s, "{v}").unwrap();
        }
        s.push('\n');
    }
    s
}

/// Writes a boolean field as `0`/`1`.
pub fn write_mask_csv(grid: &Grid2D, mask: &[bool]) -> String {
    let mut s = String::with_capacity(mask.len() * 2);
    for row in mask.chunks(grid.nx) {
        let line: Vec<&str> = row.iter().map(|&m| if m { "1" } else { "0" }).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

/// `x,y` coordinates of the given points, with a header.
pub fn write_points_csv(grid: &Grid2D, points: &[usize]) -> String {
    let mut s = String::from("x,y\n");
    for &k in points {
        let (x, y) = grid.point(k);
        writeln!(s, "{x},{y}").unwrap();
    }
    s
}

/// Parses a field CSV; errors carry the one-based line number.
pub fn read_field_csv(text: &str, grid: &Grid2D) -> Result<Vec<f64>, (usize, String)> {
    let mut out = Vec::with_capacity(grid.len());
    let mut rows = 0;
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let ln = k + 1;
        let row = line
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| (ln, format!("expected a number, found `{}`", t.trim())))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if row.len() != grid.nx {
            return Err((
                ln,
                format!("expected {} values, found {}", grid.nx, row.len()),
            ));
        }
        out.extend(row);
        rows += 1;
    }
    if rows != grid.ny {
        return Err((
            text.lines().count().max(1),
            format!("expected {} rows, found {rows}", grid.ny),
        ));
    }
    Ok(out)
}
