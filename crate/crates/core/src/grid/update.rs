//! Single-point updates of the upwind scheme.
//!
//! Neighbors are numbered east, north, west, south; the four quadrants pair
//! `(E, N)`, `(N, W)`, `(W, S)` and `(S, E)`.

/// Local data at the point being updated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeParams {
    pub k: f64,
    pub q: f64,
    pub f: f64,
    pub lambda: f64,
    pub h: f64,
}

/// Solution of the update using a single upwind neighbor:
/// `V = (hK + λhq + f V1) / (λh + f)`.
pub fn one_sided_update(v1: f64, p: &NodeParams) -> f64 {
    if v1 == f64::INFINITY {
        return f64::INFINITY;
    }
    (p.h * p.k + p.lambda * p.h * p.q + p.f * v1) / (p.lambda * p.h + p.f)
}

/// Roots of `a t² + b t + c = 0` without cancellation.  With `a = 0` the
/// single root is returned twice.
fn quadratic_roots(a: f64, b: f64, c: f64) -> Option<(f64, f64)> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let t = -0.5 * (b + b.signum() * disc.sqrt());
    if t == 0.0 {
        // b = 0 and c = 0 (or a = b = 0)
        return if a != 0.0 { Some((0.0, 0.0)) } else { None };
    }
    let r2 = c / t;
    let r1 = if a != 0.0 { t / a } else { r2 };
    Some((r1.min(r2), r1.max(r2)))
}

/// Solves `f²[((V-V1)/h)² + ((V-V2)/h)²] = (K + λq - λV)²` for the smallest
/// `V >= max(V1, V2)` with `K + λ(q - V) >= 0`, falling back to the
/// one-sided update from `min(V1, V2)`.
pub fn quadrant_update(v1: f64, v2: f64, p: &NodeParams) -> f64 {
    let (a, b) = if v1 <= v2 { (v1, v2) } else { (v2, v1) };
    if a == f64::INFINITY {
        return f64::INFINITY;
    }
    let one_sided = one_sided_update(a, p);
    if b == f64::INFINITY {
        return one_sided;
    }
    let d = b - a;
    let rhs = p.k + p.lambda * (p.q - a);
    if rhs <= 0.0 {
        return one_sided;
    }
    let c = (p.f / p.h).powi(2);
    let lam = p.lambda;
    let Some((r1, r2)) = quadratic_roots(
        2.0 * c - lam * lam,
        2.0 * (rhs * lam - c * d),
        c * d * d - rhs * rhs,
    ) else {
        return one_sided;
    };
    let tol = 1e-12 * (1.0 + d.abs() + a.abs());
    let upper = rhs / lam;
    for u in [r1, r2] {
        if u >= d - tol && u <= upper + tol {
            return a + u.max(d);
        }
    }
    one_sided
}

/// `V = min(q, V^{EN}, V^{NW}, V^{WS}, V^{SE})`; missing neighbors are `+∞`.
pub fn node_update(nb: [f64; 4], p: &NodeParams) -> f64 {
    let mut v = p.q;
    for (x, y) in [(0, 1), (1, 2), (2, 3), (3, 0)] {
        v = v.min(quadrant_update(nb[x], nb[y], p));
    }
    v
}

/// Residual of the discretized obstacle problem at value `v`, scaled by the
/// size of `K + λq`.  Upwind differences use the smaller neighbor along
/// each axis (Rouy-Tourin form); zero means `v` solves the scheme.
pub fn residual(v: f64, nb: [f64; 4], p: &NodeParams) -> f64 {
    let dx = ((v - nb[0].min(nb[2])) / p.h).max(0.0);
    let dy = ((v - nb[1].min(nb[3])) / p.h).max(0.0);
    let grad = dx.hypot(dy);
    let g = |w: f64| {
        let gw = ((w - nb[0].min(nb[2])) / p.h)
            .max(0.0)
            .hypot(((w - nb[1].min(nb[3])) / p.h).max(0.0));
        p.f * gw - p.k - p.lambda * (p.q - w)
    };
    let scale = 1.0 + p.k.abs() + (p.lambda * p.q).abs() + p.lambda * v.abs();
    let r = if v > p.q {
        v - p.q
    } else if v < p.q {
        (p.f * grad - p.k - p.lambda * (p.q - v)).abs()
    } else {
        g(p.q).max(0.0)
    };
    r / scale
}

/// Semi-Lagrangian form of a quadrant update: minimizes
/// `C(ξ) = ((K + λq) τ + ξ V1 + (1 - ξ) V2) / (1 + λ τ)` with
/// `τ = (h / f) sqrt(ξ² + (1 - ξ)²)` over `ξ ∈ [0, 1]`.
/// Returns the minimum and the minimizing `ξ`.
pub fn semi_lagrangian_update(v1: f64, v2: f64, p: &NodeParams) -> (f64, f64) {
    match (v1.is_finite(), v2.is_finite()) {
        (false, false) => return (f64::INFINITY, 0.5),
        (true, false) => return (one_sided_update(v1, p), 1.0),
        (false, true) => return (one_sided_update(v2, p), 0.0),
        _ => {}
    }
    let cost = |xi: f64| {
        let tau = p.h / p.f * xi.hypot(1.0 - xi);
        ((p.k + p.lambda * p.q) * tau + xi * v1 + (1.0 - xi) * v2) / (1.0 + p.lambda * tau)
    };
    const SCAN: usize = 64;
    let mut best = 0;
    let mut best_c = cost(0.0);
    for s in 1..=SCAN {
        let c = cost(s as f64 / SCAN as f64);
        if c < best_c {
            best_c = c;
            best = s;
        }
    }
    let mut lo = (best.saturating_sub(1)) as f64 / SCAN as f64;
    let mut hi = ((best + 1).min(SCAN)) as f64 / SCAN as f64;
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut c1, mut c2) = (cost(x1), cost(x2));
    while hi - lo > 1e-12 {
        if c1 <= c2 {
            hi = x2;
            x2 = x1;
            c2 = c1;
            x1 = hi - phi * (hi - lo);
            c1 = cost(x1);
        } else {
            lo = x1;
            x1 = x2;
            c1 = c2;
            x2 = lo + phi * (hi - lo);
            c2 = cost(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    let mut out = (cost(mid), mid);
    for xi in [0.0, 1.0] {
        let c = cost(xi);
        if c < out.0 {
            out = (c, xi);
        }
    }
    out
}
