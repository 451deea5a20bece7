//! The ratio `r*` and the persistence exponents built from it.

use super::{lp, ConvexBody, Shape};
use crate::linalg::{norm, normalized};
use crate::{Error, Result};

/// Default tolerance on `r`.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Relaxation levels used for the `(δ, r_δ)` curve.
pub const DEFAULT_DELTAS: [f64; 6] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

/// Solution of `max r` subject to `H(y) ≤ δ`, `H(r·y) ≤ δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RStar {
    pub delta: f64,
    pub r: f64,
    /// Feasible `y` at the returned `r`.
    pub witness: Vec<f64>,
    /// `y / ‖y‖`.
    pub phi_star: Vec<f64>,
}

/// Summary of the geometric exponent computation.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentReport {
    pub r_star: f64,
    pub phi_star: Vec<f64>,
    pub exponent: f64,
    pub delta_curve: Vec<(f64, f64)>,
}

/// `v(r) = min_y max(H(y), H(r·y))` with a minimiser.
pub(crate) fn joint_residual(body: &ConvexBody, r: f64) -> Result<(f64, Vec<f64>)> {
    match body.shape() {
        Shape::Ball { center, radius } => {
            let c = norm(center);
            let y = center.iter().map(|v| 2.0 * v / (1.0 + r)).collect();
            Ok((c * (r - 1.0) / (r + 1.0) - radius, y))
        }
        _ => {
            let (a, b) = body.halfspaces().expect("polyhedral shape");
            lp::joint_residual(&a, &b, r)
        }
    }
}

/// Largest `r` with `{H ≤ δ} ∩ r^{-1}{H ≤ δ} ≠ ∅`, by bisection on `r` to width `tol`.
///
/// Each feasibility subproblem is solved exactly: a linear program for polyhedral
/// bodies and a closed form for balls.
pub fn r_star(body: &ConvexBody, delta: f64, tol: f64) -> Result<RStar> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::config("relaxation must be finite and non-negative"));
    }
    if !(tol > 0.0) {
        return Err(Error::config("tolerance must be positive"));
    }
    let d = body.dimension();
    if body.h_value(&vec![0.0; d]) <= delta {
        return Err(Error::domain("relaxed body contains the origin"));
    }
    let feasible = |r: f64| -> Result<Option<Vec<f64>>> {
        let (v, y) = joint_residual(body, r)?;
        Ok((v <= delta + 1e-12).then_some(y))
    };
    let Some(mut witness) = feasible(1.0)? else {
        return Err(Error::domain("relaxed body is empty"));
    };
    let mut lo = 1.0;
    let mut hi = 2.0;
    loop {
        match feasible(hi)? {
            Some(y) => {
                lo = hi;
                witness = y;
                hi *= 2.0;
                if hi > 1e300 {
                    return Err(Error::domain("ratio is unbounded"));
                }
            }
            None => break,
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        match feasible(mid)? {
            Some(y) => {
                lo = mid;
                witness = y;
            }
            None => hi = mid,
        }
    }
    let phi_star = normalized(&witness).ok_or_else(|| Error::domain("witness is the origin"))?;
    Ok(RStar { delta, r: lo, witness, phi_star })
}

/// `(α − 1) / (2 log r*)`.
pub fn persistence_exponent(r_star: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 1.0) {
        return Err(Error::config("tail index must exceed 1"));
    }
    if !(r_star > 1.0) {
        return Err(Error::Degenerate(format!("ratio {r_star} <= 1 gives an infinite exponent")));
    }
    Ok((alpha - 1.0) / (2.0 * r_star.ln()))
}

/// `½ Σ (α_i − 1) / log(b_i / a_i)` for a product of intervals `[a_i, b_i]`.
pub fn nonstandard_exponent(intervals: &[(f64, f64, f64)]) -> Result<f64> {
    if intervals.is_empty() {
        return Err(Error::config("need at least one interval"));
    }
    let mut total = 0.0;
    for &(a, b, alpha) in intervals {
        if !(a > 0.0 && b > a && b.is_finite()) {
            return Err(Error::config(format!("interval [{a}, {b}] must satisfy 0 < a < b")));
        }
        if !(alpha > 1.0) {
            return Err(Error::config("tail index must exceed 1"));
        }
        total += (alpha - 1.0) / (b / a).ln();
    }
    Ok(0.5 * total)
}

/// `r*`, `φ*`, exponent and the relaxation curve over `deltas`.
pub fn exponent_report(body: &ConvexBody, alpha: f64, deltas: &[f64], tol: f64) -> Result<ExponentReport> {
    let base = r_star(body, 0.0, tol)?;
    let exponent = persistence_exponent(base.r, alpha)?;
    let mut delta_curve = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        delta_curve.push((delta, r_star(body, delta, tol)?.r));
    }
    Ok(ExponentReport { r_star: base.r, phi_star: base.phi_star, exponent, delta_curve })
}
