//! Quadratic-in-`log n` regression of `log P̂_n`.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// OLS fit `log P̂_n ≈ slope·(log n)² + linear·log n + intercept`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFit {
    pub points: Vec<(f64, f64)>,
    /// Coefficient of `(log n)²`, an estimate of `−φ`.
    pub slope: f64,
    pub slope_se: f64,
    pub linear: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn exponent_fit(points: &[(f64, f64)]) -> Result<ExponentFit> {
    if points.len() < 4 {
        return Err(Error::Estimation("need at least four points".into()));
    }
    if points.iter().any(|(n, y)| !(n.is_finite() && *n > 0.0 && y.is_finite())) {
        return Err(Error::Estimation("points need positive n and finite log-probabilities".into()));
    }
    let m = points.len();
    let x = DMatrix::from_fn(m, 3, |i, j| {
        let l = points[i].0.ln();
        match j {
            0 => l * l,
            1 => l,
            _ => 1.0,
        }
    });
    let y = DVector::from_iterator(m, points.iter().map(|p| p.1));
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-10 * smax {
        return Err(Error::Estimation("design matrix is rank deficient".into()));
    }
    let beta = svd.solve(&y, 1e-14 * smax).map_err(|e| Error::Estimation(e.to_string()))?;
    let resid = &y - &x * &beta;
    let rss = resid.norm_squared();
    let mean = y.mean();
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let r2 = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };
    let dof = (m - 3) as f64;
    let slope_se = if dof > 0.0 {
        let xtx_inv = (x.transpose() * &x)
            .try_inverse()
            .ok_or_else(|| Error::Estimation("normal matrix is singular".into()))?;
        (rss / dof * xtx_inv[(0, 0)]).max(0.0).sqrt()
    } else {
        f64::NAN
    };
    Ok(ExponentFit { points: points.to_vec(), slope: beta[0], slope_se, linear: beta[1], intercept: beta[2], r2 })
}
