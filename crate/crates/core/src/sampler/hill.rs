use crate::{Error, Result};

/// Result of the Hill estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HillEstimate {
    /// `1 / gamma`.
    pub alpha: f64,
    /// Mean log-spacing above the `(k+1)`-th largest value.
    pub gamma: f64,
    pub k: usize,
    /// Set when `k < 30`.
    pub unreliable: bool,
}

/// Hill estimator over the `k` largest order statistics of positive data.
pub fn hill_tail_index(samples: &[f64], k: usize) -> Result<HillEstimate> {
    if k == 0 || k >= samples.len() {
        return Err(Error::config(format!("need 0 < k < {}, got {k}", samples.len())));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::config("samples must be finite"));
    }
    let mut sorted = samples.to_vec();
    // only the top k+1 are needed
    let pivot = sorted.len() - k - 1;
    sorted.select_nth_unstable_by(pivot, |a, b| a.total_cmp(b));
    let threshold = sorted[pivot];
    if threshold <= 0.0 {
        return Err(Error::config("order statistic used as threshold is not positive"));
    }
    let gamma = sorted[pivot + 1..].iter().map(|x| (x / threshold).ln()).sum::<f64>() / k as f64;
    if gamma <= 0.0 {
        return Err(Error::Estimation("zero log-spacings".into()));
    }
    Ok(HillEstimate { alpha: 1.0 / gamma, gamma, k, unreliable: k < 30 })
}
