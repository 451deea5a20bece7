//! Survival over the late window `k ∈ {⌈εn⌉, …, n}` in one dimension.

use super::{make_schedule, splitting_estimate, LevelSchedule, ScheduleKind, SplittingOptions, SplittingResult};
use crate::geometry::{ConvexBody, Shape};
use crate::sampler::RVModel;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WindowedResult {
    pub result: SplittingResult,
    /// `⌈−log ε / log(b/a)⌉ (α − 1)`.
    pub reference_exponent: f64,
    /// `−log P̂ / log n`.
    pub observed_exponent: f64,
}

fn interval_of(body: &ConvexBody) -> Result<(f64, f64)> {
    match body.shape() {
        Shape::Box { lo, hi } if lo.len() == 1 && lo[0] > 0.0 => Ok((lo[0], hi[0])),
        _ => Err(Error::config("windowed persistence needs a positive interval [a, b]")),
    }
}

/// `⌈−log ε / log(b/a)⌉ (α − 1)`; errors when the ratio is within 0.05 of an integer.
pub fn reference_window_exponent(a: f64, b: f64, epsilon: f64, alpha: f64) -> Result<f64> {
    let q = -epsilon.ln() / (b / a).ln();
    if (q - q.round()).abs() < 0.05 {
        return Err(Error::domain(format!("-log(eps)/log(b/a) = {q} is within 0.05 of an integer")));
    }
    Ok(q.ceil() * (alpha - 1.0))
}

/// Splitting estimate of the windowed survival probability.
///
/// The walk runs unconstrained up to `⌈εn⌉`; from there it must stay in `[a, b]`.
/// Stage ends grow geometrically with ratio `sqrt(b/a)`.
pub fn windowed_estimate(
    model: &RVModel,
    body: &ConvexBody,
    epsilon: f64,
    n: u64,
    effort: usize,
    macros: usize,
    seed: u64,
) -> Result<SplittingResult> {
    let (a, b) = interval_of(body)?;
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::config("epsilon must lie in (0, 1]"));
    }
    let start = ((epsilon * n as f64).ceil() as u64).clamp(1, n);
    let schedule = if start == n {
        LevelSchedule::single(n)
    } else {
        let mut s = make_schedule(ScheduleKind::Geometric, (b / a).sqrt(), start, n)?;
        s.horizon = n;
        s
    };
    let options = SplittingOptions { effort, macros, checkpoints: Vec::new(), constraint_start: start };
    splitting_estimate(model, body, &schedule, &options, seed)
}

/// Windowed estimate together with its reference exponent.
#[allow(clippy::too_many_arguments)]
pub fn windowed_persistence(
    model: &RVModel,
    body: &ConvexBody,
    epsilon: f64,
    n: u64,
    effort: usize,
    macros: usize,
    seed: u64,
) -> Result<WindowedResult> {
    let (a, b) = interval_of(body)?;
    let reference_exponent = reference_window_exponent(a, b, epsilon, model.alpha)?;
    let result = windowed_estimate(model, body, epsilon, n, effort, macros, seed)?;
    let observed_exponent = -result.log_estimate / (n as f64).ln();
    Ok(WindowedResult { result, reference_exponent, observed_exponent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{cdf_1d, TailBalance};

    #[test]
    fn reference_arithmetic() {
        assert_eq!(reference_window_exponent(1.0, 2.0, 0.1, 1.5).unwrap(), 2.0);
        assert_eq!(reference_window_exponent(1.0, 2.0, 0.1, 3.0).unwrap(), 8.0);
        assert!(reference_window_exponent(1.0, 2.0, 0.25, 1.5).is_err());
        assert!(reference_window_exponent(1.0, 2.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn full_window_is_single_constraint() {
        // ε = 1 leaves only the constraint at k = n
        let m = RVModel::one_dimensional(1.5, 1.0, 0.1, TailBalance::symmetric(1.5)).unwrap();
        let body = ConvexBody::interval(1.0, 2.0).unwrap();
        let r = windowed_estimate(&m, &body, 1.0, 1, 5_000, 4, 3).unwrap();
        let p = cdf_1d(&m, 2.0) - cdf_1d(&m, 1.0);
        let se = (p * (1.0 - p) / 20_000.0).sqrt();
        assert!((r.estimate - p).abs() < 3.0 * se);
        assert_eq!(r.stage_ends, vec![1]);
    }

    #[test]
    fn constraint_starts_late() {
        let m = RVModel::one_dimensional(1.5, 1.0, 0.1, TailBalance::symmetric(1.5)).unwrap();
        let body = ConvexBody::interval(1.0, 2.0).unwrap();
        let r = windowed_estimate(&m, &body, 0.5, 40, 500, 2, 3).unwrap();
        assert_eq!(r.stage_ends[0], 20);
        assert!(r.estimate > 0.0 && r.estimate < 1.0);
    }
}
