//! Maximal fluctuation of the walk and the truncated-moment maximal inequality.

use rayon::prelude::*;

use super::segments::SegmentParams;
use crate::rng::stream_rng;
use crate::sampler::{Mode, RVModel, TailBalance};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FluctuationReport {
    pub window: f64,
    pub horizon: u64,
    pub probability: f64,
    pub se: f64,
    /// `1 − δ − 3·se`.
    pub threshold: f64,
    pub pass: bool,
}

/// Fraction of walks with `|S_k^{(j)}| ≤ window` for every coordinate and `k ≤ horizon`.
/// Replication `r` uses stream `(seed, r, 0)`.
pub fn fluctuation_probability(model: &RVModel, window: f64, horizon: u64, reps: u64, seed: u64) -> (f64, f64) {
    let d = model.dimension;
    let inside: u64 = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r, 0);
            let mut s = vec![0.0; d];
            let mut step = vec![0.0; d];
            for _ in 0..horizon {
                model.sample_into(&mut rng, &mut step);
                for (si, x) in s.iter_mut().zip(&step) {
                    *si += x;
                }
                if s.iter().any(|v| v.abs() > window) {
                    return 0;
                }
            }
            1
        })
        .sum();
    let p = inside as f64 / reps as f64;
    (p, (p * (1.0 - p) / reps as f64).sqrt())
}

/// Event over the stretch between `m` and `⌊g·m⌋` with window `m^{1/α0+δ}`.
pub fn check_fluctuation(model: &RVModel, params: &SegmentParams, m: u64, reps: u64, seed: u64) -> Result<FluctuationReport> {
    if reps == 0 {
        return Err(Error::config("need at least one replication"));
    }
    let window = (m as f64).powf(params.gamma());
    // g·m is an exact product of decimals in typical inputs; keep it from rounding down.
    let horizon = (params.g * m as f64 * (1.0 + 1e-12)).floor() as u64 - m;
    let (probability, se) = fluctuation_probability(model, window, horizon, reps, seed);
    let threshold = 1.0 - params.delta - 3.0 * se;
    Ok(FluctuationReport { window, horizon, probability, se, threshold, pass: probability > threshold })
}

fn tails(model: &RVModel) -> Result<(TailBalance, f64)> {
    if model.mode != Mode::OneDimensional {
        return Err(Error::config("one-dimensional model required"));
    }
    Ok((model.tail_balance.unwrap_or(TailBalance::symmetric(model.alpha)), model.centering_shift[0]))
}

/// `E[Y²·1(|Y| < x)]` by quadrature, with `t = ln w` on the Pareto pieces.
pub fn truncated_second_moment(model: &RVModel, x: f64) -> Result<f64> {
    let (tb, c) = tails(model)?;
    let (beta, xm) = (model.bulk_fraction, model.radial_scale);
    let panels = 4_000;
    let mut total = 0.0;
    // W ranges over (c − x, c + x).
    let (wl, wu) = (c - x, c + x);
    let lo = wl.max(-xm);
    let hi = wu.min(xm);
    if lo < hi {
        total += beta / (2.0 * xm) * simpson(|w| (w - c).powi(2), lo, hi, panels);
    }
    let mut pareto_piece = |weight: f64, alpha: f64, sign: f64, limit: f64| {
        if weight > 0.0 && limit > xm {
            let f = |t: f64| {
                let w = t.exp();
                alpha * xm.powf(alpha) * w.powf(-alpha) * (sign * w - c).powi(2)
            };
            total += weight * simpson(f, xm.ln(), limit.ln(), panels);
        }
    };
    pareto_piece((1.0 - beta) * (1.0 - tb.p_minus), model.alpha, 1.0, wu);
    pareto_piece((1.0 - beta) * tb.p_minus, tb.alpha_minus, -1.0, -wl);
    Ok(total)
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, half_panels: usize) -> f64 {
    crate::sampler::simpson(f, a, b, half_panels)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KolmogorovReport {
    pub m: u64,
    pub x: f64,
    /// Empirical `P(max_{k≤m} S_k ≥ x)`.
    pub lhs: f64,
    pub lhs_se: f64,
    /// `m·x^{-2}·E[Y²·1(|Y| < x)]`.
    pub shape: f64,
    /// `lhs / shape`.
    pub constant: f64,
    pub constant_bound: f64,
    pub pass: bool,
}

pub fn check_kolmogorov(model: &RVModel, m: u64, x: f64, reps: u64, seed: u64, constant_bound: f64) -> Result<KolmogorovReport> {
    tails(model)?;
    if reps == 0 || m == 0 || !(x > 0.0) {
        return Err(Error::config("need positive m, x and replications"));
    }
    let hits: u64 = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r, 0);
            let mut s = [0.0];
            let mut step = [0.0];
            for _ in 0..m {
                model.sample_into(&mut rng, &mut step);
                s[0] += step[0];
                if s[0] >= x {
                    return 1;
                }
            }
            0
        })
        .sum();
    let lhs = hits as f64 / reps as f64;
    let lhs_se = (lhs * (1.0 - lhs) / reps as f64).sqrt();
    let shape = m as f64 / (x * x) * truncated_second_moment(model, x)?;
    let constant = lhs / shape;
    Ok(KolmogorovReport { m, x, lhs, lhs_se, shape, constant, constant_bound, pass: constant <= constant_bound })
}

/// Log-log slope of `x ↦ E[Y²·1(|Y| < x)]·x^{-2·with_scale}` between `x1` and `x2`.
pub fn shape_slope(model: &RVModel, x1: f64, x2: f64, with_scale: bool) -> Result<f64> {
    let p = if with_scale { -2.0 } else { 0.0 };
    let v1 = truncated_second_moment(model, x1)?.ln() + p * x1.ln();
    let v2 = truncated_second_moment(model, x2)?.ln() + p * x2.ln();
    Ok((v2 - v1) / (x2.ln() - x1.ln()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn closed_form(alpha: f64, beta: f64, x: f64) -> f64 {
        let pareto = if alpha == 2.0 { 2.0 * x.ln() } else { alpha * (x.powf(2.0 - alpha) - 1.0) / (2.0 - alpha) };
        beta / 3.0 + (1.0 - beta) * pareto
    }

    #[test]
    fn truncated_moment_matches_closed_form() {
        for &alpha in &[1.2, 1.5, 2.0, 3.0] {
            let model = RVModel::one_dimensional(alpha, 1.0, 0.1, TailBalance::symmetric(alpha)).unwrap();
            for &x in &[0.5, 3.0, 1e3, 1e6] {
                let got = truncated_second_moment(&model, x).unwrap();
                let want = if x < 1.0 { 0.1 * x.powi(3) / 3.0 } else { closed_form(alpha, 0.1, x) };
                assert!((got / want - 1.0).abs() < 1e-8, "alpha {alpha} x {x}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn shape_slopes() {
        let m15 = RVModel::one_dimensional(1.5, 1.0, 0.1, TailBalance::symmetric(1.5)).unwrap();
        assert!((shape_slope(&m15, 1e5, 1e7, true).unwrap() + 1.5).abs() < 0.1);
        let m2 = RVModel::one_dimensional(2.0, 1.0, 0.1, TailBalance::symmetric(2.0)).unwrap();
        assert!(shape_slope(&m2, 1e5, 1e7, false).unwrap().abs() < 0.1);
    }

    #[test]
    fn kolmogorov_bound_holds() {
        let model = RVModel::one_dimensional(1.5, 1.0, 0.1, TailBalance::symmetric(1.5)).unwrap();
        let m = 1_000;
        let r = check_kolmogorov(&model, m, (m as f64).powf(0.8), 4_000, 5, 10.0).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.lhs > 0.0);
    }

    #[test]
    fn fluctuation_window_is_wide_enough() {
        let model = RVModel::one_dimensional(1.5, 1.0, 0.1, TailBalance::symmetric(1.5)).unwrap();
        let p = SegmentParams::new(0.1, 0.05, 0.2, 1.5, 1.0, 2.0).unwrap();
        let r = check_fluctuation(&model, &p, 10_000, 1_000, 11).unwrap();
        assert_eq!(r.horizon, 8_525);
        assert!(r.probability > 0.8 && r.pass, "{r:?}");
        let (tight, _) = fluctuation_probability(&model, 10_000f64.powf(1.0 / 1.5), r.horizon, 1_000, 11);
        assert!(tight < 0.6, "{tight}");
    }

    #[test]
    fn fluctuation_light_tails() {
        let model = RVModel::one_dimensional(3.0, 1.0, 0.1, TailBalance::symmetric(3.0)).unwrap();
        let p = SegmentParams::new(0.1, 0.05, 0.2, 3.0, 1.0, 2.0).unwrap();
        let r = check_fluctuation(&model, &p, 10_000, 500, 3).unwrap();
        assert!(r.pass, "{r:?}");
    }
}
