//! Step laws with regularly varying tails.
//!
//! A step is `X = W − shift` where `W` is a Pareto-radial jump `R·Θ` with
//! probability `1 − bulk_fraction` and a bounded bulk draw otherwise. The shift
//! is `E W`, so every model is centred.

mod angular;
mod hill;

pub use angular::{vmf_mean_resultant_length, AngularSpec};
pub use hill::{hill_tail_index, HillEstimate};
pub(crate) use angular::simpson;

use rand::Rng;
use sha2::{Digest, Sha256};

use crate::rng::stream_rng;
use crate::{Error, Result};

/// Structure of the step law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Multivariate,
    OneDimensional,
    NonstandardProduct,
}

/// Left-tail weight and index of a one-dimensional law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBalance {
    pub p_minus: f64,
    pub alpha_minus: f64,
}

impl TailBalance {
    pub fn symmetric(alpha: f64) -> Self {
        TailBalance { p_minus: 0.5, alpha_minus: alpha }
    }
}

/// Full description of the step distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct RVModel {
    pub dimension: usize,
    /// Tail index; in product mode the smallest component index.
    pub alpha: f64,
    pub radial_scale: f64,
    pub bulk_fraction: f64,
    pub angular_spec: AngularSpec,
    pub tail_balance: Option<TailBalance>,
    pub centering_shift: Vec<f64>,
    pub mode: Mode,
    /// Component laws in product mode, empty otherwise.
    pub components: Vec<RVModel>,
}

impl RVModel {
    /// Multivariate law with Pareto radius and the given angular law, centred.
    pub fn multivariate(
        dimension: usize,
        alpha: f64,
        radial_scale: f64,
        bulk_fraction: f64,
        angular_spec: AngularSpec,
    ) -> Result<Self> {
        let mut model = RVModel {
            dimension,
            alpha,
            radial_scale,
            bulk_fraction,
            angular_spec,
            tail_balance: None,
            centering_shift: vec![0.0; dimension],
            mode: Mode::Multivariate,
            components: Vec::new(),
        };
        model.validate()?;
        model.centering_shift = calibrate_centering(&model)?;
        Ok(model)
    }

    /// Two-sided one-dimensional law, centred.
    pub fn one_dimensional(
        alpha: f64,
        radial_scale: f64,
        bulk_fraction: f64,
        tail_balance: TailBalance,
    ) -> Result<Self> {
        let mut model = RVModel {
            dimension: 1,
            alpha,
            radial_scale,
            bulk_fraction,
            angular_spec: AngularSpec::Uniform,
            tail_balance: Some(tail_balance),
            centering_shift: vec![0.0],
            mode: Mode::OneDimensional,
            components: Vec::new(),
        };
        model.validate()?;
        model.centering_shift = calibrate_centering(&model)?;
        Ok(model)
    }

    /// Vector of independent one-dimensional components.
    pub fn nonstandard(components: Vec<RVModel>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::config("product law needs at least one component"));
        }
        for c in &components {
            if c.mode != Mode::OneDimensional {
                return Err(Error::config("product components must be one-dimensional laws"));
            }
            c.validate()?;
        }
        let alpha = components.iter().map(|c| c.alpha).fold(f64::INFINITY, f64::min);
        Ok(RVModel {
            dimension: components.len(),
            alpha,
            radial_scale: components[0].radial_scale,
            bulk_fraction: components[0].bulk_fraction,
            angular_spec: AngularSpec::Uniform,
            tail_balance: None,
            centering_shift: components.iter().map(|c| c.centering_shift[0]).collect(),
            mode: Mode::NonstandardProduct,
            components,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::config("dimension must be positive"));
        }
        if !(self.alpha.is_finite() && self.alpha > 1.0) {
            return Err(Error::config(format!("tail index must exceed 1, got {}", self.alpha)));
        }
        if !(self.radial_scale.is_finite() && self.radial_scale > 0.0) {
            return Err(Error::config("radial scale must be positive"));
        }
        if !(0.0..1.0).contains(&self.bulk_fraction) {
            return Err(Error::config("bulk fraction must lie in [0, 1)"));
        }
        if self.centering_shift.len() != self.dimension {
            return Err(Error::config("centering shift has wrong length"));
        }
        match self.mode {
            Mode::Multivariate => self.angular_spec.validate(self.dimension),
            Mode::OneDimensional => {
                let tb = self
                    .tail_balance
                    .ok_or_else(|| Error::config("one-dimensional law needs a tail balance"))?;
                if self.dimension != 1 {
                    return Err(Error::config("one-dimensional law must have dimension 1"));
                }
                if !(0.0..=1.0).contains(&tb.p_minus) {
                    return Err(Error::config("p_minus must lie in [0, 1]"));
                }
                if !(tb.alpha_minus >= self.alpha) {
                    return Err(Error::config(format!(
                        "left index {} below right index {}",
                        tb.alpha_minus, self.alpha
                    )));
                }
                Ok(())
            }
            Mode::NonstandardProduct => {
                if self.components.len() != self.dimension {
                    return Err(Error::config("product law dimension mismatch"));
                }
                self.components.iter().try_for_each(RVModel::validate)
            }
        }
    }

    /// Per-coordinate tail indices (product mode) or `[alpha]`.
    pub fn tail_indices(&self) -> Vec<f64> {
        match self.mode {
            Mode::NonstandardProduct => self.components.iter().map(|c| c.alpha).collect(),
            _ => vec![self.alpha],
        }
    }

    /// Hex SHA-256 of the canonical model description.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(format!("{self:?}").as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Draws one step into `out` (length `dimension`).
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self.mode {
            Mode::OneDimensional => out[0] = sample_step_1d(self, rng),
            Mode::NonstandardProduct => {
                for (o, c) in out.iter_mut().zip(&self.components) {
                    *o = sample_step_1d(c, rng);
                }
            }
            Mode::Multivariate => {
                let beta = self.bulk_fraction;
                let u: f64 = if beta > 0.0 { rng.random() } else { 1.0 };
                if u < beta {
                    AngularSpec::Uniform.sample_into(rng, out);
                    let r = self.radial_scale * rng.random::<f64>().powf(1.0 / self.dimension as f64);
                    out.iter_mut().for_each(|x| *x *= r);
                } else {
                    self.angular_spec.sample_into(rng, out);
                    let r = pareto(rng, self.alpha, self.radial_scale);
                    out.iter_mut().for_each(|x| *x *= r);
                }
                for (o, s) in out.iter_mut().zip(&self.centering_shift) {
                    *o -= s;
                }
            }
        }
    }
}

#[inline]
fn pareto<R: Rng + ?Sized>(rng: &mut R, alpha: f64, scale: f64) -> f64 {
    let u = 1.0 - rng.random::<f64>();
    scale * u.powf(-1.0 / alpha)
}

/// One step of any model.
pub fn sample_step<R: Rng + ?Sized>(model: &RVModel, rng: &mut R) -> Vec<f64> {
    let mut out = vec![0.0; model.dimension];
    model.sample_into(rng, &mut out);
    out
}

/// One step of a one-dimensional model.
pub fn sample_step_1d<R: Rng + ?Sized>(model: &RVModel, rng: &mut R) -> f64 {
    debug_assert_eq!(model.mode, Mode::OneDimensional);
    let tb = model.tail_balance.unwrap_or(TailBalance::symmetric(model.alpha));
    let xm = model.radial_scale;
    let u: f64 = rng.random();
    let w = if u < model.bulk_fraction {
        xm * (2.0 * rng.random::<f64>() - 1.0)
    } else if rng.random::<f64>() < tb.p_minus {
        -pareto(rng, tb.alpha_minus, xm)
    } else {
        pareto(rng, model.alpha, xm)
    };
    w - model.centering_shift[0]
}

/// One step with independent one-dimensional components, drawn in order.
pub fn sample_nonstandard<R: Rng + ?Sized>(models: &[RVModel], rng: &mut R) -> Result<Vec<f64>> {
    if models.is_empty() {
        return Err(Error::config("product law needs at least one component"));
    }
    Ok(models.iter().map(|m| sample_step_1d(m, rng)).collect())
}

/// `E W` for the uncentred law.
pub fn calibrate_centering(model: &RVModel) -> Result<Vec<f64>> {
    if !(model.alpha > 1.0) {
        return Err(Error::domain("mean is undefined for tail index <= 1"));
    }
    let tail_mass = 1.0 - model.bulk_fraction;
    let pareto_mean = |a: f64| a * model.radial_scale / (a - 1.0);
    match model.mode {
        Mode::Multivariate => {
            let theta = model.angular_spec.mean(model.dimension);
            Ok(theta.iter().map(|t| tail_mass * pareto_mean(model.alpha) * t).collect())
        }
        Mode::OneDimensional => {
            let tb = model.tail_balance.ok_or_else(|| Error::config("missing tail balance"))?;
            Ok(vec![
                tail_mass * ((1.0 - tb.p_minus) * pareto_mean(model.alpha) - tb.p_minus * pareto_mean(tb.alpha_minus)),
            ])
        }
        Mode::NonstandardProduct => model
            .components
            .iter()
            .map(|c| calibrate_centering(c).map(|v| v[0]))
            .collect(),
    }
}

/// `P(X > x)` for a one-dimensional model.
pub fn right_tail_1d(model: &RVModel, x: f64) -> f64 {
    1.0 - cdf_1d(model, x)
}

/// `P(X ≤ x)` for a one-dimensional model.
pub fn cdf_1d(model: &RVModel, x: f64) -> f64 {
    let tb = model.tail_balance.unwrap_or(TailBalance::symmetric(model.alpha));
    let (beta, xm) = (model.bulk_fraction, model.radial_scale);
    let w = x + model.centering_shift[0];
    let left = (1.0 - beta) * tb.p_minus;
    if w < -xm {
        left * (-w / xm).powf(-tb.alpha_minus)
    } else if w < xm {
        left + beta * (w + xm) / (2.0 * xm)
    } else {
        1.0 - (1.0 - beta) * (1.0 - tb.p_minus) * (w / xm).powf(-model.alpha)
    }
}

/// Variance of a one-dimensional model; infinite unless both indices exceed 2.
pub fn variance_1d(model: &RVModel) -> f64 {
    let tb = model.tail_balance.unwrap_or(TailBalance::symmetric(model.alpha));
    let (beta, xm) = (model.bulk_fraction, model.radial_scale);
    let second = |a: f64| if a > 2.0 { a * xm * xm / (a - 2.0) } else { f64::INFINITY };
    let mut m2 = beta * xm * xm / 3.0;
    if tb.p_minus < 1.0 {
        m2 += (1.0 - beta) * (1.0 - tb.p_minus) * second(model.alpha);
    }
    if tb.p_minus > 0.0 {
        m2 += (1.0 - beta) * tb.p_minus * second(tb.alpha_minus);
    }
    let mean = model.centering_shift[0];
    m2 - mean * mean
}

/// `P(‖W‖ > t)` for `t ≥ radial_scale` in multivariate mode.
pub fn radial_tail(model: &RVModel, t: f64) -> f64 {
    (1.0 - model.bulk_fraction) * (t / model.radial_scale).powf(-model.alpha)
}

/// Seeded batch of steps.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub dimension: usize,
    /// Row-major, `count × dimension`.
    pub steps: Vec<f64>,
    pub seed: u64,
    pub model_digest: String,
}

impl SampleBatch {
    pub fn generate(model: &RVModel, count: usize, seed: u64) -> Self {
        let mut rng = stream_rng(seed, 0, 0);
        let d = model.dimension;
        let mut steps = vec![0.0; count * d];
        for row in steps.chunks_mut(d) {
            model.sample_into(&mut rng, row);
        }
        SampleBatch { dimension: d, steps, seed, model_digest: model.digest() }
    }

    pub fn len(&self) -> usize {
        self.steps.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.steps.chunks(self.dimension)
    }

    /// Coordinate `j` of every step.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, norm};
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn mean_and_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        (m, (v / n).sqrt())
    }

    fn binomial_within(hits: usize, n: usize, p: f64, z: f64) -> bool {
        let se = (p * (1.0 - p) / n as f64).sqrt();
        (hits as f64 / n as f64 - p).abs() <= z * se
    }

    #[test]
    fn invalid_models_are_rejected() {
        let tb = TailBalance::symmetric(1.5);
        assert!(matches!(RVModel::one_dimensional(1.0, 1.0, 0.0, tb), Err(Error::Config(_))));
        assert!(RVModel::one_dimensional(1.5, -1.0, 0.0, tb).is_err());
        assert!(RVModel::one_dimensional(1.5, 1.0, 1.0, tb).is_err());
        let bad = TailBalance { p_minus: 0.5, alpha_minus: 1.2 };
        assert!(matches!(RVModel::one_dimensional(1.5, 1.0, 0.0, bad), Err(Error::Config(_))));
        assert!(RVModel::nonstandard(vec![]).is_err());
        assert!(sample_nonstandard(&[], &mut stream_rng(0, 0, 0)).is_err());
    }

    #[test]
    fn symmetric_pareto_has_zero_empirical_mean() {
        let m = RVModel::one_dimensional(2.5, 1.0, 0.0, TailBalance::symmetric(2.5)).unwrap();
        assert_eq!(m.centering_shift, vec![0.0]);
        let b = SampleBatch::generate(&m, 200_000, 3);
        let (mean, se) = mean_and_se(&b.steps);
        assert!(mean.abs() < 3.0 * se);
    }

    #[test]
    fn one_sided_shift_is_pareto_mean() {
        let m = RVModel::one_dimensional(2.0, 1.0, 0.0, TailBalance { p_minus: 0.0, alpha_minus: 2.0 }).unwrap();
        assert!((m.centering_shift[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_and_flat_vmf_shift_vanishes() {
        let m = RVModel::multivariate(3, 1.7, 1.0, 0.2, AngularSpec::Uniform).unwrap();
        assert_eq!(m.centering_shift, vec![0.0; 3]);
        let mut last = f64::INFINITY;
        for kappa in [1.0, 1e-2, 1e-4] {
            let spec = AngularSpec::VonMisesFisher { mean_direction: vec![1.0, 0.0], concentration: kappa };
            let m = RVModel::multivariate(2, 1.7, 1.0, 0.0, spec).unwrap();
            let s = norm(&m.centering_shift);
            assert!(s < last);
            last = s;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn exceedance_matches_mixture_cdf() {
        let m = RVModel::one_dimensional(1.5, 1.0, 0.1, TailBalance::symmetric(1.5)).unwrap();
        let x = 2.0;
        let p = right_tail_1d(&m, x);
        // shift is zero here, so this is the raw right tail
        assert!((p - 0.9 * 0.5 * 2f64.powf(-1.5)).abs() < 1e-15);
        let b = SampleBatch::generate(&m, 1_000_000, 11);
        let hits = b.steps.iter().filter(|&&s| s > x).count();
        assert!(binomial_within(hits, b.len(), p, 3.0));
    }

    #[test]
    fn exceedance_with_asymmetric_shift() {
        let tb = TailBalance { p_minus: 0.3, alpha_minus: 2.5 };
        let m = RVModel::one_dimensional(1.8, 1.0, 0.2, tb).unwrap();
        let b = SampleBatch::generate(&m, 1_000_000, 12);
        for x in [-3.0, -0.5, 0.0, 0.7, 4.0] {
            let p = right_tail_1d(&m, x);
            let hits = b.steps.iter().filter(|&&s| s > x).count();
            assert!(binomial_within(hits, b.len(), p, 3.5), "x = {x}");
        }
        let (mean, se) = mean_and_se(&b.steps);
        assert!(mean.abs() < 3.5 * se);
    }

    #[test]
    fn finite_variance_matches_analytic_moment() {
        let tb = TailBalance { p_minus: 0.4, alpha_minus: 3.5 };
        let m = RVModel::one_dimensional(3.0, 1.0, 0.3, tb).unwrap();
        let b = SampleBatch::generate(&m, 1_000_000, 5);
        let (mean, se) = mean_and_se(&b.steps);
        let var = se * se * b.len() as f64;
        let exact = variance_1d(&m);
        assert!(exact.is_finite());
        assert!((var / exact - 1.0).abs() < 0.1, "{var} vs {exact}");
        assert!(mean.abs() < 4.0 * se);
    }

    #[test]
    fn batches_are_reproducible() {
        let m = RVModel::multivariate(2, 1.5, 1.0, 0.3, AngularSpec::Uniform).unwrap();
        let a = SampleBatch::generate(&m, 1000, 9);
        let b = SampleBatch::generate(&m, 1000, 9);
        assert_eq!(a, b);
        assert_ne!(a.steps, SampleBatch::generate(&m, 1000, 10).steps);
        assert_eq!(a.model_digest.len(), 64);
    }

    #[test]
    fn planar_radial_tail_index_by_hill() {
        let m = RVModel::multivariate(2, 2.0, 1.0, 0.0, AngularSpec::Uniform).unwrap();
        let b = SampleBatch::generate(&m, 1_000_000, 21);
        let norms: Vec<f64> = b.rows().map(norm).collect();
        let h = hill_tail_index(&norms, 10_000).unwrap();
        assert!((1.85..=2.15).contains(&h.alpha), "{}", h.alpha);
    }

    #[test]
    fn uniform_direction_is_half_positive() {
        let m = RVModel::multivariate(2, 1.5, 1.0, 0.2, AngularSpec::Uniform).unwrap();
        let b = SampleBatch::generate(&m, 400_000, 22);
        for u in [[1.0, 0.0], [0.6, -0.8], [-0.28, 0.96]] {
            let hits = b.rows().filter(|x| dot(x, &u) > 0.0).count();
            assert!(binomial_within(hits, b.len(), 0.5, 3.0));
        }
    }

    #[test]
    fn product_components_are_uncorrelated() {
        let c = RVModel::one_dimensional(3.0, 1.0, 0.2, TailBalance::symmetric(3.0)).unwrap();
        let m = RVModel::nonstandard(vec![c.clone(), c]).unwrap();
        let b = SampleBatch::generate(&m, 400_000, 23);
        let prods: Vec<f64> = b.rows().map(|r| r[0] * r[1]).collect();
        let (mean, se) = mean_and_se(&prods);
        assert!(mean.abs() < 3.0 * se);
    }

    #[test]
    fn product_component_indices_by_hill() {
        let comps = [2.0, 3.0]
            .iter()
            .map(|&a| RVModel::one_dimensional(a, 1.0, 0.0, TailBalance::symmetric(a)).unwrap())
            .collect();
        let m = RVModel::nonstandard(comps).unwrap();
        let b = SampleBatch::generate(&m, 1_000_000, 24);
        for (j, a) in [2.0, 3.0].iter().enumerate() {
            let pos: Vec<f64> = b.column(j).into_iter().filter(|x| *x > 0.0).collect();
            let h = hill_tail_index(&pos, 5_000).unwrap();
            assert!((h.alpha - a).abs() < 0.15, "component {j}: {}", h.alpha);
        }
    }

    #[test]
    fn single_component_product_matches_1d() {
        let c = RVModel::one_dimensional(1.5, 1.0, 0.1, TailBalance::symmetric(1.5)).unwrap();
        let m = RVModel::nonstandard(vec![c.clone()]).unwrap();
        let mut r1 = stream_rng(4, 0, 0);
        let mut r2 = stream_rng(4, 0, 0);
        for _ in 0..1000 {
            assert_eq!(sample_step(&m, &mut r1)[0], sample_step_1d(&c, &mut r2));
        }
    }

    #[test]
    fn pure_pareto_norm_tail() {
        let m = RVModel::multivariate(3, 1.5, 1.0, 0.0, AngularSpec::Uniform).unwrap();
        let b = SampleBatch::generate(&m, 1_000_000, 25);
        let norms: Vec<f64> = b
            .rows()
            .map(|r| norm(&r.iter().zip(&m.centering_shift).map(|(x, s)| x + s).collect::<Vec<_>>()))
            .collect();
        for t in [2.0, 4.0, 8.0] {
            let hits = norms.iter().filter(|&&n| n > t).count();
            assert!(binomial_within(hits, norms.len(), radial_tail(&m, t), 3.0));
        }
    }

    #[test]
    fn tail_ratio_is_homogeneous() {
        let m = RVModel::multivariate(2, 1.5, 1.0, 0.3, AngularSpec::Uniform).unwrap();
        let b = SampleBatch::generate(&m, 1_000_000, 26);
        let norms: Vec<f64> = b.rows().map(norm).collect();
        let t = 5.0;
        let base = norms.iter().filter(|&&n| n > t).count();
        for u in [2.0_f64, 4.0] {
            let hits = norms.iter().filter(|&&n| n > u * t).count();
            let p = u.powf(-1.5);
            // conditional binomial on the base exceedances
            assert!(binomial_within(hits, base, p, 3.0), "u = {u}");
        }
    }

    fn chi_square_directions(spec: AngularSpec, alpha: f64, seed: u64) -> (f64, f64) {
        let bins = 12;
        let m = RVModel::multivariate(2, alpha, 1.0, 0.1, spec.clone()).unwrap();
        let b = SampleBatch::generate(&m, 2_000_000, seed);
        let t = 100.0;
        let mut counts = vec![0usize; bins];
        for x in b.rows().filter(|x| norm(x) > t) {
            let theta = x[1].atan2(x[0]).rem_euclid(2.0 * std::f64::consts::PI);
            let k = ((theta / (2.0 * std::f64::consts::PI) * bins as f64) as usize).min(bins - 1);
            counts[k] += 1;
        }
        let total: usize = counts.iter().sum();
        let probs = spec.planar_bin_probabilities(bins).unwrap();
        let stat: f64 = counts
            .iter()
            .zip(&probs)
            .map(|(&c, p)| {
                let e = p * total as f64;
                (c as f64 - e).powi(2) / e
            })
            .sum();
        let crit = ChiSquared::new((bins - 1) as f64).unwrap().inverse_cdf(0.99);
        (stat, crit)
    }

    #[test]
    fn large_jump_directions_follow_angular_law() {
        let specs = [
            AngularSpec::Uniform,
            AngularSpec::VonMisesFisher { mean_direction: vec![0.6, 0.8], concentration: 2.0 },
            AngularSpec::PiecewiseDensity { weights: vec![1.0, 2.0, 0.5, 1.5, 1.0, 3.0] },
        ];
        for (i, spec) in specs.into_iter().enumerate() {
            let (stat, crit) = chi_square_directions(spec, 1.5, 30 + i as u64);
            assert!(stat < crit, "law {i}: {stat} >= {crit}");
        }
    }

    #[test]
    fn centred_vmf_mean_is_small() {
        let spec = AngularSpec::VonMisesFisher { mean_direction: vec![0.0, 1.0, 0.0], concentration: 3.0 };
        let m = RVModel::multivariate(3, 2.5, 1.0, 0.2, spec).unwrap();
        let b = SampleBatch::generate(&m, 1_000_000, 40);
        for j in 0..3 {
            let (mean, se) = mean_and_se(&b.column(j));
            let sd = se * (b.len() as f64).sqrt();
            assert!(mean.abs() < 5e-2 * sd);
        }
    }
}
