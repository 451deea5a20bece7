//! Angular (spectral) laws on the unit sphere.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

use crate::linalg::{dot, norm, normalized};
use crate::{Error, Result};

/// Law of the direction `Θ` of a large jump.
#[derive(Debug, Clone, PartialEq)]
pub enum AngularSpec {
    /// Uniform law on the sphere `S^{d-1}`.
    Uniform,
    /// von Mises–Fisher law with unit `mean_direction` and `concentration ≥ 0`.
    VonMisesFisher { mean_direction: Vec<f64>, concentration: f64 },
    /// Planar law with piecewise-constant density in the polar angle: bin `k`
    /// covers `[2πk/K, 2π(k+1)/K)` and carries relative weight `weights[k]`.
    PiecewiseDensity { weights: Vec<f64> },
}

impl AngularSpec {
    pub(crate) fn validate(&self, dimension: usize) -> Result<()> {
        match self {
            AngularSpec::Uniform => Ok(()),
            AngularSpec::VonMisesFisher { mean_direction, concentration } => {
                if dimension < 2 {
                    return Err(Error::config("von Mises-Fisher law needs dimension >= 2"));
                }
                if mean_direction.len() != dimension {
                    return Err(Error::config(format!(
                        "mean direction has length {}, expected {dimension}",
                        mean_direction.len()
                    )));
                }
                if (norm(mean_direction) - 1.0).abs() > 1e-9 {
                    return Err(Error::config("mean direction must be a unit vector"));
                }
                if !(concentration.is_finite() && *concentration >= 0.0) {
                    return Err(Error::config("concentration must be finite and non-negative"));
                }
                Ok(())
            }
            AngularSpec::PiecewiseDensity { weights } => {
                if dimension != 2 {
                    return Err(Error::config("piecewise angular density is defined for dimension 2"));
                }
                if weights.is_empty() {
                    return Err(Error::config("piecewise angular density needs at least one bin"));
                }
                // positivity on the whole sphere is a hypothesis of the exponent formula
                if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                    return Err(Error::config("angular density must be strictly positive on every bin"));
                }
                Ok(())
            }
        }
    }

    /// Draws a unit vector into `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            AngularSpec::Uniform => uniform_sphere(rng, out),
            AngularSpec::VonMisesFisher { mean_direction, concentration } => {
                if *concentration == 0.0 {
                    uniform_sphere(rng, out)
                } else {
                    von_mises_fisher(rng, mean_direction, *concentration, out)
                }
            }
            AngularSpec::PiecewiseDensity { weights } => {
                let max = weights.iter().cloned().fold(0.0, f64::max);
                let bins = weights.len() as f64;
                loop {
                    let theta = rng.random::<f64>() * 2.0 * PI;
                    let k = ((theta / (2.0 * PI) * bins) as usize).min(weights.len() - 1);
                    if rng.random::<f64>() * max <= weights[k] {
                        out[0] = theta.cos();
                        out[1] = theta.sin();
                        return;
                    }
                }
            }
        }
    }

    /// `E Θ`, by closed form where available and by quadrature for von Mises–Fisher.
    pub fn mean(&self, dimension: usize) -> Vec<f64> {
        match self {
            AngularSpec::Uniform => vec![0.0; dimension],
            AngularSpec::VonMisesFisher { mean_direction, concentration } => {
                let a = vmf_mean_resultant_length(dimension, *concentration);
                mean_direction.iter().map(|m| a * m).collect()
            }
            AngularSpec::PiecewiseDensity { weights } => {
                let total: f64 = weights.iter().sum();
                let width = 2.0 * PI / weights.len() as f64;
                let mut mean = vec![0.0; 2];
                for (k, w) in weights.iter().enumerate() {
                    let (lo, hi) = (k as f64 * width, (k + 1) as f64 * width);
                    let p = w / total / width;
                    mean[0] += p * (hi.sin() - lo.sin());
                    mean[1] += p * (lo.cos() - hi.cos());
                }
                mean
            }
        }
    }

    /// Probabilities of `bins` equal-width polar-angle bins for a planar law.
    pub fn planar_bin_probabilities(&self, bins: usize) -> Result<Vec<f64>> {
        let width = 2.0 * PI / bins as f64;
        let probs = match self {
            AngularSpec::Uniform => vec![1.0 / bins as f64; bins],
            AngularSpec::VonMisesFisher { mean_direction, concentration } => {
                if mean_direction.len() != 2 {
                    return Err(Error::config("planar bins need a two-dimensional law"));
                }
                let mu = mean_direction[1].atan2(mean_direction[0]);
                let kappa = *concentration;
                let density = |t: f64| (kappa * ((t - mu).cos() - 1.0)).exp();
                let raw: Vec<f64> = (0..bins)
                    .map(|k| simpson(density, k as f64 * width, (k + 1) as f64 * width, 2000))
                    .collect();
                let total: f64 = raw.iter().sum();
                raw.into_iter().map(|r| r / total).collect()
            }
            AngularSpec::PiecewiseDensity { weights } => {
                let total: f64 = weights.iter().sum();
                let wbin = 2.0 * PI / weights.len() as f64;
                (0..bins)
                    .map(|k| {
                        let (lo, hi) = (k as f64 * width, (k + 1) as f64 * width);
                        weights
                            .iter()
                            .enumerate()
                            .map(|(j, w)| {
                                let overlap = (hi.min((j + 1) as f64 * wbin) - lo.max(j as f64 * wbin)).max(0.0);
                                w / total * overlap / wbin
                            })
                            .sum()
                    })
                    .collect()
            }
        };
        Ok(probs)
    }
}

fn uniform_sphere<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    if out.len() == 1 {
        out[0] = if rng.random::<bool>() { 1.0 } else { -1.0 };
        return;
    }
    loop {
        for x in out.iter_mut() {
            *x = rng.sample(StandardNormal);
        }
        let n = norm(out);
        if n > 1e-12 {
            out.iter_mut().for_each(|x| *x /= n);
            return;
        }
    }
}

// Wood (1994) rejection sampler for the tangent-normal decomposition.
fn von_mises_fisher<R: Rng + ?Sized>(rng: &mut R, mu: &[f64], kappa: f64, out: &mut [f64]) {
    let m = mu.len() as f64;
    let b = (m - 1.0) / (2.0 * kappa + (4.0 * kappa * kappa + (m - 1.0) * (m - 1.0)).sqrt());
    let x0 = (1.0 - b) / (1.0 + b);
    let c = kappa * x0 + (m - 1.0) * (1.0 - x0 * x0).ln();
    let beta = Beta::new((m - 1.0) / 2.0, (m - 1.0) / 2.0).expect("valid beta parameters");
    let w = loop {
        let z: f64 = beta.sample(rng);
        let w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
        let u: f64 = rng.random();
        if kappa * w + (m - 1.0) * (1.0 - x0 * w).ln() - c >= u.ln() {
            break w;
        }
    };
    // uniform unit vector orthogonal to mu
    let perp = loop {
        let g: Vec<f64> = (0..mu.len()).map(|_| rng.sample(StandardNormal)).collect();
        let proj = dot(&g, mu);
        let v: Vec<f64> = g.iter().zip(mu).map(|(gi, mi)| gi - proj * mi).collect();
        if let Some(v) = normalized(&v) {
            break v;
        }
    };
    let s = (1.0 - w * w).max(0.0).sqrt();
    for ((o, m), p) in out.iter_mut().zip(mu).zip(&perp) {
        *o = w * m + s * p;
    }
}

/// Mean resultant length `E⟨μ, Θ⟩` of the von Mises–Fisher law on `S^{d-1}`.
pub fn vmf_mean_resultant_length(dimension: usize, kappa: f64) -> f64 {
    if kappa == 0.0 {
        return 0.0;
    }
    let p = dimension as f64 - 2.0;
    let weight = |t: f64| (kappa * (t.cos() - 1.0)).exp() * t.sin().powf(p);
    let num = simpson(|t| t.cos() * weight(t), 0.0, PI, 20_000);
    let den = simpson(weight, 0.0, PI, 20_000);
    num / den
}

/// Composite Simpson rule with `2 * half_panels` sub-intervals.
pub(crate) fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, half_panels: usize) -> f64 {
    let n = 2 * half_panels;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn vmf_mean_length_matches_closed_forms() {
        // d = 3: coth κ − 1/κ
        for kappa in [0.5_f64, 2.0, 10.0] {
            let exact = 1.0 / kappa.tanh() - 1.0 / kappa;
            assert!((vmf_mean_resultant_length(3, kappa) - exact).abs() < 1e-9);
        }
        // d = 2: I1(κ)/I0(κ) via its series
        let bessel = |nu: i32, x: f64| {
            (0..60)
                .map(|k| {
                    let k = k as f64;
                    (x / 2.0).powf(2.0 * k + nu as f64)
                        / (statrs::function::gamma::gamma(k + 1.0)
                            * statrs::function::gamma::gamma(k + nu as f64 + 1.0))
                })
                .sum::<f64>()
        };
        let kappa = 1.7;
        let exact = bessel(1, kappa) / bessel(0, kappa);
        assert!((vmf_mean_resultant_length(2, kappa) - exact).abs() < 1e-9);
    }

    #[test]
    fn vmf_samples_are_unit_and_concentrated() {
        let mu = vec![0.0, 0.6, 0.8];
        let spec = AngularSpec::VonMisesFisher { mean_direction: mu.clone(), concentration: 5.0 };
        let mut rng = stream_rng(1, 0, 0);
        let mut out = vec![0.0; 3];
        let mut acc = 0.0;
        let n = 20_000;
        for _ in 0..n {
            spec.sample_into(&mut rng, &mut out);
            assert!((norm(&out) - 1.0).abs() < 1e-12);
            acc += dot(&out, &mu);
        }
        let expected = vmf_mean_resultant_length(3, 5.0);
        assert!((acc / n as f64 - expected).abs() < 0.01);
    }

    #[test]
    fn piecewise_mean_and_bins_are_consistent() {
        let spec = AngularSpec::PiecewiseDensity { weights: vec![1.0, 3.0, 1.0, 1.0] };
        let probs = spec.planar_bin_probabilities(8).unwrap();
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((probs[2] - 3.0 / 12.0).abs() < 1e-12);
        // second quadrant is heaviest: mean points to negative x, positive y
        let m = spec.mean(2);
        assert!(m[0] < 0.0 && m[1] > 0.0);
        assert!(AngularSpec::PiecewiseDensity { weights: vec![1.0, 0.0] }.validate(2).is_err());
    }
}
