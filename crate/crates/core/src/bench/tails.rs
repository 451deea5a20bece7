//! Directional tails of a multivariate step and the one-big-jump ratio.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;

use crate::linalg::{dot, norm};
use crate::rng::stream_rng;
use crate::sampler::{hill_tail_index, radial_tail, simpson, AngularSpec, HillEstimate, Mode, RVModel, SampleBatch};
use crate::{Error, Result};

fn require_multivariate(model: &RVModel, u: &[f64]) -> Result<()> {
    if model.mode != Mode::Multivariate {
        return Err(Error::config("multivariate model required"));
    }
    if u.len() != model.dimension || (norm(u) - 1.0).abs() > 1e-9 {
        return Err(Error::config("direction must be a unit vector of the model dimension"));
    }
    Ok(())
}

/// `lim t^α·P(⟨u, X⟩ > t)` for a uniform angular law, `(1−β)·x_m^α·E[(⟨u,Θ⟩₊)^α]`.
pub fn directed_tail_constant(model: &RVModel, u: &[f64]) -> Result<Option<f64>> {
    require_multivariate(model, u)?;
    if model.angular_spec != AngularSpec::Uniform {
        return Ok(None);
    }
    let (a, k) = (model.alpha, model.dimension as i32 - 2);
    let num = simpson(|p| p.sin().powf(a) * p.cos().powi(k), 0.0, FRAC_PI_2, 2_000);
    let den = 2.0 * simpson(|p| p.cos().powi(k), 0.0, FRAC_PI_2, 2_000);
    Ok(Some((1.0 - model.bulk_fraction) * model.radial_scale.powf(a) * num / den))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectedRv {
    pub direction: Vec<f64>,
    pub hill: HillEstimate,
    /// `(t, t^α·P̂(⟨u,X⟩ > t), s.e.)` at the order statistics of rank `k`, `k/4` and `k/16`.
    pub constants: Vec<(f64, f64, f64)>,
    pub analytic: Option<f64>,
}

impl DirectedRv {
    /// Estimate at the deepest threshold.
    pub fn constant(&self) -> (f64, f64) {
        let (_, c, se) = self.constants[0];
        (c, se)
    }
}

pub fn check_directed_rv(model: &RVModel, u: &[f64], samples: usize, k: usize, seed: u64) -> Result<DirectedRv> {
    require_multivariate(model, u)?;
    if k < 16 || k >= samples {
        return Err(Error::config("need 16 <= k < samples"));
    }
    let batch = SampleBatch::generate(model, samples, seed);
    let mut proj: Vec<f64> = batch.rows().map(|x| dot(u, x)).collect();
    let hill = hill_tail_index(&proj, k)?;
    proj.sort_unstable_by(|a, b| b.total_cmp(a));
    let n = samples as f64;
    let constants = [k, k / 4, k / 16]
        .iter()
        .map(|&rank| {
            let t = proj[rank];
            let p = rank as f64 / n;
            let scale = t.powf(model.alpha);
            (t, scale * p, scale * (p * (1.0 - p) / n).sqrt())
        })
        .collect();
    Ok(DirectedRv { direction: u.to_vec(), hill, constants, analytic: directed_tail_constant(model, u)? })
}

/// Target sets bounded away from the origin.
#[derive(Debug, Clone, PartialEq)]
pub enum FarSet {
    /// `{‖x‖ > radius}`.
    Exterior { radius: f64 },
    /// `{⟨normal, x⟩ > level}`.
    HalfSpace { normal: Vec<f64>, level: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HlmsRow {
    pub n: u64,
    /// `P̂(S_n/n ∈ B) / (n·P(‖X‖ > n))`.
    pub ratio: f64,
    pub se: f64,
    pub hits: u64,
    /// Limit measure of `B`, normalised so that the unit-ball exterior has mass 1.
    pub mu: Option<f64>,
}

/// Ratio rows over `n_grid`, replication `r` on stream `(seed, r, 0)`.
pub fn check_hlms_ratio(model: &RVModel, set: &FarSet, n_grid: &[u64], reps: u64, seed: u64) -> Result<Vec<HlmsRow>> {
    let d = model.dimension;
    let unit = vec![1.0 / (d as f64).sqrt(); d];
    require_multivariate(model, &unit)?;
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[0] >= w[1]) || n_grid[0] as f64 <= model.radial_scale {
        return Err(Error::config("horizon grid must be increasing and beyond the radial scale"));
    }
    let mu = match set {
        FarSet::Exterior { radius } if *radius > 0.0 => Some(radius.powf(-model.alpha)),
        FarSet::HalfSpace { normal, level } if *level > 0.0 => directed_tail_constant(model, normal)?
            .map(|c| c / ((1.0 - model.bulk_fraction) * model.radial_scale.powf(model.alpha)) * level.powf(-model.alpha)),
        _ => return Err(Error::config("target set must be bounded away from the origin")),
    };
    let inside = |s: &[f64], n: f64| match set {
        FarSet::Exterior { radius } => norm(s) > radius * n,
        FarSet::HalfSpace { normal, level } => dot(normal, s) > level * n,
    };
    let last = *n_grid.last().unwrap();
    let hits = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r, 0);
            let mut s = vec![0.0; d];
            let mut step = vec![0.0; d];
            let mut hit = vec![0u64; n_grid.len()];
            let mut next = 0;
            for k in 1..=last {
                model.sample_into(&mut rng, &mut step);
                for (si, x) in s.iter_mut().zip(&step) {
                    *si += x;
                }
                if k == n_grid[next] {
                    hit[next] = inside(&s, k as f64) as u64;
                    next += 1;
                }
            }
            hit
        })
        .reduce(|| vec![0; n_grid.len()], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
    Ok(n_grid
        .iter()
        .zip(hits)
        .map(|(&n, h)| {
            let p = h as f64 / reps as f64;
            let norm = n as f64 * radial_tail(model, n as f64);
            HlmsRow { n, ratio: p / norm, se: (p * (1.0 - p) / reps as f64).sqrt() / norm, hits: h, mu }
        })
        .collect())
}
