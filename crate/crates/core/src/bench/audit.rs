//! Survival in `A` against survival of its best one-dimensional projection.

use rayon::prelude::*;

use crate::engine::{make_schedule, splitting_estimate, ScheduleKind, SplittingOptions};
use crate::geometry::{persistence_exponent, projection_exponent_bound, r_star, ConvexBody, ProjectionBound, DEFAULT_TOL};
use crate::linalg::{dot, orthonormal_frame};
use crate::rng::stream_rng;
use crate::sampler::RVModel;
use crate::{Error, Result};

/// Same-path survival counts in `A` and in `{k^{-1}⟨c, S_k⟩ ∈ [lo, hi]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSurvival {
    pub n: u64,
    pub reps: u64,
    pub full: u64,
    pub projected: u64,
    /// Paths alive in `A` but dead in the projection.
    pub violations: u64,
}

/// Replication `r` uses stream `(seed, r, 0)`.
pub fn paired_survival(
    body: &ConvexBody,
    model: &RVModel,
    c: &[f64],
    interval: (f64, f64),
    n: u64,
    reps: u64,
    seed: u64,
) -> Result<PairedSurvival> {
    if model.dimension != body.dimension() || c.len() != body.dimension() {
        return Err(Error::config("model, body and direction dimensions differ"));
    }
    if reps == 0 || n == 0 {
        return Err(Error::config("need positive horizon and replications"));
    }
    let (lo, hi) = interval;
    let d = model.dimension;
    let (full, projected, violations) = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r, 0);
            let mut s = vec![0.0; d];
            let mut step = vec![0.0; d];
            let mut full_alive = true;
            for k in 1..=n {
                model.sample_into(&mut rng, &mut step);
                for (si, x) in s.iter_mut().zip(&step) {
                    *si += x;
                }
                let kf = k as f64;
                let p = dot(c, &s);
                full_alive = full_alive && body.contains_average(&s, kf);
                if p < lo * kf || p > hi * kf {
                    return (0, 0, full_alive as u64);
                }
            }
            (full_alive as u64, 1, 0)
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    Ok(PairedSurvival { n, reps, full, projected, violations })
}

/// `{x : lo ≤ ⟨c, x⟩ ≤ hi, |⟨e, x⟩| ≤ half_width}` over the complement `e` of `c`.
pub fn slab_body(c: &[f64], interval: (f64, f64), half_width: f64) -> Result<ConvexBody> {
    crate::geometry::check_unit(c)?;
    let frame = orthonormal_frame(c);
    let mut normals = vec![c.to_vec(), c.iter().map(|v| -v).collect()];
    let mut offsets = vec![-interval.1, interval.0];
    for e in frame.iter().skip(1) {
        normals.push(e.clone());
        normals.push(e.iter().map(|v| -v).collect());
        offsets.extend([-half_width, -half_width]);
    }
    ConvexBody::polytope(normals, offsets)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionAudit {
    pub n: u64,
    pub direction: Vec<f64>,
    pub interval: (f64, f64),
    /// Splitting estimate of `log P(S_k/k ∈ A, k ≤ n)` and its s.e.
    pub log_full: (f64, f64),
    /// Same for the projected slab, truncated far away across `c`.
    pub log_projected: (f64, f64),
    /// `log_full ≤ log_projected + 3·(combined s.e.)`.
    pub holds: bool,
    pub bound: ProjectionBound,
    /// Exponent from the dilation ratio.
    pub phi: f64,
    /// `bound.exponent − phi`.
    pub gap: f64,
}

/// Compares both sides at horizon `n` by splitting with geometric checkpoints.
/// The slab is cut at `10^3` outer radii across `c`, which only shrinks the
/// projected event.
pub fn projection_bound_audit(
    body: &ConvexBody,
    model: &RVModel,
    grid_density: usize,
    n: u64,
    effort: usize,
    seed: u64,
) -> Result<ProjectionAudit> {
    if model.dimension != body.dimension() {
        return Err(Error::config("model and body dimensions differ"));
    }
    let alpha = model.tail_indices().into_iter().fold(f64::INFINITY, f64::min);
    let bound = projection_exponent_bound(body, alpha, grid_density)?;
    let rs = r_star(body, 0.0, DEFAULT_TOL)?;
    let phi = persistence_exponent(rs.r, alpha)?;
    let slab = slab_body(&bound.direction, bound.interval, 1e3 * body.outer_radius())?;
    let schedule = make_schedule(ScheduleKind::Geometric, rs.r, 1, n)?;
    let options = SplittingOptions::new(effort);
    let run = |b: &ConvexBody| -> Result<(f64, f64)> {
        let r = splitting_estimate(model, b, &schedule, &options, seed)?;
        if r.extinct_at.is_some() {
            return Err(Error::Estimation("splitting run went extinct".into()));
        }
        Ok((r.log_estimate, r.std_error_log))
    };
    let log_full = run(body)?;
    let log_projected = run(&slab)?;
    // a macro-replication that died out leaves no standard error; compare point values then
    let slack = 3.0 * log_full.1.hypot(log_projected.1);
    let holds = log_full.0 <= log_projected.0 + if slack.is_finite() { slack } else { 0.0 };
    Ok(ProjectionAudit {
        n,
        direction: bound.direction.clone(),
        interval: bound.interval,
        log_full,
        log_projected,
        holds,
        gap: bound.exponent - phi,
        bound,
        phi,
    })
}
