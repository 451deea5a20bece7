//! Survival of the running average `S_k / k` in the target body.
//!
//! Every estimator draws replication `r` from stream `(seed, r, 0)`, so results do
//! not depend on the rayon pool size.

mod fit;
mod schedule;
mod splitting;
mod windowed;

pub use fit::{exponent_fit, ExponentFit};
pub use schedule::{lower_level, make_schedule, upper_c1_bound, LevelSchedule, ScheduleKind};
pub use splitting::{
    level_passage_slope, macro_seed, splitting_estimate, SplittingOptions, SplittingResult,
};
pub use windowed::{reference_window_exponent, windowed_estimate, windowed_persistence, WindowedResult};

use rand::Rng;
use rayon::prelude::*;

use crate::geometry::ConvexBody;
use crate::rng::stream_rng;
use crate::sampler::RVModel;
use crate::{Error, Result};

/// Walk position after `k` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkState {
    pub k: u64,
    pub s: Vec<f64>,
    pub alive: bool,
}

impl WalkState {
    pub fn origin(dimension: usize) -> Self {
        WalkState { k: 0, s: vec![0.0; dimension], alive: true }
    }
}

/// Result of one walk.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalOutcome {
    pub alive: bool,
    /// First `k` with `S_k / k ∉ A`.
    pub exit_time: Option<u64>,
    pub state: WalkState,
}

/// Moves the walk from time `k` to `until`, testing membership at every time
/// `≥ check_from`. Returns the exit time if the walk leaves.
#[inline]
pub(crate) fn advance<R: Rng + ?Sized>(
    model: &RVModel,
    body: &ConvexBody,
    s: &mut [f64],
    k: &mut u64,
    until: u64,
    check_from: u64,
    rng: &mut R,
    step: &mut [f64],
) -> Option<u64> {
    while *k < until {
        model.sample_into(rng, step);
        for (si, xi) in s.iter_mut().zip(step.iter()) {
            *si += xi;
        }
        *k += 1;
        if *k >= check_from && !body.contains_average(s, *k as f64) {
            return Some(*k);
        }
    }
    None
}

/// Runs one walk for `n` steps from the origin.
pub fn simulate_survival<R: Rng + ?Sized>(model: &RVModel, body: &ConvexBody, n: u64, rng: &mut R) -> SurvivalOutcome {
    let d = model.dimension;
    let mut state = WalkState::origin(d);
    let mut step = vec![0.0; d];
    let exit_time = advance(model, body, &mut state.s, &mut state.k, n, 1, rng, &mut step);
    state.alive = exit_time.is_none();
    SurvivalOutcome { alive: state.alive, exit_time, state }
}

/// Direct Monte Carlo estimate at one horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectEstimate {
    pub n: u64,
    pub p_hat: f64,
    /// Binomial standard error.
    pub se: f64,
    pub survivors: u64,
    pub reps: u64,
    /// No replication survived to `n`.
    pub unestimable: bool,
}

impl DirectEstimate {
    pub fn log_p(&self) -> f64 {
        self.p_hat.ln()
    }

    /// Delta-method standard error of `log p_hat`.
    pub fn se_log(&self) -> f64 {
        self.se / self.p_hat
    }
}

/// Exit times of `reps` walks run to `horizon`, replication `r` on stream `(seed, r, 0)`.
pub fn exit_times(model: &RVModel, body: &ConvexBody, horizon: u64, reps: u64, seed: u64) -> Vec<Option<u64>> {
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r, 0);
            simulate_survival(model, body, horizon, &mut rng).exit_time
        })
        .collect()
}

/// Survival fractions at every `n` of `n_grid` from one pass per replication.
pub fn direct_mc(model: &RVModel, body: &ConvexBody, n_grid: &[u64], reps: u64, seed: u64) -> Result<Vec<DirectEstimate>> {
    if reps < 100 {
        return Err(Error::config("direct Monte Carlo needs at least 100 replications"));
    }
    if n_grid.is_empty() || n_grid.contains(&0) {
        return Err(Error::config("horizon grid must be non-empty and positive"));
    }
    if model.dimension != body.dimension() {
        return Err(Error::config("model and body dimensions differ"));
    }
    let horizon = *n_grid.iter().max().expect("non-empty");
    let exits = exit_times(model, body, horizon, reps, seed);
    Ok(n_grid
        .iter()
        .map(|&n| {
            let survivors = exits.iter().filter(|e| e.is_none_or(|t| t > n)).count() as u64;
            let p = survivors as f64 / reps as f64;
            DirectEstimate {
                n,
                p_hat: p,
                se: (p * (1.0 - p) / reps as f64).sqrt(),
                survivors,
                reps,
                unestimable: survivors == 0,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{cdf_1d, TailBalance};

    fn model() -> RVModel {
        RVModel::one_dimensional(1.5, 1.0, 0.1, TailBalance::symmetric(1.5)).unwrap()
    }

    #[test]
    fn single_step_survival_matches_cdf() {
        let m = model();
        let body = ConvexBody::interval(1.0, 2.0).unwrap();
        let est = direct_mc(&m, &body, &[1], 200_000, 1).unwrap();
        let p = cdf_1d(&m, 2.0) - cdf_1d(&m, 1.0);
        assert!((est[0].p_hat - p).abs() < 3.0 * est[0].se, "{} vs {p}", est[0].p_hat);
    }

    #[test]
    fn bounded_steps_never_reach_far_interval() {
        // all tail mass on the left: every step is at most 1
        let m = RVModel::one_dimensional(1.5, 1.0, 0.0, TailBalance { p_minus: 1.0, alpha_minus: 2.0 }).unwrap();
        let body = ConvexBody::interval(5.0, 9.0).unwrap();
        let mut rng = stream_rng(3, 0, 0);
        for _ in 0..1000 {
            let out = simulate_survival(&m, &body, 10, &mut rng);
            assert_eq!(out.exit_time, Some(1));
            assert!(!out.alive);
        }
    }

    #[test]
    fn survival_is_monotone_in_n() {
        let body = ConvexBody::interval(1.0, 2.0).unwrap();
        let est = direct_mc(&model(), &body, &[1, 2, 5, 10, 20, 50], 5_000, 8).unwrap();
        for w in est.windows(2) {
            assert!(w[0].p_hat >= w[1].p_hat);
        }
    }

    #[test]
    fn streams_are_worker_independent() {
        let body = ConvexBody::interval(0.5, 3.0).unwrap();
        let a = direct_mc(&model(), &body, &[50], 2_000, 4).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| direct_mc(&model(), &body, &[50], 2_000, 4).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn independent_reimplementation_agrees() {
        // a hand-rolled walk on disjoint seeds
        let m = model();
        let body = ConvexBody::interval(0.5, 3.0).unwrap();
        let est = direct_mc(&m, &body, &[50], 100_000, 11).unwrap()[0].clone();
        let mut hits = 0u64;
        let reps = 100_000u64;
        for r in 0..reps {
            let mut rng = stream_rng(999, r, 7);
            let mut s = 0.0;
            let mut ok = true;
            for k in 1..=50 {
                s += crate::sampler::sample_step_1d(&m, &mut rng);
                let avg = s / k as f64;
                if !(0.5..=3.0).contains(&avg) {
                    ok = false;
                    break;
                }
            }
            hits += ok as u64;
        }
        let p2 = hits as f64 / reps as f64;
        let se2 = (p2 * (1.0 - p2) / reps as f64).sqrt();
        assert!((est.p_hat - p2).abs() < 3.0 * (est.se.powi(2) + se2 * se2).sqrt());
    }

    #[test]
    fn too_few_reps_rejected() {
        let body = ConvexBody::interval(1.0, 2.0).unwrap();
        assert!(direct_mc(&model(), &body, &[5], 99, 0).is_err());
    }
}
