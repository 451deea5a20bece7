//! Fixed-effort multilevel splitting over time checkpoints.

use rand::Rng;
use rayon::prelude::*;

use super::{advance, LevelSchedule};
use crate::geometry::ConvexBody;
use crate::rng::{derive_seed, stream_rng};
use crate::sampler::RVModel;
use crate::{Error, Result};

const MACRO_TAG: u64 = 0x5350_4c49_5400_0001;

/// Seed of macro-replication `m`; particle `p` of stage `j` uses stream
/// `(macro_seed, p, j)` and the resampling of stage `j` uses `(macro_seed, u64::MAX, j)`.
pub fn macro_seed(seed: u64, m: u64) -> u64 {
    derive_seed(seed, m, MACRO_TAG)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplittingOptions {
    /// Particles per stage.
    pub effort: usize,
    /// Independent macro-replications.
    pub macros: usize,
    /// Extra stage boundaries merged with the schedule levels.
    pub checkpoints: Vec<u64>,
    /// First time at which membership is tested.
    pub constraint_start: u64,
}

impl SplittingOptions {
    pub fn new(effort: usize) -> Self {
        SplittingOptions { effort, macros: 10, checkpoints: Vec::new(), constraint_start: 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplittingResult {
    pub n: u64,
    pub schedule: LevelSchedule,
    /// Stage end times, increasing, last one `n`.
    pub stage_ends: Vec<u64>,
    /// Survivors over particles started, pooled across macros.
    pub per_level_fraction: Vec<f64>,
    /// Pooled survivor counts per stage.
    pub survivors: Vec<u64>,
    pub estimate: f64,
    pub log_estimate: f64,
    /// Standard deviation of macro log-estimates over `sqrt(macros)`.
    pub std_error_log: f64,
    pub effort: usize,
    pub macros: usize,
    pub seed: u64,
    /// First stage (0-based) with no survivors in any macro.
    pub extinct_at: Option<usize>,
    /// Cumulative log-survival of each macro at each stage end.
    pub macro_log_curves: Vec<Vec<f64>>,
}

impl SplittingResult {
    /// `(t, log P̂_t, se)` at every stage end.
    pub fn log_curve(&self) -> Vec<(u64, f64, f64)> {
        let mut acc = 0.0;
        self.stage_ends
            .iter()
            .enumerate()
            .map(|(j, &t)| {
                acc += self.per_level_fraction[j].ln();
                (t, acc, self.se_at(j))
            })
            .collect()
    }

    fn se_at(&self, j: usize) -> f64 {
        let vals: Vec<f64> = self.macro_log_curves.iter().map(|c| c[j]).filter(|v| v.is_finite()).collect();
        if vals.len() < 2 {
            return f64::NAN;
        }
        let m = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / m;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
        (var / m).sqrt()
    }

    /// Cumulative `(log P̂_t, se)` at stage end `t`.
    pub fn log_at(&self, t: u64) -> Option<(f64, f64)> {
        self.log_curve().into_iter().find(|c| c.0 == t).map(|c| (c.1, c.2))
    }
}

struct MacroRun {
    survivors: Vec<u64>,
    started: Vec<u64>,
}

fn run_macro(
    model: &RVModel,
    body: &ConvexBody,
    stage_ends: &[u64],
    effort: usize,
    check_from: u64,
    seed: u64,
) -> MacroRun {
    let d = model.dimension;
    let mut states = vec![0.0; effort * d];
    let mut k = 0u64;
    let mut survivors = Vec::with_capacity(stage_ends.len());
    let mut started = Vec::with_capacity(stage_ends.len());
    for (j, &end) in stage_ends.iter().enumerate() {
        let alive: Vec<bool> = states
            .par_chunks_mut(d)
            .enumerate()
            .map(|(p, s)| {
                let mut rng = stream_rng(seed, p as u64, j as u64);
                let mut step = vec![0.0; d];
                let mut kk = k;
                advance(model, body, s, &mut kk, end, check_from, &mut rng, &mut step).is_none()
            })
            .collect();
        k = end;
        let live: Vec<usize> = (0..effort).filter(|&p| alive[p]).collect();
        started.push(effort as u64);
        survivors.push(live.len() as u64);
        if live.is_empty() {
            for _ in j + 1..stage_ends.len() {
                started.push(0);
                survivors.push(0);
            }
            break;
        }
        if j + 1 < stage_ends.len() {
            let mut rng = stream_rng(seed, u64::MAX, j as u64);
            let mut next = vec![0.0; effort * d];
            for row in next.chunks_mut(d) {
                let pick = live[rng.random_range(0..live.len())];
                row.copy_from_slice(&states[pick * d..(pick + 1) * d]);
            }
            states = next;
        }
    }
    MacroRun { survivors, started }
}

/// Fixed-effort splitting estimate of the survival probability to `schedule.horizon`.
pub fn splitting_estimate(
    model: &RVModel,
    body: &ConvexBody,
    schedule: &LevelSchedule,
    options: &SplittingOptions,
    seed: u64,
) -> Result<SplittingResult> {
    let n = schedule.horizon;
    if options.effort < 100 {
        return Err(Error::config("splitting needs an effort of at least 100 particles"));
    }
    if options.macros == 0 {
        return Err(Error::config("need at least one macro-replication"));
    }
    if model.dimension != body.dimension() {
        return Err(Error::config("model and body dimensions differ"));
    }
    let mut stage_ends: Vec<u64> = schedule
        .levels
        .iter()
        .chain(&options.checkpoints)
        .copied()
        .filter(|&t| t >= 1 && t <= n)
        .chain(std::iter::once(n))
        .collect();
    stage_ends.sort_unstable();
    stage_ends.dedup();

    let runs: Vec<MacroRun> = (0..options.macros as u64)
        .map(|m| run_macro(model, body, &stage_ends, options.effort, options.constraint_start.max(1), macro_seed(seed, m)))
        .collect();

    let stages = stage_ends.len();
    let mut survivors = vec![0u64; stages];
    let mut started = vec![0u64; stages];
    for run in &runs {
        for j in 0..stages {
            survivors[j] += run.survivors[j];
            started[j] += run.started[j];
        }
    }
    let extinct_at = survivors.iter().position(|&s| s == 0);
    let per_level_fraction: Vec<f64> = survivors
        .iter()
        .zip(&started)
        .map(|(&s, &t)| if t == 0 { 0.0 } else { s as f64 / t as f64 })
        .collect();
    let log_estimate: f64 = per_level_fraction.iter().map(|f| f.ln()).sum();
    let macro_log_curves: Vec<Vec<f64>> = runs
        .iter()
        .map(|run| {
            let mut acc = 0.0;
            run.survivors
                .iter()
                .zip(&run.started)
                .map(|(&s, &t)| {
                    acc += if t == 0 { f64::NEG_INFINITY } else { (s as f64 / t as f64).ln() };
                    acc
                })
                .collect()
        })
        .collect();
    let mut result = SplittingResult {
        n,
        schedule: schedule.clone(),
        stage_ends,
        per_level_fraction,
        survivors,
        estimate: log_estimate.exp(),
        log_estimate,
        std_error_log: f64::NAN,
        effort: options.effort,
        macros: options.macros,
        seed,
        extinct_at,
        macro_log_curves,
    };
    result.std_error_log = result.se_at(stages - 1);
    Ok(result)
}

/// OLS slope of `log(passage fraction)` on `log u_i` between consecutive schedule
/// levels, over levels with index `≥ from_level`.
pub fn level_passage_slope(result: &SplittingResult, from_level: usize) -> Result<f64> {
    let curve = result.log_curve();
    let at = |t: u64| curve.iter().find(|c| c.0 == t).map(|c| c.1);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for w in result.schedule.levels.windows(2).skip(from_level) {
        if let (Some(a), Some(b)) = (at(w[0]), at(w[1])) {
            if (b - a).is_finite() {
                xs.push((w[0] as f64).ln());
                ys.push(b - a);
            }
        }
    }
    if xs.len() < 2 {
        return Err(Error::Estimation("need at least two level passages".into()));
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}
