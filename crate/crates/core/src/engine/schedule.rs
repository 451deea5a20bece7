//! Geometric time checkpoints.

use crate::{Error, Result};

/// Recursion used to build the checkpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleKind {
    /// `u_1 = c1`, `u_{i+1} = ⌊(1+η)·r·u_i⌋`, kept while `u_i ≤ n`.
    Upper { eta: f64 },
    /// `m_i = ⌊c1·((1−ρ)·r)^{i−1}⌋` up to the first index with `m_i ≥ n`.
    Lower { rho: f64 },
    /// `t_1 = c1`, `t_{i+1} = max(t_i + 1, ⌊r·t_i⌋)`, kept while `t_i ≤ n`.
    Geometric,
}

/// Increasing checkpoint times for a horizon `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSchedule {
    pub kind: ScheduleKind,
    pub c1: u64,
    pub r_ref: f64,
    pub horizon: u64,
    pub levels: Vec<u64>,
}

impl LevelSchedule {
    /// `λ_n` for upper schedules (largest index with `u_i ≤ n`) or `κ_n` for
    /// lower ones (smallest index with `m_i ≥ n`), 1-based.
    pub fn cutoff(&self) -> usize {
        self.levels.len()
    }

    /// Single checkpoint at `n`.
    pub fn single(n: u64) -> Self {
        LevelSchedule { kind: ScheduleKind::Geometric, c1: n, r_ref: 1.0, horizon: n, levels: vec![n] }
    }
}

/// Smallest admissible `c1` bound for an upper schedule: `2 + 1/((1+η)r − 1)`.
pub fn upper_c1_bound(r_ref: f64, eta: f64) -> f64 {
    2.0 + 1.0 / ((1.0 + eta) * r_ref - 1.0)
}

pub fn make_schedule(kind: ScheduleKind, r_ref: f64, c1: u64, n: u64) -> Result<LevelSchedule> {
    if !(r_ref.is_finite() && r_ref > 1.0) {
        return Err(Error::config("reference ratio must exceed 1"));
    }
    if n == 0 || c1 == 0 {
        return Err(Error::config("horizon and c1 must be positive"));
    }
    let levels = match kind {
        ScheduleKind::Upper { eta } => {
            if !(eta > 0.0) {
                return Err(Error::config("eta must be positive"));
            }
            let bound = upper_c1_bound(r_ref, eta);
            if !(c1 as f64 > bound) {
                return Err(Error::config(format!("c1 = {c1} must exceed 2 + 1/((1+eta) r - 1) = {bound}")));
            }
            grow(c1, n, |u| ((1.0 + eta) * r_ref * u as f64).floor() as u64)?
        }
        ScheduleKind::Geometric => grow(c1, n, |u| ((r_ref * u as f64).floor() as u64).max(u + 1))?,
        ScheduleKind::Lower { rho } => {
            if !(rho > 0.0 && rho < 1.0) {
                return Err(Error::config("rho must lie in (0, 1)"));
            }
            if !((1.0 - rho).powi(2) * r_ref > 1.0) {
                return Err(Error::config(format!("(1 - rho)^2 r = {} must exceed 1", (1.0 - rho).powi(2) * r_ref)));
            }
            let q = (1.0 - rho) * r_ref;
            let mut levels = Vec::new();
            for i in 0.. {
                let m = lower_level(c1, q, i);
                if levels.last().is_some_and(|&last| m < last) {
                    return Err(Error::config("lower schedule overflowed"));
                }
                levels.push(m);
                if m >= n {
                    break;
                }
            }
            levels
        }
    };
    Ok(LevelSchedule { kind, c1, r_ref, horizon: n, levels })
}

/// `⌊c1·q^i⌋`, saturating at `u64::MAX`.
pub fn lower_level(c1: u64, q: f64, i: i32) -> u64 {
    let v = (c1 as f64 * q.powi(i)).floor();
    if v >= u64::MAX as f64 {
        u64::MAX
    } else {
        v as u64
    }
}

fn grow(c1: u64, n: u64, next: impl Fn(u64) -> u64) -> Result<Vec<u64>> {
    let mut levels = Vec::new();
    let mut u = c1;
    while u <= n {
        levels.push(u);
        let v = next(u);
        if v <= u {
            return Err(Error::config(format!("schedule stalls at {u}")));
        }
        u = v;
    }
    Ok(levels)
}
