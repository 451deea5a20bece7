//! Plateau-and-jump skeleton of the most likely surviving path in one dimension.
//!
//! Starting at height `b·c1` at time `c1`, the path stays flat at height `h` until
//! `t' = ⌊h/a⌋`, the last time with `a·t ≤ h`, then jumps at `T = t' + 1` to the
//! upper envelope `b·T`.

use crate::{Error, Result};

/// Jump times, sizes and plateau heights up to a horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalPathSkeleton {
    pub a: f64,
    pub b: f64,
    pub c1: u64,
    pub horizon: u64,
    /// `T_1 < T_2 < …`, all `≤ horizon`.
    pub jump_times: Vec<u64>,
    pub jump_sizes: Vec<f64>,
    /// `H_0 = b·c1`, then the height after each jump.
    pub plateau_heights: Vec<f64>,
    pub k_n: usize,
}

impl OptimalPathSkeleton {
    /// Height at time `k ≥ c1`.
    pub fn height(&self, k: u64) -> f64 {
        let i = self.jump_times.partition_point(|&t| t <= k);
        self.plateau_heights[i]
    }

    /// `(k, height)` on roughly `points` log-spaced times in `[c1, horizon]`, plus every
    /// jump time and the time just before it.
    pub fn log_sampled(&self, points: usize) -> Vec<(u64, f64)> {
        let (lo, hi) = (self.c1 as f64, self.horizon as f64);
        let mut ks: Vec<u64> = (0..points.max(2))
            .map(|i| (lo * (hi / lo).powf(i as f64 / (points.max(2) - 1) as f64)).round() as u64)
            .chain(self.jump_times.iter().flat_map(|&t| [t - 1, t]))
            .filter(|&k| k >= self.c1 && k <= self.horizon)
            .collect();
        ks.sort_unstable();
        ks.dedup();
        ks.into_iter().map(|k| (k, self.height(k))).collect()
    }

    /// First `k` in `ks` with `height(k) ∉ [a·k, b·k]`.
    pub fn envelope_violation(&self, ks: impl IntoIterator<Item = u64>) -> Option<u64> {
        ks.into_iter().find(|&k| {
            let h = self.height(k);
            let kf = k as f64;
            h < self.a * kf || h > self.b * kf
        })
    }
}

/// Largest admissible horizon for envelope slope `b`.
pub fn horizon_cap(b: f64) -> u64 {
    ((1u64 << 62) as f64 / b.max(1.0)) as u64
}

pub fn build_skeleton(a: f64, b: f64, c1: u64, n: u64) -> Result<OptimalPathSkeleton> {
    if !(a > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::config("envelope needs 0 < a < b"));
    }
    if !(b > a) {
        return Err(Error::Degenerate(format!("b = {b} must exceed a = {a}")));
    }
    if c1 == 0 || n <= c1 {
        return Err(Error::config("need c1 >= 1 and n > c1"));
    }
    if n > horizon_cap(b) {
        return Err(Error::config(format!("horizon exceeds the cap {}", horizon_cap(b))));
    }
    let mut h = b * c1 as f64;
    let mut plateau_heights = vec![h];
    let mut jump_times = Vec::new();
    let mut jump_sizes = Vec::new();
    loop {
        let t = (h / a).floor() as u64 + 1;
        if t > n {
            break;
        }
        let next = b * t as f64;
        jump_times.push(t);
        jump_sizes.push(next - h);
        plateau_heights.push(next);
        h = next;
    }
    let k_n = jump_times.len();
    Ok(OptimalPathSkeleton { a, b, c1, horizon: n, jump_times, jump_sizes, plateau_heights, k_n })
}

/// Atoms `(T_i, J_i)` of the jump measure.
pub fn skeleton_as_measure(skel: &OptimalPathSkeleton) -> Vec<(u64, f64)> {
    skel.jump_times.iter().copied().zip(skel.jump_sizes.iter().copied()).collect()
}

/// `Σ_{i ≤ k_n} (1 − α)·i·log(b/a)`.
pub fn cost_heuristic(skel: &OptimalPathSkeleton, alpha: f64) -> Result<f64> {
    if !(alpha > 1.0) {
        return Err(Error::config("tail index must exceed 1"));
    }
    let k = skel.k_n as f64;
    Ok((1.0 - alpha) * (skel.b / skel.a).ln() * k * (k + 1.0) / 2.0)
}

/// Integer version of the recursion for integral `a < b`: `(T_i, height after T_i)`.
pub fn integer_jumps(a: u64, b: u64, c1: u64, n: u64) -> Vec<(u64, u64)> {
    let mut h = b as u128 * c1 as u128;
    let mut out = Vec::new();
    loop {
        let t = h / a as u128 + 1;
        if t > n as u128 {
            return out;
        }
        h = b as u128 * t;
        out.push((t as u64, h as u64));
    }
}
