//! Gaps between consecutive dilations along the upper checkpoints.

use crate::geometry::{set_distance, ConvexBody};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceRow {
    pub i: u32,
    pub u_i: f64,
    pub u_next: f64,
    /// `dist(u_i∘A, u_{i+1}∘A) / u_i`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceClaim {
    pub rows: Vec<DistanceRow>,
    /// First level from which every ratio is positive.
    pub threshold: Option<u32>,
    /// Smallest ratio from the threshold on (zero without a threshold).
    pub infimum: f64,
    /// Relative spread of the last ten ratios is below 1%.
    pub converged: bool,
    pub pass: bool,
}

/// Follows `u_1 = c1`, `u_{i+1} = ⌊(1+η)·r·u_i⌋` and measures the gap at each
/// `i ∈ [first, last]`.
pub fn check_distance_claim(body: &ConvexBody, r: f64, eta: f64, c1: f64, first: u32, last: u32) -> Result<DistanceClaim> {
    if !(eta >= 0.0 && (1.0 + eta) * r > 1.0) || c1 < 1.0 || first == 0 || last < first {
        return Err(Error::config("need (1+eta) r > 1, c1 >= 1 and 1 <= first <= last"));
    }
    let mut u = c1;
    let mut rows = Vec::new();
    for i in 1..=last {
        let next = ((1.0 + eta) * r * u).floor();
        if next <= u {
            return Err(Error::config(format!("checkpoints stall at {u}")));
        }
        if i >= first {
            let d = set_distance(body, next / u, 10_000).distance;
            rows.push(DistanceRow { i, u_i: u, u_next: next, ratio: d });
        }
        u = next;
    }
    let positive = |r: &DistanceRow| r.ratio > 1e-9;
    let start = rows.iter().rposition(|r| !positive(r)).map_or(0, |p| p + 1);
    let threshold = rows.get(start).map(|r| r.i);
    let infimum = rows[start..].iter().map(|r| r.ratio).reduce(f64::min).unwrap_or(0.0);
    let tail: Vec<f64> = rows.iter().rev().take(10).map(|r| r.ratio).collect();
    let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let converged = hi - lo <= 0.01 * hi.abs().max(1e-12);
    Ok(DistanceClaim { rows, threshold, infimum, converged, pass: threshold.is_some() && converged })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_ratio_tends_to_gap() {
        let body = ConvexBody::interval(1.0, 2.0).unwrap();
        let c = check_distance_claim(&body, 2.0, 0.1, 3.0, 1, 30).unwrap();
        for row in &c.rows {
            let exact = (row.u_next - 2.0 * row.u_i) / row.u_i;
            assert!((row.ratio - exact).abs() < 1e-9);
            assert!(row.u_next - 2.0 * row.u_i >= 0.2 * row.u_i - 2.2);
        }
        assert!((c.rows.last().unwrap().ratio - 0.2).abs() < 1e-6);
        assert!(c.pass);
    }

    #[test]
    fn ball_ratio_is_positive() {
        let ball = ConvexBody::ball(vec![3.0, 0.0], 1.0).unwrap();
        let c = check_distance_claim(&ball, 2.0, 0.1, 4.0, 5, 25).unwrap();
        assert!(c.pass, "{c:?}");
    }

    #[test]
    fn critical_ratio_closes_the_gap() {
        let body = ConvexBody::interval(1.0, 2.0).unwrap();
        let c = check_distance_claim(&body, 2.0 * (1.0 - 1e-6), 0.0, 10.0, 1, 8).unwrap();
        assert!(c.infimum < 1e-9);
        assert!(!c.pass);
    }
}
