//! Segment boxes of the lower-bound construction and their inclusions.
//!
//! All boxes share the frame of the inner cuboid `■(ε)` with per-axis bounds
//! `β_l^{(j)}, β_u^{(j)}`. With `q = (1−ρ)·r^(ε)`, `m_i = ⌊C1·q^{i−1}⌋`,
//! `g = (1−ρ/2)·q` and the fluctuation width `w_i = m_i^{1/α0+δ}`, every endpoint
//! is computed exactly as written in the construction.

use super::cuboid::Hypercuboid;
use crate::{Error, Result};

/// Parameters of the segment construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentParams {
    pub epsilon: f64,
    pub rho: f64,
    pub delta: f64,
    /// `min(α, 2)`.
    pub alpha0: f64,
    pub c1: f64,
    pub r_epsilon: f64,
    /// `(1 − ρ/2)(1 − ρ) r^(ε)`.
    pub g: f64,
}

impl SegmentParams {
    pub fn new(epsilon: f64, rho: f64, delta: f64, alpha: f64, c1: f64, r_epsilon: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::config("rho must lie in (0, 1)"));
        }
        if !((1.0 - rho).powi(2) * r_epsilon > 1.0) {
            return Err(Error::config("need (1 - rho)^2 r_eps > 1"));
        }
        if !(alpha > 1.0) {
            return Err(Error::config("tail index must exceed 1"));
        }
        let alpha0 = alpha.min(2.0);
        if !(delta > 0.0 && 1.0 / alpha0 + delta < 1.0) {
            return Err(Error::config("need delta > 0 and 1/alpha0 + delta < 1"));
        }
        if !(c1 >= 1.0) {
            return Err(Error::config("C1 must be at least 1"));
        }
        let g = (1.0 - rho / 2.0) * (1.0 - rho) * r_epsilon;
        Ok(SegmentParams { epsilon, rho, delta, alpha0, c1, r_epsilon, g })
    }

    pub fn q(&self) -> f64 {
        (1.0 - self.rho) * self.r_epsilon
    }

    pub fn gamma(&self) -> f64 {
        1.0 / self.alpha0 + self.delta
    }

    /// `m_i` for `i ≥ 1`.
    pub fn m(&self, i: u32) -> f64 {
        (self.c1 * self.q().powi(i as i32 - 1)).floor()
    }

    pub fn width(&self, i: u32) -> f64 {
        self.m(i).powf(self.gamma())
    }
}

/// The boxes attached to level `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSets {
    pub i: u32,
    pub m_i: f64,
    pub square: Hypercuboid,
    pub tilde_square: Hypercuboid,
    pub hat_square: Hypercuboid,
    pub triangle: Hypercuboid,
    pub tilde_triangle: Hypercuboid,
    pub star: Hypercuboid,
    /// Scale-free jump box exactly as written; its axis-1 interval is empty.
    pub tilde_star_verbatim: Hypercuboid,
    /// Same box with `β_l^{(1)}` in the lower axis-1 endpoint.
    pub tilde_star: Hypercuboid,
}

impl SegmentSets {
    /// Boxes whose endpoints must be ordered for level `i` to be valid.
    fn ordered(&self) -> bool {
        [&self.square, &self.tilde_square, &self.hat_square, &self.triangle, &self.tilde_triangle, &self.star]
            .iter()
            .all(|c| c.is_ordered())
    }
}

fn make(frame: &[Vec<f64>], axis1: (f64, f64), rest: impl Fn(usize) -> (f64, f64)) -> Hypercuboid {
    let d = frame.len();
    let mut lo = vec![axis1.0];
    let mut hi = vec![axis1.1];
    for j in 1..d {
        let (l, h) = rest(j);
        lo.push(l);
        hi.push(h);
    }
    Hypercuboid { frame: frame.to_vec(), lo, hi }
}

fn raw_sets(i: u32, p: &SegmentParams, base: &Hypercuboid) -> SegmentSets {
    let (bl, bu) = (&base.lo, &base.hi);
    let q = p.q();
    let (m0, m1, m2) = (p.m(i - 1), p.m(i), p.m(i + 1));
    let (w, w_next) = (p.width(i), p.width(i + 1));
    let g0 = (p.g * m0).floor();
    let g1 = (p.g * m1).floor();
    let half = 1.0 - p.rho / 2.0;
    let f = &base.frame;
    let square = make(f, (bl[0] * q * m1 + 10.0 * w, half * bu[0] * m1), |j| {
        (2.0 / 3.0 * bl[j] * g0, 2.0 / 3.0 * bu[j] * g0)
    });
    let tilde_square = make(f, (bl[0] * q * m1 + 9.0 * w, half * bu[0] * m1 + w), |j| {
        (2.0 / 3.0 * bl[j] * g0 - w, 2.0 / 3.0 * bu[j] * g0 + w)
    });
    let hat_square = make(f, (bl[0] * q * m1 + 8.0 * w, half * bu[0] * m2 - w), |j| {
        (2.0 / 3.0 * bl[j] * g0 - 2.0 * w, 2.0 / 3.0 * bu[j] * g1 - w)
    });
    let triangle = make(f, (-w, half * bu[0] * (m2 - m1) - 2.0 * w), |j| (-w, 2.0 / 3.0 * bu[j] * (g1 - g0) - 2.0 * w));
    let tilde_triangle = make(f, (bl[0] * q * (m2 - m1) + 10.0 * w - 9.0 * w, half * bu[0] * (m2 - m1) - w), |j| {
        (2.0 / 3.0 * bl[j] * (g1 - g0) + w, 2.0 / 3.0 * bu[j] * (g1 - g0) - w)
    });
    let star = make(f, (bl[0] * q * (m2 - m1) + 10.0 * w_next - 8.0 * w, half * bu[0] * (m2 - m1) - 3.0 * w), |j| {
        (2.0 / 3.0 * bl[j] * (g1 - g0) - 2.0 * w, 2.0 / 3.0 * bu[j] * (g1 - g0) - 3.0 * w)
    });
    let s = p.g * (1.0 - 1.0 / q);
    let cross = |j: usize| (0.5 * bl[j] * s, 2.0 / 3.0 * bu[j] * s);
    let upper1 = bu[0] * (1.0 - 2.0 * p.rho / 3.0) * (q - 1.0);
    let tilde_star_verbatim = make(f, (bu[0] * (1.0 - 5.0 * p.rho / 6.0) * p.r_epsilon * (q - 1.0), upper1), cross);
    let tilde_star = make(f, (bl[0] * (1.0 - 5.0 * p.rho / 6.0) * p.r_epsilon * (q - 1.0), upper1), cross);
    SegmentSets {
        i,
        m_i: m1,
        square,
        tilde_square,
        hat_square,
        triangle,
        tilde_triangle,
        star,
        tilde_star_verbatim,
        tilde_star,
    }
}

/// Largest level index searched for thresholds.
pub const MAX_LEVEL: u32 = 2_000;

/// Boxes for level `i ≥ 2`; errors with the smallest valid level when an endpoint
/// pair is inverted.
pub fn build_segment_sets(i: u32, params: &SegmentParams, base: &Hypercuboid) -> Result<SegmentSets> {
    if i < 2 {
        return Err(Error::config("level index must be at least 2"));
    }
    let sets = raw_sets(i, params, base);
    if sets.ordered() {
        return Ok(sets);
    }
    let valid = (i + 1..MAX_LEVEL).find(|&k| params.m(k + 1).is_finite() && raw_sets(k, params, base).ordered());
    Err(Error::domain(match valid {
        Some(k) => format!("segment endpoints inverted at level {i}; smallest valid level is {k}"),
        None => format!("segment endpoints inverted at level {i} and at every level up to {MAX_LEVEL}"),
    }))
}

/// `∩_{j = first}^{last} j∘■`, computed from the two extreme scalings per axis.
pub fn scaled_intersection(base: &Hypercuboid, first: f64, last: f64) -> Hypercuboid {
    Hypercuboid {
        frame: base.frame.clone(),
        lo: base.lo.iter().map(|l| (first * l).max(last * l)).collect(),
        hi: base.hi.iter().map(|h| (first * h).min(last * h)).collect(),
    }
}

/// Inclusion margins at one level (negative means the inclusion fails).
#[derive(Debug, Clone, PartialEq)]
pub struct InclusionRow {
    pub i: u32,
    pub m_i: f64,
    /// `□_i ⊆ m_i∘■`.
    pub square_margin: f64,
    /// `□̃_i ⊆ ∩_{j=m_i+1}^{⌊g m_i⌋} j∘■`.
    pub tilde_margin: f64,
    /// `□̂_i ⊆ ∩_{j=⌊g m_i⌋+1}^{m_{i+1}−1} j∘■`.
    pub hat_margin: f64,
    /// `m_i∘■̃_* ⊆ ■_*` with the corrected `■̃_*`.
    pub star_margin: f64,
    /// Both interval-scaling inclusions hold.
    pub pass: bool,
}

pub fn inclusion_row(i: u32, params: &SegmentParams, base: &Hypercuboid) -> Result<InclusionRow> {
    let s = build_segment_sets(i, params, base)?;
    let (m1, m2) = (params.m(i), params.m(i + 1));
    let g1 = (params.g * m1).floor();
    let tilde_margin = s.tilde_square.inclusion_margin(&scaled_intersection(base, m1 + 1.0, g1));
    let hat_margin = s.hat_square.inclusion_margin(&scaled_intersection(base, g1 + 1.0, m2 - 1.0));
    Ok(InclusionRow {
        i,
        m_i: m1,
        square_margin: s.square.inclusion_margin(&base.scaled(m1)),
        tilde_margin,
        hat_margin,
        star_margin: s.tilde_star.scaled(m1).inclusion_margin(&s.star),
        pass: tilde_margin >= 0.0 && hat_margin >= 0.0,
    })
}

/// Inclusion rows for `i ∈ levels`.
pub fn check_lemma_inclusions(
    levels: impl IntoIterator<Item = u32>,
    params: &SegmentParams,
    base: &Hypercuboid,
) -> Result<Vec<InclusionRow>> {
    levels.into_iter().map(|i| inclusion_row(i, params, base)).collect()
}

/// First level at which all endpoints are ordered and both inclusions pass.
pub fn inclusion_threshold(params: &SegmentParams, base: &Hypercuboid) -> Option<u32> {
    (2..MAX_LEVEL)
        .take_while(|&i| params.m(i + 1).is_finite())
        .find(|&i| inclusion_row(i, params, base).is_ok_and(|r| r.pass))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::cuboid::build_inner_cuboid;
    use crate::geometry::ConvexBody;

    fn ball_setup() -> (SegmentParams, Hypercuboid) {
        let ball = ConvexBody::ball(vec![3.0, 0.0], 1.0).unwrap();
        let inner = build_inner_cuboid(&ball, &[1.0, 0.0], 0.1).unwrap();
        let p = SegmentParams::new(0.1, 0.05, 0.1, 1.5, 4.0, inner.r_epsilon).unwrap();
        (p, inner.cuboid)
    }

    #[test]
    fn extremes_give_the_intersection() {
        let base = Hypercuboid { frame: vec![vec![1.0, 0.0], vec![0.0, 1.0]], lo: vec![2.0, -0.3], hi: vec![3.5, 0.2] };
        let (first, last) = (7.0, 19.0);
        let got = scaled_intersection(&base, first, last);
        let mut lo = vec![f64::NEG_INFINITY; 2];
        let mut hi = vec![f64::INFINITY; 2];
        for j in 7..=19 {
            for a in 0..2 {
                lo[a] = lo[a].max(j as f64 * base.lo[a]);
                hi[a] = hi[a].min(j as f64 * base.hi[a]);
            }
        }
        assert_eq!(got.lo, lo);
        assert_eq!(got.hi, hi);
    }

    #[test]
    fn small_levels_report_first_valid_level() {
        let (p, base) = ball_setup();
        match build_segment_sets(2, &p, &base) {
            Err(Error::Domain(msg)) => assert!(msg.contains("smallest valid level")),
            other => panic!("expected inversion, got {other:?}"),
        }
    }

    #[test]
    fn verbatim_jump_box_is_empty() {
        let (p, base) = ball_setup();
        let t = inclusion_threshold(&p, &base).unwrap();
        let s = build_segment_sets(t, &p, &base).unwrap();
        assert!(!s.tilde_star_verbatim.is_ordered());
        assert!(s.tilde_star.is_ordered());
    }

    #[test]
    fn ball_inclusions_hold_past_threshold() {
        let (p, base) = ball_setup();
        let t = inclusion_threshold(&p, &base).unwrap();
        let rows = check_lemma_inclusions(t..t + 30, &p, &base).unwrap();
        assert!(rows.iter().all(|r| r.pass && r.square_margin >= 0.0));
    }

    #[test]
    fn tilde_and_hat_share_axis_one_range() {
        let (p, base) = ball_setup();
        let t = inclusion_threshold(&p, &base).unwrap();
        let s = build_segment_sets(t + 10, &p, &base).unwrap();
        let lo = s.tilde_square.lo[0].max(s.hat_square.lo[0]);
        let hi = s.tilde_square.hi[0].min(s.hat_square.hi[0]);
        assert!(lo < hi);
    }

    #[test]
    fn parameter_validation() {
        assert!(SegmentParams::new(0.1, 0.3, 0.1, 1.5, 4.0, 1.9).is_err());
        assert!(SegmentParams::new(0.1, 0.05, 0.4, 1.5, 4.0, 1.9).is_err());
        let p = SegmentParams::new(0.1, 0.05, 0.1, 3.0, 4.0, 1.9).unwrap();
        assert_eq!(p.alpha0, 2.0);
        assert!(p.g > 1.0 && p.g < p.q());
    }
}
