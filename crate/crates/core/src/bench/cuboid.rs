//! Boxes aligned with an orthonormal frame and the inner box of a body around `φ*`.

use crate::geometry::ConvexBody;
use crate::linalg::{dot, norm, orthonormal_frame};
use crate::{Error, Result};

/// `{x : ⟨x, e_j⟩ ∈ [lo_j, hi_j] for all j}` for an orthonormal frame `e`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypercuboid {
    pub frame: Vec<Vec<f64>>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Hypercuboid {
    pub fn dimension(&self) -> usize {
        self.frame.len()
    }

    pub fn coordinates(&self, x: &[f64]) -> Vec<f64> {
        self.frame.iter().map(|e| dot(e, x)).collect()
    }

    pub fn point(&self, coords: &[f64]) -> Vec<f64> {
        let d = self.dimension();
        let mut x = vec![0.0; d];
        for (e, c) in self.frame.iter().zip(coords) {
            for (xi, ei) in x.iter_mut().zip(e) {
                *xi += c * ei;
            }
        }
        x
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.coordinates(x)
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(c, (l, h))| l <= c && c <= h)
    }

    pub fn is_ordered(&self) -> bool {
        self.lo.iter().zip(&self.hi).all(|(l, h)| l <= h)
    }

    /// All `2^d` corners.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let d = self.dimension();
        (0..1usize << d)
            .map(|mask| {
                let coords: Vec<f64> =
                    (0..d).map(|j| if mask >> j & 1 == 1 { self.hi[j] } else { self.lo[j] }).collect();
                self.point(&coords)
            })
            .collect()
    }

    /// Same frame, intervals multiplied by `s > 0`.
    pub fn scaled(&self, s: f64) -> Hypercuboid {
        Hypercuboid {
            frame: self.frame.clone(),
            lo: self.lo.iter().map(|v| v * s).collect(),
            hi: self.hi.iter().map(|v| v * s).collect(),
        }
    }

    /// Smallest per-axis slack of `self ⊆ outer` (same frame); negative when not contained.
    pub fn inclusion_margin(&self, outer: &Hypercuboid) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(outer.lo.iter().zip(&outer.hi))
            .map(|((l, h), (ol, oh))| (l - ol).min(oh - h))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Inner box of `A` inside the cone of half-angle `2·asin(ε/2)` around `φ*`.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerCuboid {
    pub cuboid: Hypercuboid,
    pub epsilon: f64,
    /// `hi_1 / lo_1`.
    pub r_epsilon: f64,
}

/// Builds the inner box: cross-section half-width `w = L_φ*·tan θ / sqrt(d−1)`,
/// halved until some slab fits, then the axis-1 extent by bisection so that every
/// corner lies in `A` and in the cone.
pub fn build_inner_cuboid(body: &ConvexBody, phi_star: &[f64], epsilon: f64) -> Result<InnerCuboid> {
    let d = body.dimension();
    if phi_star.len() != d || (norm(phi_star) - 1.0).abs() > 1e-9 {
        return Err(Error::config("phi_star must be a unit vector of the body's dimension"));
    }
    if !(epsilon > 0.0 && epsilon < 2.0) {
        return Err(Error::config("epsilon must lie in (0, 2)"));
    }
    let theta = 2.0 * (epsilon / 2.0).asin();
    if theta >= std::f64::consts::FRAC_PI_2 {
        return Err(Error::domain("cone is too wide"));
    }
    let frame = orthonormal_frame(phi_star);
    check_cap(body, &frame, theta)?;
    let tol = 1e-12;
    let axis = body
        .radial_bounds(phi_star, tol)?
        .ok_or_else(|| Error::domain("phi_star does not meet the body"))?;

    if d == 1 {
        let cuboid = Hypercuboid { frame, lo: vec![axis.lower], hi: vec![axis.upper] };
        return Ok(InnerCuboid { cuboid, epsilon, r_epsilon: axis.upper / axis.lower });
    }

    let spread = ((d - 1) as f64).sqrt();
    let mut w = axis.lower * theta.tan() / spread;
    for _ in 0..60 {
        if let Some((lo1, hi1)) = slab_range(body, &frame, w, spread / theta.tan(), axis.upper, tol) {
            let mut lo = vec![-w; d];
            let mut hi = vec![w; d];
            lo[0] = lo1;
            hi[0] = hi1;
            let cuboid = Hypercuboid { frame, lo, hi };
            return Ok(InnerCuboid { cuboid, epsilon, r_epsilon: hi1 / lo1 });
        }
        w *= 0.5;
    }
    Err(Error::domain("no box fits in the cone"))
}

// Every direction at angle θ from φ* must meet the body.
fn check_cap(body: &ConvexBody, frame: &[Vec<f64>], theta: f64) -> Result<()> {
    let d = frame.len();
    if d == 1 {
        return Ok(());
    }
    let rim = 64;
    for k in 0..rim {
        // rotate within the plane of e_1 and a unit combination of e_2.. e_d
        let t = 2.0 * std::f64::consts::PI * k as f64 / rim as f64;
        let mut perp = vec![0.0; d];
        for (j, e) in frame.iter().enumerate().skip(1) {
            let c = match (j, d) {
                (_, 2) => if k % 2 == 0 { 1.0 } else { -1.0 },
                (1, _) => t.cos(),
                (2, _) => t.sin(),
                _ => 0.0,
            };
            for (pi, ei) in perp.iter_mut().zip(e) {
                *pi += c * ei;
            }
        }
        let dir: Vec<f64> = frame[0].iter().zip(&perp).map(|(a, p)| theta.cos() * a + theta.sin() * p).collect();
        if body.radial_bounds(&dir, 1e-10)?.is_none() {
            return Err(Error::domain("epsilon too large: cone cap leaves the directions that meet the body"));
        }
        if d == 2 && k >= 1 {
            break;
        }
    }
    Ok(())
}

// Range of axis positions t for which all corners of the cross-section at t lie in
// the body, with t ≥ cone_factor·w so the corners stay inside the cone.
fn slab_range(
    body: &ConvexBody,
    frame: &[Vec<f64>],
    w: f64,
    cone_factor: f64,
    t_max: f64,
    tol: f64,
) -> Option<(f64, f64)> {
    let d = frame.len();
    let t_min = cone_factor * w;
    let worst = |t: f64| -> f64 {
        (0..1usize << (d - 1))
            .map(|mask| {
                let mut x: Vec<f64> = frame[0].iter().map(|e| t * e).collect();
                for j in 1..d {
                    let c = if mask >> (j - 1) & 1 == 1 { w } else { -w };
                    for (xi, ei) in x.iter_mut().zip(&frame[j]) {
                        *xi += c * ei;
                    }
                }
                body.h_value(&x)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };
    // golden section for a feasible t
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (t_min, t_max);
    let mut c = b - g * (b - a);
    let mut e = a + g * (b - a);
    let (mut fc, mut fe) = (worst(c), worst(e));
    let inside = loop {
        if fc <= 0.0 {
            break c;
        }
        if fe <= 0.0 {
            break e;
        }
        if b - a < tol {
            return None;
        }
        if fc < fe {
            b = e;
            e = c;
            fe = fc;
            c = b - g * (b - a);
            fc = worst(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + g * (b - a);
            fe = worst(e);
        }
    };
    let lower = if worst(t_min) <= 0.0 { t_min } else { bisect(&worst, t_min, inside, tol) };
    let upper = bisect(&worst, t_max * (1.0 + 1e-9) + tol, inside, tol);
    Some((lower, upper))
}

fn bisect(f: &impl Fn(f64) -> f64, mut outside: f64, mut inside: f64, tol: f64) -> f64 {
    while (outside - inside).abs() > tol {
        let mid = 0.5 * (outside + inside);
        if f(mid) <= 0.0 {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::r_star;
    use std::f64::consts::SQRT_2;

    #[test]
    fn ball_ratios_increase_towards_r_star() {
        let ball = ConvexBody::ball(vec![3.0, 0.0], 1.0).unwrap();
        let phi = [1.0, 0.0];
        let mut prev = 0.0;
        for eps in [0.2, 0.1, 0.05] {
            let c = build_inner_cuboid(&ball, &phi, eps).unwrap();
            // closed form: corners at lateral offset w = 2 tan θ meet the sphere
            let theta = 2.0 * (eps / 2.0f64).asin();
            let w = 2.0 * theta.tan();
            let s = (1.0 - w * w).sqrt();
            assert!((c.r_epsilon - (3.0 + s) / (3.0 - s)).abs() < 1e-9);
            assert!(c.r_epsilon > prev && c.r_epsilon < 2.0);
            prev = c.r_epsilon;
        }
    }

    #[test]
    fn diagonal_box_ratio_has_closed_form() {
        let bx = ConvexBody::cuboid(vec![1.0, 1.0], vec![2.0, 2.0]).unwrap();
        let phi = [1.0 / SQRT_2, 1.0 / SQRT_2];
        let c = build_inner_cuboid(&bx, &phi, 0.1).unwrap();
        let w = c.cuboid.hi[1];
        assert!((c.r_epsilon - (2.0 * SQRT_2 - w) / (SQRT_2 + w)).abs() < 1e-9);
        assert!(c.r_epsilon < 2.0);
    }

    #[test]
    fn cross_sections_straddle_zero_and_vertices_are_inside() {
        let bx = ConvexBody::cuboid(vec![1.0, 2.0], vec![2.0, 3.0]).unwrap();
        let phi = r_star(&bx, 0.0, 1e-10).unwrap().phi_star;
        let c = build_inner_cuboid(&bx, &phi, 0.05).unwrap();
        assert!(c.cuboid.lo[1] < 0.0 && c.cuboid.hi[1] > 0.0);
        for v in c.cuboid.vertices() {
            assert!(bx.h_value(&v) <= 1e-9);
        }
        assert!(c.r_epsilon > 1.0 && c.r_epsilon <= 1.5);
    }

    #[test]
    fn wide_cone_is_rejected() {
        let ball = ConvexBody::ball(vec![3.0, 0.0], 1.0).unwrap();
        assert!(matches!(build_inner_cuboid(&ball, &[1.0, 0.0], 0.8), Err(Error::Domain(_))));
    }

    #[test]
    fn three_dimensional_ball() {
        let ball = ConvexBody::ball(vec![0.0, 0.0, 3.0], 1.0).unwrap();
        let c = build_inner_cuboid(&ball, &[0.0, 0.0, 1.0], 0.1).unwrap();
        assert!(c.r_epsilon > 1.9 && c.r_epsilon < 2.0);
        for v in c.cuboid.vertices() {
            assert!(ball.h_value(&v) <= 1e-9);
        }
    }
}
