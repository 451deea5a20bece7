//! Compact convex targets bounded away from the origin.
//!
//! A body is `A = {x : H(x) ≤ 0}` with `H(x) = max_i (⟨a_i, x⟩ + b_i)`. Boxes and
//! Euclidean balls are stored natively so that support functions, projections and
//! ray intersections are exact; for a ball `H(x) = ‖x − c‖ − ρ`.

mod distance;
mod lp;
mod projection;
mod rstar;

pub use distance::{project_scaled, set_distance, SetDistance};
pub use projection::{direction_grid, projection_exponent_bound, ProjectionBound};
pub use rstar::{
    exponent_report, nonstandard_exponent, persistence_exponent, r_star, ExponentReport, RStar,
    DEFAULT_DELTAS, DEFAULT_TOL,
};

use crate::linalg::{dot, norm};
use crate::{Error, Result};

/// Shape of a convex body.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Polytope { normals: Vec<Vec<f64>>, offsets: Vec<f64> },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

/// Validated body with cached bounding box and deepest point.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexBody {
    shape: Shape,
    dimension: usize,
    bbox_lo: Vec<f64>,
    bbox_hi: Vec<f64>,
    deepest: Vec<f64>,
    depth: f64,
}

/// Intersection of the ray `{r·φ : r > 0}` with the body.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSlice {
    pub direction: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
}

impl RadialSlice {
    pub fn ratio(&self) -> f64 {
        self.upper / self.lower
    }
}

impl ConvexBody {
    /// Polytope `{x : ⟨a_i, x⟩ + b_i ≤ 0}`.
    pub fn polytope(normals: Vec<Vec<f64>>, offsets: Vec<f64>) -> Result<Self> {
        if normals.is_empty() || normals.len() != offsets.len() {
            return Err(Error::config("polytope needs matching, non-empty normal and offset lists"));
        }
        let d = normals[0].len();
        if d == 0 || normals.iter().any(|a| a.len() != d) {
            return Err(Error::config("half-space normals must share one positive dimension"));
        }
        if normals.iter().flatten().chain(&offsets).any(|v| !v.is_finite()) {
            return Err(Error::config("half-space data must be finite"));
        }
        let mut lo = vec![0.0; d];
        let mut hi = vec![0.0; d];
        for j in 0..d {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            hi[j] = lp::support(&normals, &offsets, &e)
                .map_err(|_| Error::config("polytope is empty or unbounded"))?
                .0;
            e[j] = -1.0;
            lo[j] = -lp::support(&normals, &offsets, &e)
                .map_err(|_| Error::config("polytope is empty or unbounded"))?
                .0;
        }
        let (depth, deepest) = lp::deepest_point(&normals, &offsets)?;
        Self::finish(Shape::Polytope { normals, offsets }, lo, hi, deepest, depth)
    }

    /// Axis-aligned box `∏ [lo_j, hi_j]`.
    pub fn cuboid(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::config("box bounds must be non-empty and of equal length"));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l.is_finite() && h.is_finite() && l <= h)) {
            return Err(Error::config("box needs finite bounds with lo <= hi"));
        }
        let deepest: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect();
        let depth = -lo.iter().zip(&hi).map(|(l, h)| 0.5 * (h - l)).fold(f64::INFINITY, f64::min);
        Self::finish(Shape::Box { lo: lo.clone(), hi: hi.clone() }, lo, hi, deepest, depth)
    }

    /// Interval `[a, b]` on the line.
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::cuboid(vec![a], vec![b])
    }

    /// Closed Euclidean ball.
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::config("ball centre must be a finite, non-empty vector"));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::config("ball radius must be positive"));
        }
        let lo = center.iter().map(|c| c - radius).collect();
        let hi = center.iter().map(|c| c + radius).collect();
        Self::finish(Shape::Ball { center: center.clone(), radius }, lo, hi, center, -radius)
    }

    fn finish(shape: Shape, bbox_lo: Vec<f64>, bbox_hi: Vec<f64>, deepest: Vec<f64>, depth: f64) -> Result<Self> {
        let body = ConvexBody { dimension: bbox_lo.len(), shape, bbox_lo, bbox_hi, deepest, depth };
        let h0 = body.h_value(&vec![0.0; body.dimension]);
        if !(h0 > 0.0) {
            return Err(Error::config(format!("origin must lie outside the closed body (H(0) = {h0})")));
        }
        if !(body.depth < 0.0) {
            return Err(Error::config("body has empty interior"));
        }
        Ok(body)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn bounding_box(&self) -> (&[f64], &[f64]) {
        (&self.bbox_lo, &self.bbox_hi)
    }

    /// Minimiser of `H` and the value `min H < 0`.
    pub fn deepest_point(&self) -> (&[f64], f64) {
        (&self.deepest, self.depth)
    }

    /// Largest norm of a point of the bounding box.
    pub fn outer_radius(&self) -> f64 {
        self.bbox_lo
            .iter()
            .zip(&self.bbox_hi)
            .map(|(l, h)| l.abs().max(h.abs()).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `H(x)`.
    pub fn h_value(&self, x: &[f64]) -> f64 {
        match &self.shape {
            Shape::Polytope { normals, offsets } => normals
                .iter()
                .zip(offsets)
                .map(|(a, b)| dot(a, x) + b)
                .fold(f64::NEG_INFINITY, f64::max),
            Shape::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(xi, (l, h))| (xi - h).max(l - xi))
                .fold(f64::NEG_INFINITY, f64::max),
            Shape::Ball { center, radius } => {
                x.iter().zip(center).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt() - radius
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.h_value(x) <= 0.0
    }

    /// Whether `s / k ∈ A`, evaluated without dividing by `k`.
    #[inline]
    pub fn contains_average(&self, s: &[f64], k: f64) -> bool {
        match &self.shape {
            Shape::Polytope { normals, offsets } => {
                normals.iter().zip(offsets).all(|(a, b)| dot(a, s) + b * k <= 0.0)
            }
            Shape::Box { lo, hi } => s.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| l * k <= *v && *v <= h * k),
            Shape::Ball { center, radius } => {
                let d2: f64 = s.iter().zip(center).map(|(v, c)| (v - c * k).powi(2)).sum();
                d2 <= (radius * k).powi(2)
            }
        }
    }

    /// `H(s·x)`, the residual of `x` for the scaled body `s^{-1}∘A`.
    pub fn h_scaled(&self, x: &[f64], s: f64) -> f64 {
        let y: Vec<f64> = x.iter().map(|v| s * v).collect();
        self.h_value(&y)
    }

    /// Half-space description (boxes expand to `2d` faces).
    pub fn halfspaces(&self) -> Option<(Vec<Vec<f64>>, Vec<f64>)> {
        match &self.shape {
            Shape::Polytope { normals, offsets } => Some((normals.clone(), offsets.clone())),
            Shape::Box { lo, hi } => {
                let d = lo.len();
                let mut a = Vec::with_capacity(2 * d);
                let mut b = Vec::with_capacity(2 * d);
                for j in 0..d {
                    let mut e = vec![0.0; d];
                    e[j] = 1.0;
                    a.push(e.clone());
                    b.push(-hi[j]);
                    e[j] = -1.0;
                    a.push(e);
                    b.push(lo[j]);
                }
                Some((a, b))
            }
            Shape::Ball { .. } => None,
        }
    }

    /// Circumscribed polytope of a ball with `count` faces from a direction grid;
    /// other shapes are returned in half-space form.
    pub fn polytope_approximation(&self, count: usize) -> Result<ConvexBody> {
        match &self.shape {
            Shape::Ball { center, radius } => {
                let dirs = direction_grid(self.dimension, count);
                let offsets = dirs.iter().map(|u| -dot(u, center) - radius).collect();
                ConvexBody::polytope(dirs, offsets)
            }
            _ => {
                let (a, b) = self.halfspaces().expect("polyhedral shape");
                ConvexBody::polytope(a, b)
            }
        }
    }

    /// `max_{x∈A} ⟨c, x⟩`.
    pub fn support(&self, c: &[f64]) -> Result<f64> {
        match &self.shape {
            Shape::Polytope { normals, offsets } => Ok(lp::support(normals, offsets, c)?.0),
            Shape::Box { lo, hi } => Ok(c.iter().zip(lo.iter().zip(hi)).map(|(ci, (l, h))| (ci * l).max(ci * h)).sum()),
            Shape::Ball { center, radius } => Ok(dot(c, center) + radius * norm(c)),
        }
    }

    /// `(min, max)` of `⟨c, x⟩` over the body.
    pub fn projection_interval(&self, c: &[f64]) -> Result<(f64, f64)> {
        check_unit(c)?;
        let neg: Vec<f64> = c.iter().map(|v| -v).collect();
        Ok((-self.support(&neg)?, self.support(c)?))
    }

    /// Euclidean projection onto the body.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        match &self.shape {
            Shape::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).map(|(v, (l, h))| v.clamp(*l, *h)).collect(),
            Shape::Ball { center, radius } => {
                let diff: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
                let n = norm(&diff);
                if n <= *radius {
                    x.to_vec()
                } else {
                    center.iter().zip(&diff).map(|(c, v)| c + v * radius / n).collect()
                }
            }
            Shape::Polytope { normals, offsets } => distance::dykstra(normals, offsets, x),
        }
    }

    /// Radial bounds `L_φ ≤ U_φ` of the ray along `phi`, or `None` if it misses the body.
    ///
    /// Golden-section search on `r ↦ H(rφ)` finds an interior point of the ray, then
    /// bisection brackets both boundary crossings to width `tol`. The returned radii
    /// are the inside ends of the brackets.
    pub fn radial_bounds(&self, phi: &[f64], tol: f64) -> Result<Option<RadialSlice>> {
        if !(tol > 0.0) {
            return Err(Error::config("tolerance must be positive"));
        }
        check_unit(phi)?;
        if phi.len() != self.dimension {
            return Err(Error::config("direction has wrong dimension"));
        }
        let f = |r: f64| self.h_scaled(phi, r);
        let r_max = self.outer_radius() * (1.0 + 1e-9) + tol;
        let Some(inside) = golden_find_nonpositive(&f, 0.0, r_max, tol * 1e-3) else {
            return Ok(None);
        };
        let lower = bisect_boundary(&f, 0.0, inside, tol);
        let upper = bisect_boundary(&f, r_max, inside, tol);
        Ok(Some(RadialSlice { direction: phi.to_vec(), lower, upper }))
    }
}

pub(crate) fn check_unit(v: &[f64]) -> Result<()> {
    if (norm(v) - 1.0).abs() > 1e-12 {
        return Err(Error::config("direction must be a unit vector"));
    }
    Ok(())
}

// Golden-section minimisation of a convex function, stopping at the first point
// with f ≤ 0.
fn golden_find_nonpositive(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Option<f64> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    loop {
        if fc <= 0.0 {
            return Some(c);
        }
        if fd <= 0.0 {
            return Some(d);
        }
        if b - a < tol {
            return None;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
}

// Bisection between an outside point and an inside point; returns the inside end.
fn bisect_boundary(f: &impl Fn(f64) -> f64, mut outside: f64, mut inside: f64, tol: f64) -> f64 {
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
