//! One-dimensional projection bounds on the exponent.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::ConvexBody;
use crate::linalg::{norm, normalized};
use crate::{Error, Result};

/// Best direction found for the projection bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionBound {
    /// `sup_c (α − 1) / (2 log(b(c)/a(c)))` over admissible directions.
    pub exponent: f64,
    pub direction: Vec<f64>,
    pub interval: (f64, f64),
}

/// Deterministic set of roughly `count` unit vectors in dimension `d`.
///
/// `d = 1` gives `±1`, `d = 2` equally spaced angles, `d = 3` a Fibonacci sphere,
/// and higher dimensions a Fibonacci sphere in the first three coordinates plus
/// signed coordinate pairs.
pub fn direction_grid(d: usize, count: usize) -> Vec<Vec<f64>> {
    let count = count.max(4);
    match d {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        _ => {
            let golden = PI * (3.0 - 5f64.sqrt());
            let mut dirs: Vec<Vec<f64>> = (0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let t = golden * k as f64;
                    let mut v = vec![0.0; d];
                    v[0] = rho * t.cos();
                    v[1] = rho * t.sin();
                    v[2] = z;
                    v
                })
                .collect();
            if d > 3 {
                for i in 0..d {
                    for j in i + 1..d {
                        for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                            let mut v = vec![0.0; d];
                            v[i] = si;
                            v[j] = sj;
                            dirs.push(normalized(&v).expect("non-zero"));
                        }
                    }
                    let mut v = vec![0.0; d];
                    v[i] = 1.0;
                    dirs.push(v.clone());
                    v[i] = -1.0;
                    dirs.push(v);
                }
            }
            dirs
        }
    }
}

fn bound_at(body: &ConvexBody, alpha: f64, c: &[f64]) -> Option<(f64, (f64, f64))> {
    let (a, b) = body.projection_interval(c).ok()?;
    (a > 0.0).then(|| ((alpha - 1.0) / (2.0 * (b / a).ln()), (a, b)))
}

/// Supremum of the projected exponents over a direction grid of size
/// `grid_density`, refined locally around the best grid point.
pub fn projection_exponent_bound(body: &ConvexBody, alpha: f64, grid_density: usize) -> Result<ProjectionBound> {
    if !(alpha > 1.0) {
        return Err(Error::config("tail index must exceed 1"));
    }
    let d = body.dimension();
    let grid = direction_grid(d, grid_density);
    let best = grid
        .par_iter()
        .filter_map(|c| bound_at(body, alpha, c).map(|(v, iv)| (v, c.clone(), iv)))
        .reduce_with(|x, y| if y.0 > x.0 { y } else { x });
    let Some((mut value, mut dir, mut interval)) = best else {
        return Err(Error::domain("no direction projects the body away from the origin"));
    };
    let eval = |c: &[f64]| bound_at(body, alpha, c).map(|(v, iv)| (v, iv)).unwrap_or((f64::NEG_INFINITY, (0.0, 0.0)));
    match d {
        1 => {}
        2 => {
            // golden section on the angle within one grid step of the best point
            let step = 2.0 * PI / grid.len() as f64;
            let t0 = dir[1].atan2(dir[0]);
            let at = |t: f64| eval(&[t.cos(), t.sin()]);
            let g = (5f64.sqrt() - 1.0) / 2.0;
            let (mut a, mut b) = (t0 - step, t0 + step);
            let mut c = b - g * (b - a);
            let mut e = a + g * (b - a);
            let (mut fc, mut fe) = (at(c).0, at(e).0);
            while b - a > 1e-12 {
                if fc > fe {
                    b = e;
                    e = c;
                    fe = fc;
                    c = b - g * (b - a);
                    fc = at(c).0;
                } else {
                    a = c;
                    c = e;
                    fc = fe;
                    e = a + g * (b - a);
                    fe = at(e).0;
                }
            }
            let t = 0.5 * (a + b);
            let (v, iv) = at(t);
            if v > value {
                value = v;
                dir = vec![t.cos(), t.sin()];
                interval = iv;
            }
        }
        _ => {
            // compass search on the sphere
            let mut step = 0.5 * (4.0 * PI / grid.len() as f64).sqrt();
            while step > 1e-10 {
                let mut improved = false;
                for j in 0..d {
                    for s in [step, -step] {
                        let mut c = dir.clone();
                        c[j] += s;
                        let n = norm(&c);
                        c.iter_mut().for_each(|x| *x /= n);
                        let (v, iv) = eval(&c);
                        if v > value {
                            value = v;
                            dir = c;
                            interval = iv;
                            improved = true;
                        }
                    }
                }
                if !improved {
                    step *= 0.5;
                }
            }
        }
    }
    Ok(ProjectionBound { exponent: value, direction: dir, interval })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::persistence_exponent;

    #[test]
    fn grids_are_unit_vectors() {
        for d in 1..=5 {
            for v in direction_grid(d, 50) {
                assert_eq!(v.len(), d);
                assert!((norm(&v) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ball_bound_is_sharp() {
        let ball = ConvexBody::ball(vec![3.0, 0.0], 1.0).unwrap();
        let b = projection_exponent_bound(&ball, 3.0, 720).unwrap();
        assert!((b.exponent - 1.0 / 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn diagonal_box_bound_is_sharp() {
        let bx = ConvexBody::cuboid(vec![1.0, 1.0], vec![2.0, 2.0]).unwrap();
        let b = projection_exponent_bound(&bx, 2.0, 720).unwrap();
        assert!((b.exponent - persistence_exponent(2.0, 2.0).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn off_diagonal_box_bound_meets_exponent_on_axis() {
        // the vertical projection [2, 3] already attains the ratio 3/2
        let bx = ConvexBody::cuboid(vec![1.0, 2.0], vec![2.0, 3.0]).unwrap();
        let b = projection_exponent_bound(&bx, 2.0, 720).unwrap();
        let phi = persistence_exponent(1.5, 2.0).unwrap();
        assert!((b.exponent - phi).abs() < 1e-9);
        assert!(b.interval.1 / b.interval.0 - 1.5 < 1e-9);
    }

    #[test]
    fn negative_interval_uses_negative_direction() {
        let iv = ConvexBody::interval(-3.0, -1.0).unwrap();
        let b = projection_exponent_bound(&iv, 2.0, 8).unwrap();
        assert_eq!(b.direction, vec![-1.0]);
        assert!((b.exponent - persistence_exponent(3.0, 2.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn three_dimensional_ball_bound() {
        let ball = ConvexBody::ball(vec![0.0, 0.0, 3.0], 1.0).unwrap();
        let b = projection_exponent_bound(&ball, 2.0, 400).unwrap();
        assert!((b.exponent - persistence_exponent(2.0, 2.0).unwrap()).abs() < 1e-8);
    }
}
