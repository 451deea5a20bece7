//! Euclidean distance between a body and its dilations.

use super::rstar::joint_residual;
use super::ConvexBody;
use crate::linalg::{distance, dot};

/// Outcome of alternating projections between `A` and `r∘A`.
#[derive(Debug, Clone, PartialEq)]
pub struct SetDistance {
    pub distance: f64,
    /// Point of `A` realising the distance.
    pub point_a: Vec<f64>,
    /// Point of `r∘A` realising the distance.
    pub point_b: Vec<f64>,
    pub iterations: usize,
}

/// Projection onto `s∘A`.
pub fn project_scaled(body: &ConvexBody, s: f64, x: &[f64]) -> Vec<f64> {
    let y: Vec<f64> = x.iter().map(|v| v / s).collect();
    body.project(&y).into_iter().map(|v| v * s).collect()
}

/// `dist(A, r∘A)` by alternating projections, stopped when an iterate moves less
/// than `1e-9` or after `max_iter` rounds.
///
/// The iteration starts from `r·y` for the minimiser `y` of `max(H(y), H(r·y))`,
/// which already lies in both sets whenever they meet.
pub fn set_distance(body: &ConvexBody, r: f64, max_iter: usize) -> SetDistance {
    let mut a = match joint_residual(body, r) {
        Ok((_, y)) => body.project(&y.iter().map(|v| v * r).collect::<Vec<_>>()),
        Err(_) => body.deepest_point().0.to_vec(),
    };
    let mut b = project_scaled(body, r, &a);
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let a_next = body.project(&b);
        let b_next = project_scaled(body, r, &a_next);
        let moved = distance(&a_next, &a).max(distance(&b_next, &b));
        a = a_next;
        b = b_next;
        if moved < 1e-9 {
            break;
        }
    }
    SetDistance { distance: distance(&a, &b), point_a: a, point_b: b, iterations }
}

/// Projection onto `{x : ⟨a_i, x⟩ + b_i ≤ 0}` by Dykstra's algorithm over the faces.
pub(crate) fn dykstra(normals: &[Vec<f64>], offsets: &[f64], x: &[f64]) -> Vec<f64> {
    if normals.iter().zip(offsets).all(|(a, b)| dot(a, x) + b <= 0.0) {
        return x.to_vec();
    }
    let m = normals.len();
    let mut y = x.to_vec();
    let mut incr = vec![vec![0.0; x.len()]; m];
    for _ in 0..100_000 {
        let prev = y.clone();
        for i in 0..m {
            let z: Vec<f64> = y.iter().zip(&incr[i]).map(|(a, b)| a + b).collect();
            let a = &normals[i];
            let viol = dot(a, &z) + offsets[i];
            let p: Vec<f64> = if viol > 0.0 {
                let s = viol / dot(a, a);
                z.iter().zip(a).map(|(zi, ai)| zi - s * ai).collect()
            } else {
                z.clone()
            };
            incr[i] = z.iter().zip(&p).map(|(a, b)| a - b).collect();
            y = p;
        }
        if distance(&prev, &y) < 1e-14 {
            break;
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dykstra_matches_box_clamp() {
        let bx = ConvexBody::cuboid(vec![1.0, 2.0], vec![2.0, 3.0]).unwrap();
        let poly = bx.polytope_approximation(0).unwrap();
        for x in [[0.0, 0.0], [5.0, 2.5], [1.5, -4.0], [1.2, 2.2], [3.0, 9.0]] {
            let p = poly.project(&x);
            let q = bx.project(&x);
            assert!(distance(&p, &q) < 1e-10, "{x:?}: {p:?} vs {q:?}");
        }
    }

    #[test]
    fn dykstra_on_triangle_corner() {
        // triangle x ≥ 1, y ≥ 1, x + y ≤ 4; the point (5, 0) projects to the vertex (3, 1)
        let t = ConvexBody::polytope(
            vec![vec![-1.0, 0.0], vec![0.0, -1.0], vec![1.0, 1.0]],
            vec![1.0, 1.0, -4.0],
        )
        .unwrap();
        let p = t.project(&[5.0, 0.0]);
        assert!(distance(&p, &[3.0, 1.0]) < 1e-10);
    }

    #[test]
    fn ball_distance_is_exact() {
        // dist(B(c,ρ), r∘B(c,ρ)) = (r − 1)‖c‖ − (1 + r)ρ when positive
        let ball = ConvexBody::ball(vec![3.0, 0.0], 1.0).unwrap();
        let d = set_distance(&ball, 3.0, 10_000);
        assert!((d.distance - 2.0).abs() < 1e-8);
        assert!(set_distance(&ball, 1.5, 10_000).distance < 1e-8);
    }
}
