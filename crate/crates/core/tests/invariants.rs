use persistence_core::bench::{build_inner_cuboid, Hypercuboid};
use persistence_core::engine::{make_schedule, ScheduleKind};
use persistence_core::geometry::{
    exponent_report, persistence_exponent, projection_exponent_bound, r_star, set_distance, ConvexBody, Shape, DEFAULT_DELTAS,
};
use persistence_core::path::build_skeleton;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-8;

/// Polygon cut out by `k` tangent lines of circles around `center`.
fn polygon(center: (f64, f64), radii: &[f64], jitter: &[f64]) -> ConvexBody {
    let k = radii.len();
    let mut normals = Vec::new();
    let mut offsets = Vec::new();
    for i in 0..k {
        let t = (i as f64 + 0.4 * jitter[i]) / k as f64 * std::f64::consts::TAU;
        let n = vec![t.cos(), t.sin()];
        offsets.push(-(n[0] * center.0 + n[1] * center.1 + radii[i]));
        normals.push(n);
    }
    ConvexBody::polytope(normals, offsets).unwrap()
}

fn bodies() -> impl Strategy<Value = ConvexBody> {
    let poly = (3.0..6.0f64, 0.0..std::f64::consts::TAU, 5usize..9)
        .prop_flat_map(|(dist, angle, k)| {
            (
                Just((dist * angle.cos(), dist * angle.sin())),
                prop::collection::vec(0.5..1.0f64, k),
                prop::collection::vec(-1.0..1.0f64, k),
            )
        })
        .prop_map(|(c, r, j)| polygon(c, &r, &j));
    let boxed = (0.5..3.0f64, 0.5..3.0f64, 0.2..2.0f64, 0.2..2.0f64)
        .prop_map(|(x, y, w, h)| ConvexBody::cuboid(vec![x, y], vec![x + w, y + h]).unwrap());
    let ball = (2.0..5.0f64, -2.0..2.0f64, 0.3..1.5f64).prop_map(|(x, y, r)| ConvexBody::ball(vec![x, y], r).unwrap());
    prop_oneof![poly, boxed, ball]
}

fn unit(angle: f64) -> Vec<f64> {
    vec![angle.cos(), angle.sin()]
}

fn scaled(body: &ConvexBody, s: f64) -> ConvexBody {
    match body.shape() {
        Shape::Ball { center, radius } => ConvexBody::ball(center.iter().map(|v| v * s).collect(), radius * s).unwrap(),
        _ => {
            let (normals, offsets) = body.halfspaces().unwrap();
            ConvexBody::polytope(normals, offsets.iter().map(|b| b * s).collect()).unwrap()
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn radial_bounds_sit_on_the_boundary(body in bodies(), angle in 0.0..std::f64::consts::TAU) {
        let phi = unit(angle);
        if let Some(slice) = body.radial_bounds(&phi, TOL).unwrap() {
            let at = |r: f64| phi.iter().map(|v| v * r).collect::<Vec<_>>();
            prop_assert!(body.h_value(&at(slice.lower)) <= TOL);
            prop_assert!(body.h_value(&at(slice.upper)) <= TOL);
            prop_assert!(!body.contains(&at(slice.lower - 10.0 * TOL)));
            prop_assert!(!body.contains(&at(slice.upper + 10.0 * TOL)));
        }
    }

    #[test]
    fn r_star_dominates_every_ray(body in bodies(), angles in prop::collection::vec(0.0..std::f64::consts::TAU, 16)) {
        let rs = r_star(&body, 0.0, TOL).unwrap();
        for a in angles {
            if let Some(slice) = body.radial_bounds(&unit(a), TOL).unwrap() {
                prop_assert!(rs.r >= slice.ratio() - 1e-6, "{} < {}", rs.r, slice.ratio());
            }
        }
        let at_star = body.radial_bounds(&rs.phi_star, TOL).unwrap().unwrap();
        prop_assert!((at_star.ratio() - rs.r).abs() < 1e-6 * rs.r);
    }

    #[test]
    fn r_star_is_scale_free(body in bodies(), s in 0.1..10.0f64) {
        let a = r_star(&body, 0.0, TOL).unwrap().r;
        let b = r_star(&scaled(&body, s), 0.0, TOL).unwrap().r;
        prop_assert!((a - b).abs() < 1e-6 * a);
    }

    #[test]
    fn relaxation_decreases_to_r_star(body in bodies()) {
        let rep = exponent_report(&body, 1.5, &DEFAULT_DELTAS, TOL).unwrap();
        let rs: Vec<f64> = rep.delta_curve.iter().map(|p| p.1).collect();
        for w in rs.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9);
        }
        prop_assert!(*rs.last().unwrap() >= rep.r_star - 1e-9);
    }

    #[test]
    fn distance_vanishes_exactly_up_to_r_star(body in bodies()) {
        let r = r_star(&body, 0.0, 1e-10).unwrap().r;
        let tol = 1e-6;
        let inside = set_distance(&body, r - tol, 100_000);
        prop_assert!(inside.distance < 1e-7, "{:?} at {r}", inside);
        prop_assert!(set_distance(&body, r + 10.0 * tol, 100_000).distance > 0.0);
    }

    #[test]
    fn projection_bound_is_at_least_phi(body in bodies(), alpha in 1.1..3.0f64) {
        let phi = persistence_exponent(r_star(&body, 0.0, TOL).unwrap().r, alpha).unwrap();
        let bound = projection_exponent_bound(&body, alpha, 256).unwrap();
        prop_assert!(bound.exponent >= phi - 1e-6, "{} vs {}", bound.exponent, phi);
    }

    #[test]
    fn skeleton_stays_in_envelope(a in 0.5..2.0f64, ratio in 1.1..4.0f64, c1 in 1u64..20, n in 100u64..20_000) {
        let skel = build_skeleton(a, a * ratio, c1, n).unwrap();
        prop_assert_eq!(skel.envelope_violation(c1..=n), None);
    }

    #[test]
    fn upper_schedule_follows_its_recursion(r in 1.1..4.0f64, eta in 0.01..0.5f64, extra in 0u64..20, n in 10u64..1_000_000) {
        let c1 = (2.0 + 1.0 / ((1.0 + eta) * r - 1.0)).floor() as u64 + 1 + extra;
        let s = make_schedule(ScheduleKind::Upper { eta }, r, c1, n.max(c1)).unwrap();
        prop_assert_eq!(s.levels[0], c1);
        for w in s.levels.windows(2) {
            prop_assert_eq!(w[1], ((1.0 + eta) * r * w[0] as f64).floor() as u64);
        }
        let last = *s.levels.last().unwrap();
        prop_assert!(last <= n.max(c1));
        prop_assert!((((1.0 + eta) * r * last as f64).floor() as u64) > n.max(c1));
    }

    #[test]
    fn lower_schedule_reaches_horizon(r in 1.5..4.0f64, rho in 0.01..0.15f64, c1 in 1u64..50, n in 10u64..1_000_000) {
        prop_assume!((1.0 - rho).powi(2) * r > 1.0);
        let s = make_schedule(ScheduleKind::Lower { rho }, r, c1, n).unwrap();
        let m = &s.levels;
        prop_assert!(*m.last().unwrap() >= n);
        prop_assert!(m[..m.len() - 1].iter().all(|&v| v < n));
        prop_assert!(m.windows(2).all(|w| w[0] <= w[1]));
    }
}

/// Random points of the inner box lie in the body, and points of the body's
/// bounding box that the box accepts are in the body too.
fn cuboid_inside(body: &ConvexBody, cuboid: &Hypercuboid, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = body.dimension();
    let (lo, hi) = body.bounding_box();
    for _ in 0..10_000 {
        let coords: Vec<f64> = (0..d).map(|j| rng.random_range(cuboid.lo[j]..=cuboid.hi[j])).collect();
        assert!(body.h_value(&cuboid.point(&coords)) <= 1e-9);
        let x: Vec<f64> = (0..d).map(|j| rng.random_range(lo[j]..=hi[j])).collect();
        if cuboid.contains(&x) {
            assert!(body.h_value(&x) <= 1e-9);
        }
    }
}

#[test]
fn inner_cuboids_are_inside() {
    let ball = ConvexBody::ball(vec![3.0, 0.0], 1.0).unwrap();
    let rect = ConvexBody::cuboid(vec![1.0, 2.0], vec![2.0, 3.0]).unwrap();
    let ball3 = ConvexBody::ball(vec![2.0, 1.0, 1.0], 0.8).unwrap();
    for (i, body) in [ball, rect, ball3].iter().enumerate() {
        let phi = r_star(body, 0.0, TOL).unwrap().phi_star;
        for eps in [0.1, 0.05, 0.02] {
            let inner = build_inner_cuboid(body, &phi, eps).unwrap();
            cuboid_inside(body, &inner.cuboid, i as u64);
        }
    }
}

