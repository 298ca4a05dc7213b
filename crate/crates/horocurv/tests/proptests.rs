//! Property-based invariants.

use proptest::prelude::*;

use horocurv::minkowski::{classify_quadric, from_ball, to_ball, HyperquadricTag};
use horocurv::normal_flow::{flow_curvature, flow_sectional};
use horocurv::surface::classify;

/// Ball points strictly inside the unit ball.
fn ball_point() -> impl Strategy<Value = [f64; 3]> {
    ([-0.57_f64..0.57, -0.57_f64..0.57, -0.57_f64..0.57])
        .prop_filter("inside unit ball", |p| p.iter().map(|x| x * x).sum::<f64>() < 0.97)
}

fn kappa_vec() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.999_f64..10.0, 2..=5)
}

proptest! {
    /// from_ball lands on the hyperbolic sheet and to_ball round-trips.
    #[test]
    fn prop_ball_round_trip(p in ball_point()) {
        let x = from_ball(&p);
        prop_assert_eq!(classify_quadric(&x, 1e-9), HyperquadricTag::Hyperbolic);
        let q = to_ball(&x).unwrap();
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    /// Spatial rotations of the spatial part never change the quadric tag.
    #[test]
    fn prop_quadric_tag_rotation_invariant(
        x0 in -3.0_f64..3.0,
        x in -3.0_f64..3.0,
        y in -3.0_f64..3.0,
        z in -3.0_f64..3.0,
        angle in 0.0_f64..std::f64::consts::TAU,
    ) {
        use horocurv::minkowski::SpacetimeVector;
        let v = SpacetimeVector::new(vec![x0, x, y, z]);
        let (s, c) = angle.sin_cos();
        let rotated = SpacetimeVector::new(vec![x0, c * x - s * y, s * x + c * y, z]);
        prop_assert_eq!(classify_quadric(&v, 1e-9), classify_quadric(&rotated, 1e-9));
    }

    /// Flow semigroup: evolving by s then t equals evolving by s + t.
    #[test]
    fn prop_flow_semigroup(kappa in -0.99_f64..10.0, s in 0.0_f64..2.0, t in 0.0_f64..2.0) {
        let two = flow_curvature(flow_curvature(kappa, s).unwrap(), t).unwrap();
        let one = flow_curvature(kappa, s + t).unwrap();
        prop_assert!((two - one).abs() < 1e-12 * (1.0 + one.abs()));
    }

    /// Nonnegative sectional curvature is preserved along the flow.
    #[test]
    fn prop_flow_preserves_nonnegative_sectional(
        ki in -0.99_f64..10.0,
        kj in -0.99_f64..10.0,
        t in 0.0_f64..5.0,
    ) {
        prop_assume!(ki * kj >= 1.0);
        let kt = flow_sectional(ki * kj - 1.0, ki, kj, t).unwrap();
        prop_assert!(kt >= 0.0);
        // Consistency with the pointwise law.
        let direct = flow_curvature(ki, t).unwrap() * flow_curvature(kj, t).unwrap() - 1.0;
        prop_assert!((kt - direct).abs() < 1e-12 * (1.0 + direct.abs()));
    }

    /// Classification ladder on arbitrary curvature vectors: horospherically
    /// convex implies nonnegatively curved implies (with strict convexity)
    /// nonnegative Ricci; weak horospherical convexity matches kappa > -1.
    #[test]
    fn prop_classification_hierarchy(kappa in kappa_vec()) {
        let rep = classify(&kappa, false);
        if rep.horo_convex {
            prop_assert!(rep.nonneg_sectional);
        }
        if rep.nonneg_sectional && rep.convex {
            prop_assert!(rep.nonneg_ricci);
        }
        prop_assert_eq!(rep.weakly_horo_convex, kappa.iter().all(|k| *k > -1.0));
    }

    /// Selector grammar round-trip through the surface resolver.
    #[test]
    fn prop_equidistant_selector_round_trip(d in 0.05_f64..2.0, wraps in 1_usize..4) {
        let selector = format!("equidistant:d={d},wraps={wraps}");
        let entry = horocurv::cli::resolve_surface(&selector).unwrap();
        let want = [d.tanh(), 1.0 / d.tanh()];
        let got = entry.expected.kappa.unwrap();
        prop_assert!((got[0] - want[0]).abs() < 1e-15);
        prop_assert!((got[1] - want[1]).abs() < 1e-15);
    }
}
