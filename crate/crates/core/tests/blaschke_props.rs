mod common;

use num_complex::Complex64;
use proptest::prelude::*;

use blaschke_core::blaschke::{compose_explicit, FiniteBlaschke};
use blaschke_core::hyperbolic::{DiskPoint, EvaluableMap};
use blaschke_core::indestructible::{mclaughlin_nonzero, mclaughlin_zero, VALUE_SEPARATION};
use blaschke_core::iteration::ORDER_TOL;
use blaschke_core::maximal::composite_critical_set;
use blaschke_core::multiset::TAU_CLUSTER;
use blaschke_core::taylor::{taylor_coeff, DEFAULT_RADIUS};

use common::{blaschke, disk_point, point, unimodular};

/// `1 - |T_a(z)|^2 = (1-|a|^2)(1-|z|^2)/|1 - conj(a) z|^2`, bounded using
/// `|1 - conj(a) z| >= 1 - |a||z|`.
fn modulus_lower_bound(b: &FiniteBlaschke, r: f64) -> f64 {
    b.zeros()
        .iter()
        .map(|(a, m)| {
            let s = a.norm();
            let gap = (1.0 - s * s) * (1.0 - r * r) / (1.0 - s * r).powi(2);
            (1.0 - gap).max(0.0).sqrt().powi(m as i32)
        })
        .product()
}

proptest! {
    // sampled proxy for unimodular boundary values
    #[test]
    fn near_boundary_modulus(b in blaschke(3, 0.5), t in prop::collection::vec(0.0..std::f64::consts::TAU, 200)) {
        for theta in t {
            prop_assert!(b.eval(Complex64::from_polar(0.999, theta)).norm() > 0.99);
        }
    }

    // the same with arbitrary zeros, against the factor-wise bound
    #[test]
    fn near_boundary_modulus_bound(b in blaschke(8, 0.95), theta in 0.0..std::f64::consts::TAU) {
        let v = b.eval(Complex64::from_polar(0.999, theta)).norm();
        prop_assert!(v >= modulus_lower_bound(&b, 0.999) - 1e-12);
        prop_assert!(v < 1.0);
    }

    #[test]
    fn fiber_count(b in blaschke(8, 0.9), a in disk_point(0.95)) {
        prop_assert_eq!(b.preimages(a).unwrap().cardinality(), b.degree());
    }

    #[test]
    fn fibers_map_to_the_value(b in blaschke(6, 0.9), a in disk_point(0.9)) {
        for (z, _) in b.preimages(a).unwrap().iter() {
            prop_assert!((b.eval(z) - a.value()).norm() < 1e-9);
        }
    }

    #[test]
    fn degree_is_multiplicative(b1 in blaschke(4, 0.9), b2 in blaschke(4, 0.9)) {
        prop_assert_eq!(compose_explicit(&b1, &b2).unwrap().degree(), b1.degree() * b2.degree());
    }

    #[test]
    fn composition_agrees_pointwise(b1 in blaschke(3, 0.8), b2 in blaschke(3, 0.8), z in point(0.95)) {
        let explicit = compose_explicit(&b1, &b2).unwrap();
        prop_assert!((explicit.eval(z) - b1.eval(b2.eval(z))).norm() < 1e-9);
    }

    #[test]
    fn critical_count(b in blaschke(8, 0.9)) {
        prop_assert_eq!(b.critical_set().unwrap().cardinality(), b.degree() - 1);
    }

    #[test]
    fn critical_set_chain_rule(b1 in blaschke(3, 0.8), b2 in blaschke(3, 0.8)) {
        let direct = compose_explicit(&b1, &b2).unwrap().critical_set().unwrap();
        let pulled = composite_critical_set(&b1, &b2).unwrap();
        prop_assert!(direct.approx_eq(&pulled, TAU_CLUSTER), "{b1:?} {b2:?}: {direct:?} vs {pulled:?}");
    }

    #[test]
    fn automorphisms_keep_the_critical_set(b in blaschke(5, 0.9), w in disk_point(0.9)) {
        let t = FiniteBlaschke::automorphism(w);
        let moved = compose_explicit(&t, &b).unwrap().critical_set().unwrap();
        prop_assert!(moved.approx_eq(&b.critical_set().unwrap(), TAU_CLUSTER));
    }

    #[test]
    fn first_coefficient_is_the_derivative(b in blaschke(8, 0.9)) {
        let c1 = taylor_coeff(&b, 1, DEFAULT_RADIUS).unwrap().value;
        let d = b.eval_deriv(Complex64::new(0.0, 0.0)).1;
        prop_assert!((c1 - d).norm() < 1e-9);
    }

    #[test]
    fn serialization_round_trip(b in blaschke(6, 0.9)) {
        let json = serde_json::to_string(&b).unwrap();
        let back: FiniteBlaschke = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, b);
    }

    // postcomposition with automorphisms keeps products indestructible
    #[test]
    fn frostman_shifts_stay_exact(b in blaschke(6, 0.9), w in disk_point(0.9), eta in unimodular(), a in disk_point(0.95)) {
        let t = FiniteBlaschke::new(eta, FiniteBlaschke::automorphism(w).zeros().clone()).unwrap();
        let shifted = compose_explicit(&t, &b).unwrap();
        prop_assert!(mclaughlin_zero(&shifted, ORDER_TOL).unwrap().residual < 1e-9);
        if (a.value() - shifted.eval(Complex64::new(0.0, 0.0))).norm() > VALUE_SEPARATION {
            prop_assert!(mclaughlin_nonzero(&shifted, a).unwrap().residual < 1e-9);
        }
    }
}

#[test]
fn fiber_products_match_the_moebius_quotient() {
    // ∏_{z ∈ Z_B(c)} |z| = |T_{B(c)}(B(0))| for any c: both are |(T_{B(c)} ∘ B)(0)|
    let b = FiniteBlaschke::from_zeros(
        Complex64::new(0.0, 1.0),
        &[Complex64::new(0.3, 0.1), Complex64::new(-0.5, 0.4), Complex64::new(0.1, -0.7)],
    )
    .unwrap();
    for c in [Complex64::new(0.2, 0.2), Complex64::new(-0.6, 0.1)] {
        let bc = b.eval(c);
        let fiber = b.preimages(DiskPoint::new(bc).unwrap()).unwrap();
        let prod: f64 = fiber.iter().map(|(z, m)| z.norm().powi(m as i32)).product();
        let quotient = ((bc - b.eval(Complex64::new(0.0, 0.0))) / (1.0 - bc.conj() * b.eval(Complex64::new(0.0, 0.0)))).norm();
        assert!((prod - quotient).abs() < 1e-12, "{prod} vs {quotient}");
    }
}
