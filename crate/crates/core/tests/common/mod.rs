#![allow(dead_code)]

use num_complex::Complex64;
use proptest::prelude::*;

use blaschke_core::blaschke::FiniteBlaschke;
use blaschke_core::hyperbolic::DiskPoint;

pub fn point(max_r: f64) -> impl Strategy<Value = Complex64> {
    (0.0..max_r, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

pub fn disk_point(max_r: f64) -> impl Strategy<Value = DiskPoint> {
    point(max_r).prop_map(|z| DiskPoint::new(z).unwrap())
}

pub fn unimodular() -> impl Strategy<Value = Complex64> {
    (0.0..std::f64::consts::TAU).prop_map(|t| Complex64::from_polar(1.0, t))
}

/// Products of degree `1..=max_degree` with zeros in `|z| < max_r`.
pub fn blaschke(max_degree: usize, max_r: f64) -> impl Strategy<Value = FiniteBlaschke> {
    (unimodular(), prop::collection::vec(point(max_r), 1..=max_degree))
        .prop_map(|(eta, zeros)| FiniteBlaschke::from_zeros(eta, &zeros).unwrap())
}
