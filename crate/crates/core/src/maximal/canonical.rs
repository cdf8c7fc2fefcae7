//! Orbit representatives under postcomposition with automorphisms.

use num_complex::Complex64;

use crate::blaschke::FiniteBlaschke;
use crate::error::Result;
use crate::hyperbolic::{pseudo_dist, DiskPoint, EvaluableMap};
use crate::multiset::PointMultiset;

/// `ρ (T_{B(0)} ∘ B)` with `ρ` making the lowest Taylor coefficient at the
/// origin positive. The zeros of `T_{B(0)} ∘ B` are the fiber `Z_B(0)`; the
/// cluster at the origin is snapped to exactly 0.
pub fn canonicalize(b: &FiniteBlaschke) -> Result<FiniteBlaschke> {
    let value = b.eval(Complex64::new(0.0, 0.0));
    let fiber = if value == Complex64::new(0.0, 0.0) {
        b.zeros().clone()
    } else {
        b.zero_multiset(DiskPoint::ORIGIN)?
    };
    let nearest = fiber
        .entries()
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.0.norm().total_cmp(&b.0.norm()))
        .map(|(i, _)| i)
        .expect("fiber of a nonconstant map is nonempty");
    let k = fiber.entries()[nearest].1;
    let entries: Vec<(Complex64, usize)> = fiber
        .entries()
        .iter()
        .enumerate()
        .map(|(i, &(p, m))| if i == nearest { (Complex64::new(0.0, 0.0), m) } else { (p, m) })
        .collect();
    // z^k ∏|a| (positive) is the lowest term of (-1)^k (-z)^k ∏ (|a|/a)(a - z)/(1 - conj(a) z)
    let eta = if k % 2 == 0 { 1.0 } else { -1.0 };
    FiniteBlaschke::new(
        Complex64::new(eta, 0.0),
        PointMultiset::from_entries(entries, 0.0)?,
    )
}

/// `sup_z |T_{B1(z)}(B2(z))|` over `probes`: zero iff the maps agree there.
pub fn map_distance<M1, M2>(b1: &M1, b2: &M2, probes: &[DiskPoint]) -> f64
where
    M1: EvaluableMap + ?Sized,
    M2: EvaluableMap + ?Sized,
{
    probes
        .iter()
        .map(|z| pseudo_dist(b1.eval(z.value()), b2.eval(z.value())))
        .fold(0.0, f64::max)
}
