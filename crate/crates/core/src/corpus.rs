//! Seeded random inputs. Each case draws from its own ChaCha stream
//! (`seed`, case index), so a case does not depend on how many others were
//! generated or in which order.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::blaschke::FiniteBlaschke;
use crate::hyperbolic::DiskPoint;
use crate::iteration::SequenceSpec;
use crate::multiset::PointMultiset;

/// Default radius for random zeros and critical points.
pub const DEFAULT_RADIUS: f64 = 0.75;

pub fn case_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform (by area) in `|z| ≤ radius`.
pub fn disk_point<R: Rng>(rng: &mut R, radius: f64) -> DiskPoint {
    let r = radius * rng.gen::<f64>().sqrt();
    let theta = rng.gen_range(0.0..std::f64::consts::TAU);
    DiskPoint::from_polar(r, theta).expect("radius below 1")
}

pub fn unimodular<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
}

pub fn blaschke<R: Rng>(rng: &mut R, degree: usize, radius: f64) -> FiniteBlaschke {
    let zeros: Vec<Complex64> = (0..degree).map(|_| disk_point(rng, radius).value()).collect();
    FiniteBlaschke::from_zeros(unimodular(rng), &zeros).expect("valid random product")
}

pub fn automorphism<R: Rng>(rng: &mut R, radius: f64) -> FiniteBlaschke {
    let w = disk_point(rng, radius);
    FiniteBlaschke::new(
        unimodular(rng),
        PointMultiset::singleton(w.value(), 1),
    )
    .expect("valid automorphism")
}

/// `count` products with degrees uniform in `1..=max_degree`.
pub fn blaschke_corpus(seed: u64, count: usize, max_degree: usize, radius: f64) -> Vec<FiniteBlaschke> {
    (0..count)
        .map(|i| {
            let mut rng = case_rng(seed, i as u64);
            let d = rng.gen_range(1..=max_degree);
            blaschke(&mut rng, d, radius)
        })
        .collect()
}

/// `size` critical points with multiplicity one.
pub fn critical_set<R: Rng>(rng: &mut R, size: usize, radius: f64) -> PointMultiset {
    let pts: Vec<Complex64> = (0..size).map(|_| disk_point(rng, radius).value()).collect();
    PointMultiset::from_points_exact(&pts).expect("finite points")
}

/// An explicit sequence of `len` maps with degrees in `1..=max_degree`
/// whose product of degrees stays within `cap`; once the cap would be
/// exceeded the remaining maps are automorphisms.
pub fn sequence<R: Rng>(rng: &mut R, len: usize, max_degree: usize, cap: usize, radius: f64) -> SequenceSpec {
    let mut total = 1usize;
    let maps = (0..len)
        .map(|_| {
            let mut d = rng.gen_range(1..=max_degree);
            if total * d > cap {
                d = 1;
            }
            total *= d;
            blaschke(rng, d, radius)
        })
        .collect();
    SequenceSpec::Explicit { maps }
}

/// Same as [`sequence`] with every map fixing the origin; about a third of
/// the maps of degree at least two vanish to second order there.
pub fn normalized_sequence<R: Rng>(
    rng: &mut R,
    len: usize,
    max_degree: usize,
    cap: usize,
    radius: f64,
) -> SequenceSpec {
    let mut total = 1usize;
    let maps = (0..len)
        .map(|_| {
            let mut d = rng.gen_range(1..=max_degree);
            if total * d > cap {
                d = 1;
            }
            total *= d;
            let j = if d >= 2 && rng.gen_bool(0.3) { 2 } else { 1 };
            let mut zeros = vec![Complex64::new(0.0, 0.0); j];
            zeros.extend((j..d).map(|_| disk_point(rng, radius).value()));
            FiniteBlaschke::from_zeros(unimodular(rng), &zeros).expect("valid random product")
        })
        .collect();
    SequenceSpec::Explicit { maps }
}
