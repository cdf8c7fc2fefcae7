//! Hyperbolic geometry of the unit disk.
//!
//! The metric density is `1/(1-|z|^2)`, which has curvature -4. With this
//! normalization `hyp_dist(0, r) = atanh(r)`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest admissible modulus for a [`DiskPoint`].
pub const MAX_MODULUS: f64 = 1.0 - 1e-15;

/// Slack allowed when checking `|f(z)| <= 1` for self-maps.
pub const SELF_MAP_SLACK: f64 = 1e-12;

/// A point of the open unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct DiskPoint(Complex64);

impl DiskPoint {
    pub const ORIGIN: DiskPoint = DiskPoint(Complex64::new(0.0, 0.0));

    pub fn new(value: Complex64) -> Result<Self> {
        if !value.re.is_finite() || !value.im.is_finite() || value.norm() > MAX_MODULUS {
            return Err(Error::OutsideDisk(value));
        }
        Ok(DiskPoint(value))
    }

    pub fn from_re_im(re: f64, im: f64) -> Result<Self> {
        Self::new(Complex64::new(re, im))
    }

    pub fn from_polar(r: f64, theta: f64) -> Result<Self> {
        Self::new(Complex64::from_polar(r, theta))
    }

    /// Wraps a value produced by a disk-preserving formula, pulling it back
    /// inside if rounding pushed it onto the circle.
    pub(crate) fn clamped(value: Complex64) -> Self {
        let r = value.norm();
        if r > MAX_MODULUS {
            DiskPoint(value * (MAX_MODULUS / r))
        } else {
            DiskPoint(value)
        }
    }

    #[inline]
    pub fn value(self) -> Complex64 {
        self.0
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.0.norm()
    }
}

impl fmt::Display for DiskPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl TryFrom<Complex64> for DiskPoint {
    type Error = Error;
    fn try_from(value: Complex64) -> Result<Self> {
        DiskPoint::new(value)
    }
}

impl TryFrom<[f64; 2]> for DiskPoint {
    type Error = Error;
    fn try_from(value: [f64; 2]) -> Result<Self> {
        DiskPoint::from_re_im(value[0], value[1])
    }
}

impl From<DiskPoint> for [f64; 2] {
    fn from(p: DiskPoint) -> Self {
        [p.0.re, p.0.im]
    }
}

impl From<DiskPoint> for Complex64 {
    fn from(p: DiskPoint) -> Self {
        p.0
    }
}

/// A holomorphic self-map of the disk that can report its value and
/// derivative at a point.
pub trait EvaluableMap: Sync {
    /// Returns `(f(z), f'(z))`.
    fn eval_deriv(&self, z: Complex64) -> (Complex64, Complex64);

    fn eval(&self, z: Complex64) -> Complex64 {
        self.eval_deriv(z).0
    }
}

impl<M: EvaluableMap + ?Sized> EvaluableMap for &M {
    fn eval_deriv(&self, z: Complex64) -> (Complex64, Complex64) {
        (**self).eval_deriv(z)
    }
    fn eval(&self, z: Complex64) -> Complex64 {
        (**self).eval(z)
    }
}

impl<M: EvaluableMap + ?Sized> EvaluableMap for Box<M> {
    fn eval_deriv(&self, z: Complex64) -> (Complex64, Complex64) {
        (**self).eval_deriv(z)
    }
}

/// The identity map of the disk.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl EvaluableMap for Identity {
    fn eval_deriv(&self, z: Complex64) -> (Complex64, Complex64) {
        (z, Complex64::new(1.0, 0.0))
    }
}

/// Adapts a closure returning `(f(z), f'(z))`.
#[derive(Clone, Copy)]
pub struct FnMap<F>(pub F);

impl<F> EvaluableMap for FnMap<F>
where
    F: Fn(Complex64) -> (Complex64, Complex64) + Sync,
{
    fn eval_deriv(&self, z: Complex64) -> (Complex64, Complex64) {
        (self.0)(z)
    }
}

/// `T_w(z) = (w - z) / (1 - conj(w) z)`, the involutive automorphism with
/// `T_w(0) = w`.
#[inline]
pub fn moebius(w: Complex64, z: Complex64) -> Complex64 {
    (w - z) / (Complex64::new(1.0, 0.0) - w.conj() * z)
}

/// Derivative of [`moebius`] in `z`: `(|w|^2 - 1) / (1 - conj(w) z)^2`.
#[inline]
pub fn moebius_deriv(w: Complex64, z: Complex64) -> Complex64 {
    let den = Complex64::new(1.0, 0.0) - w.conj() * z;
    Complex64::new(w.norm_sqr() - 1.0, 0.0) / (den * den)
}

pub fn moebius_t(w: DiskPoint, z: DiskPoint) -> DiskPoint {
    DiskPoint::clamped(moebius(w.value(), z.value()))
}

/// Pseudo-hyperbolic distance `|T_a(b)|`.
#[inline]
pub fn pseudo_dist(a: Complex64, b: Complex64) -> f64 {
    moebius(a, b).norm()
}

/// Hyperbolic distance for the curvature -4 metric: `atanh |T_a(b)|`.
pub fn hyp_dist(a: DiskPoint, b: DiskPoint) -> f64 {
    pseudo_dist(a.value(), b.value()).min(MAX_MODULUS).atanh()
}

/// Density `|f'(z)| / (1 - |f(z)|^2)` of the pulled-back metric, without
/// validation. Returns `+inf` when `|f(z)| >= 1`.
#[inline]
pub fn density_of(value: Complex64, deriv: Complex64) -> f64 {
    let den = 1.0 - value.norm_sqr();
    if den <= 0.0 {
        f64::INFINITY
    } else {
        deriv.norm() / den
    }
}

/// `lambda_f(z) = |f'(z)| / (1 - |f(z)|^2)`.
pub fn density<M: EvaluableMap + ?Sized>(f: &M, z: Complex64) -> f64 {
    let (v, d) = f.eval_deriv(z);
    density_of(v, d)
}

/// Hyperbolic distortion `(1-|z|^2)|f'(z)| / (1-|f(z)|^2)`.
pub fn hyp_distortion<M: EvaluableMap + ?Sized>(f: &M, z: DiskPoint) -> Result<f64> {
    let z = z.value();
    let (v, d) = f.eval_deriv(z);
    let m = v.norm();
    if !m.is_finite() || m > 1.0 + SELF_MAP_SLACK {
        return Err(Error::NotSelfMap { at: z, value: v });
    }
    let den = 1.0 - v.norm_sqr();
    if den <= 0.0 {
        return Err(Error::NotSelfMap { at: z, value: v });
    }
    Ok((1.0 - z.norm_sqr()) * d.norm() / den)
}

/// Right-hand side of the Schwarz-lemma estimate
/// `|H(z)| >= r (1 - (1 - |H'(0)|)(1 + r)/(1 - r))` for `r = |z| < |H'(0)|`.
///
/// The value may be negative; callers use `max(bound, 0)`.
pub fn schwarz_lower_bound(d0: f64, r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&d0) {
        return Err(Error::Domain(format!("|H'(0)| = {d0} outside [0, 1]")));
    }
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Domain(format!("radius {r} outside [0, 1)")));
    }
    if r >= d0 {
        return Err(Error::Domain(format!(
            "radius {r} not below |H'(0)| = {d0}"
        )));
    }
    Ok(r * (1.0 - (1.0 - d0) * (1.0 + r) / (1.0 - r)))
}
