//! Finite Blaschke products and compositions of them.
//!
//! A product is stored as a unimodular constant `eta` and a zero multiset.
//! Each zero `a` contributes the factor `(|a|/a) (a - z)/(1 - conj(a) z)`,
//! with `|a|/a := 1` when `a = 0`, so the zero at the origin contributes
//! `-z`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::{DiskPoint, EvaluableMap, MAX_MODULUS};
use crate::multiset::{PointMultiset, TAU_CLUSTER};
use crate::poly::{cluster_roots, Poly};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest degree for which coefficient expansions are attempted.
pub const DEFAULT_DEGREE_CAP: usize = 64;

/// Largest accepted `|B(root) - a|` after polishing a preimage.
pub const PREIMAGE_RESIDUAL: f64 = 1e-9;

/// Largest accepted `|eta| - 1`.
pub const UNIMODULAR_TOL: f64 = 1e-14;

/// Largest accepted probe mismatch when fixing the constant of a composition.
pub const PROBE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Factor {
    zero: Complex64,
    zero_conj: Complex64,
    phase: Complex64,
    // |a|^2 - 1, numerator of the factor's derivative
    dnum: f64,
}

impl Factor {
    fn new(zero: Complex64) -> Self {
        let r = zero.norm();
        let phase = if r == 0.0 { ONE } else { Complex64::new(r, 0.0) / zero };
        Factor {
            zero,
            zero_conj: zero.conj(),
            phase,
            dnum: zero.norm_sqr() - 1.0,
        }
    }

    #[inline]
    fn eval_deriv(&self, z: Complex64) -> (Complex64, Complex64) {
        let den = ONE - self.zero_conj * z;
        let v = self.phase * (self.zero - z) / den;
        let d = self.phase * self.dnum / (den * den);
        (v, d)
    }
}

/// A finite Blaschke product of degree at least one.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteBlaschke {
    eta: Complex64,
    zeros: PointMultiset,
    factors: Vec<Factor>,
}

impl FiniteBlaschke {
    pub fn new(eta: Complex64, zeros: PointMultiset) -> Result<Self> {
        if !eta.re.is_finite() || !eta.im.is_finite() || (eta.norm() - 1.0).abs() > UNIMODULAR_TOL {
            return Err(Error::NotUnimodular(eta.norm()));
        }
        if zeros.is_empty() {
            return Err(Error::EmptyZeroSet);
        }
        for (p, _) in zeros.iter() {
            if p.norm() > MAX_MODULUS {
                return Err(Error::OutsideDisk(p));
            }
        }
        let factors = zeros.expanded().into_iter().map(Factor::new).collect();
        Ok(FiniteBlaschke {
            eta: eta / eta.norm(),
            zeros,
            factors,
        })
    }

    /// Zeros listed with repetition; only bit-identical points are grouped.
    pub fn from_zeros(eta: Complex64, zeros: &[Complex64]) -> Result<Self> {
        Self::new(eta, PointMultiset::from_points_exact(zeros)?)
    }

    /// `z ↦ z`.
    pub fn identity() -> Self {
        Self::monomial(1)
    }

    /// `z ↦ z^d` (zero of order `d` at the origin, `eta = (-1)^d`).
    pub fn monomial(d: usize) -> Self {
        assert!(d >= 1, "monomial degree must be positive");
        let eta = if d % 2 == 0 { ONE } else { -ONE };
        Self::new(eta, PointMultiset::singleton(ZERO, d)).expect("valid monomial")
    }

    /// The involution `T_w(z) = (w - z)/(1 - conj(w) z)`.
    pub fn automorphism(w: DiskPoint) -> Self {
        let w = w.value();
        let eta = if w == ZERO { ONE } else { w / w.norm() };
        Self::new(eta, PointMultiset::singleton(w, 1)).expect("valid automorphism")
    }

    /// `z ↦ e^{i theta} z`.
    pub fn rotation(theta: f64) -> Self {
        Self::new(-Complex64::from_polar(1.0, theta), PointMultiset::singleton(ZERO, 1))
            .expect("valid rotation")
    }

    pub fn eta(&self) -> Complex64 {
        self.eta
    }

    pub fn zeros(&self) -> &PointMultiset {
        &self.zeros
    }

    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    /// `eta * prod |a|/a`, the constant in front of `N(z)/D(z)`.
    fn kappa(&self) -> Complex64 {
        self.factors.iter().fold(self.eta, |acc, f| acc * f.phase)
    }

    /// `prod (a - z)` over zeros (no constant).
    fn zero_poly(&self) -> Poly {
        self.factors
            .iter()
            .fold(Poly::constant(ONE), |acc, f| acc.mul_linear(f.zero, -ONE))
    }

    /// `prod (1 - conj(a) z)`.
    pub fn denominator(&self) -> Poly {
        self.factors
            .iter()
            .fold(Poly::constant(ONE), |acc, f| acc.mul_linear(ONE, -f.zero_conj))
    }

    /// Numerator with the constant folded in: `B = numerator / denominator`.
    pub fn numerator(&self) -> Poly {
        self.zero_poly().scale(self.kappa())
    }

    /// Solutions of `B(z) = a` in the disk, with multiplicity.
    pub fn preimages(&self, a: DiskPoint) -> Result<PointMultiset> {
        self.preimages_raw(a.value())
    }

    pub(crate) fn preimages_raw(&self, a: Complex64) -> Result<PointMultiset> {
        let p = self.numerator().sub(&self.denominator().scale(a));
        let mut entries = cluster_roots(&p, &p.eigen_roots()?, TAU_CLUSTER);
        for (r, m) in entries.iter_mut() {
            if *m == 1 {
                *r = self.polish_preimage(*r, a, crate::poly::POLISH_STEPS);
            }
            let residual = (self.eval(*r) - a).norm();
            if !(residual < PREIMAGE_RESIDUAL) || r.norm() >= 1.0 {
                return Err(Error::RootPolish { root: *r, residual });
            }
        }
        PointMultiset::from_entries(entries, 0.0)
    }

    fn polish_preimage(&self, mut z: Complex64, a: Complex64, steps: usize) -> Complex64 {
        let mut res = (self.eval(z) - a).norm();
        for _ in 0..steps {
            if res == 0.0 {
                break;
            }
            let (v, d) = self.eval_deriv(z);
            if d.norm() == 0.0 {
                break;
            }
            let cand = z - (v - a) / d;
            if cand.norm() >= 1.0 {
                break;
            }
            let rc = (self.eval(cand) - a).norm();
            if rc < res {
                z = cand;
                res = rc;
            } else {
                break;
            }
        }
        z
    }

    /// `Z_B(c)`: all solutions of `B(z) = B(c)`; contains `c`.
    pub fn zero_multiset(&self, c: DiskPoint) -> Result<PointMultiset> {
        let fiber = self.preimages_raw(self.eval(c.value()))?;
        let c = c.value();
        let distinct: Vec<(Complex64, usize)> = self.zeros.iter().collect();
        if distinct.iter().any(|&(a, _)| a == c) {
            return Ok(fiber);
        }
        // Fiber points near c can sit where B' is tiny; refine them on
        // log(B(z)/B(c)), which avoids the cancellation in B(z) - B(c).
        let raw: Vec<Complex64> = fiber.iter().map(|(z, _)| z).collect();
        let entries = fiber
            .iter()
            .enumerate()
            .map(|(i, (z, m))| {
                if m > 1 {
                    return (z, m);
                }
                let basin = raw
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, w)| (w - z).norm())
                    .fold(f64::INFINITY, f64::min)
                    / 2.0;
                (polish_log_ratio(&distinct, c, z, basin), 1)
            })
            .collect();
        PointMultiset::from_entries(entries, 0.0)
    }

    /// Zeros of `B'` in the disk with multiplicity (`degree - 1` of them).
    ///
    /// A zero of multiplicity `m` is a critical point of multiplicity
    /// `m - 1`; the remaining ones are the zeros of
    /// `B'/B = sum_k m_k (1 - |a_k|^2) / ((z - a_k)(1 - conj(a_k) z))`
    /// over the distinct zeros `a_k`. Splitting them off keeps repeated
    /// zeros out of the polynomial handed to the eigensolver.
    pub fn critical_set(&self) -> Result<PointMultiset> {
        let d = self.degree();
        if d == 1 {
            return Ok(PointMultiset::empty());
        }
        let distinct: Vec<(Complex64, usize)> = self.zeros.iter().collect();
        let mut r = Poly::constant(ZERO);
        for (k, &(a, m)) in distinct.iter().enumerate() {
            let weight = Complex64::new(m as f64 * (1.0 - a.norm_sqr()), 0.0);
            let term = distinct
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .fold(Poly::constant(weight), |acc, (_, &(b, _))| {
                    acc.mul_linear(-b, ONE).mul_linear(ONE, -b.conj())
                });
            r = r.add(&term);
        }
        let r = r.trim_leading(1e-14);
        let inner: Vec<Complex64> = r.eigen_roots()?.into_iter().filter(|z| z.norm() < 1.0).collect();
        let mut entries = cluster_roots(&r, &inner, TAU_CLUSTER);
        let raw: Vec<Complex64> = entries.iter().map(|&(z, _)| z).collect();
        for (i, (z, m)) in entries.iter_mut().enumerate() {
            if *m == 1 {
                let basin = raw
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, w)| (w - *z).norm())
                    .fold(1.0 - z.norm(), f64::min)
                    / 2.0;
                *z = polish_log_derivative(&distinct, *z, basin);
            }
        }
        entries.extend(distinct.iter().filter(|&&(_, m)| m > 1).map(|&(a, m)| (a, m - 1)));
        let found: usize = entries.iter().map(|(_, m)| m).sum();
        if found != d - 1 {
            return Err(Error::CriticalCount {
                expected: d - 1,
                found,
            });
        }
        PointMultiset::from_entries(entries, 0.0)
    }

    /// `self ∘ inner` as an explicit product, if `degree` stays within `cap`.
    pub fn compose(&self, inner: &FiniteBlaschke, cap: usize) -> Result<FiniteBlaschke> {
        let degree = self.degree() * inner.degree();
        if degree > cap {
            return Err(Error::DegreeCap { degree, cap });
        }
        let mut entries = Vec::with_capacity(degree);
        for (alpha, m) in self.zeros.iter() {
            for (p, k) in inner.preimages_raw(alpha)?.iter() {
                entries.push((p, k * m));
            }
        }
        let zeros = PointMultiset::from_entries(entries, TAU_CLUSTER)?;
        let unit = FiniteBlaschke::new(ONE, zeros)?;

        let target = |z: Complex64| self.eval(inner.eval(z));
        let mut probes = PROBES.to_vec();
        probes.sort_by(|a, b| unit.eval(*b).norm().total_cmp(&unit.eval(*a).norm()));
        let (p, q) = (probes[0], probes[1]);
        let eta = target(p) / unit.eval(p);
        let eta = eta / eta.norm();
        let out = FiniteBlaschke::new(eta, unit.zeros)?;
        let mismatch = (out.eval(q) - target(q)).norm();
        if !(mismatch < PROBE_TOL) {
            return Err(Error::ProbeMismatch(mismatch));
        }
        Ok(out)
    }

    pub fn to_record(&self) -> BlaschkeRecord {
        BlaschkeRecord {
            eta: [self.eta.re, self.eta.im],
            zeros: self.zeros.clone(),
        }
    }
}

const PROBES: [Complex64; 6] = [
    Complex64::new(0.0, 0.0),
    Complex64::new(0.31, 0.17),
    Complex64::new(-0.23, 0.29),
    Complex64::new(0.12, -0.41),
    Complex64::new(-0.37, -0.19),
    Complex64::new(0.44, 0.05),
];

impl EvaluableMap for FiniteBlaschke {
    fn eval_deriv(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut v = self.eta;
        let mut d = ZERO;
        for f in &self.factors {
            let (fv, fd) = f.eval_deriv(z);
            d = d * fv + v * fd;
            v *= fv;
        }
        (v, d)
    }

    fn eval(&self, z: Complex64) -> Complex64 {
        self.factors.iter().fold(self.eta, |acc, f| {
            acc * f.phase * (f.zero - z) / (ONE - f.zero_conj * z)
        })
    }
}

/// `outer ∘ inner` with the default degree cap.
pub fn compose_explicit(outer: &FiniteBlaschke, inner: &FiniteBlaschke) -> Result<FiniteBlaschke> {
    outer.compose(inner, DEFAULT_DEGREE_CAP)
}

/// `sum m (1 - |p|)` over a multiset.
pub fn blaschke_sum(points: &PointMultiset) -> f64 {
    points.blaschke_sum()
}

/// Text form of a [`FiniteBlaschke`]: `{"eta": [re, im], "zeros": [[re, im, m], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlaschkeRecord {
    pub eta: [f64; 2],
    pub zeros: PointMultiset,
}

impl TryFrom<BlaschkeRecord> for FiniteBlaschke {
    type Error = Error;
    fn try_from(r: BlaschkeRecord) -> Result<Self> {
        FiniteBlaschke::new(Complex64::new(r.eta[0], r.eta[1]), r.zeros)
    }
}

impl From<&FiniteBlaschke> for BlaschkeRecord {
    fn from(b: &FiniteBlaschke) -> Self {
        b.to_record()
    }
}

impl Serialize for FiniteBlaschke {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_record().serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiniteBlaschke {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = BlaschkeRecord::deserialize(d)?;
        FiniteBlaschke::try_from(r).map_err(serde::de::Error::custom)
    }
}

/// An ordered composition `f_k ∘ ... ∘ f_1`, evaluated factor by factor
/// (`factors[0]` is applied first).
#[derive(Debug, Clone, PartialEq)]
pub struct CompositionChain {
    factors: Vec<FiniteBlaschke>,
}

impl CompositionChain {
    pub fn new(factors: Vec<FiniteBlaschke>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Precondition("composition chain needs a factor".into()));
        }
        Ok(CompositionChain { factors })
    }

    pub fn single(b: FiniteBlaschke) -> Self {
        CompositionChain { factors: vec![b] }
    }

    /// Appends a factor applied after the current ones.
    pub fn then(mut self, b: FiniteBlaschke) -> Self {
        self.factors.push(b);
        self
    }

    pub fn factors(&self) -> &[FiniteBlaschke] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Product of the factor degrees (saturating).
    pub fn degree(&self) -> usize {
        self.factors
            .iter()
            .fold(1usize, |acc, f| acc.saturating_mul(f.degree()))
    }

    /// Solutions of `chain(z) = a`, pulled back one factor at a time so each
    /// root solve stays at the degree of a single factor.
    pub fn preimages(&self, a: Complex64, cap: usize) -> Result<PointMultiset> {
        let degree = self.degree();
        if degree > cap {
            return Err(Error::DegreeCap { degree, cap });
        }
        let mut level = PointMultiset::singleton(a, 1);
        for f in self.factors.iter().rev() {
            let mut next = Vec::with_capacity(level.cardinality() * f.degree());
            for (v, m) in level.iter() {
                for (p, k) in f.preimages_raw(v)?.iter() {
                    next.push((p, k * m));
                }
            }
            level = PointMultiset::from_entries(next, TAU_CLUSTER)?;
        }
        Ok(level)
    }

    /// Folds the chain into one explicit product if the degree fits `cap`.
    pub fn to_explicit(&self, cap: usize) -> Result<FiniteBlaschke> {
        let degree = self.degree();
        if degree > cap {
            return Err(Error::DegreeCap { degree, cap });
        }
        let mut acc = self.factors[0].clone();
        for f in &self.factors[1..] {
            acc = f.compose(&acc, cap)?;
        }
        Ok(acc)
    }
}

impl EvaluableMap for CompositionChain {
    fn eval_deriv(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut v = z;
        let mut d = ONE;
        for f in &self.factors {
            let (fv, fd) = f.eval_deriv(v);
            d *= fd;
            v = fv;
        }
        (v, d)
    }

    fn eval(&self, z: Complex64) -> Complex64 {
        self.factors.iter().fold(z, |v, f| f.eval(v))
    }
}

/// Newton on `h(z) = log(B(z)/B(c)) = sum_k m_k log1p(u_k(z))` with
/// `u_k = (c - z)(1 - |a_k|^2) / ((a_k - c)(1 - conj(a_k) z))`. Only used
/// where every `|u_k| < 1/2`, so the principal branch is the right one.
fn polish_log_ratio(zeros: &[(Complex64, usize)], c: Complex64, mut z: Complex64, basin: f64) -> Complex64 {
    let start = z;
    let h = |z: Complex64| -> Option<(Complex64, Complex64)> {
        let (mut f, mut df) = (ZERO, ZERO);
        for &(a, m) in zeros {
            let s = (1.0 - a.norm_sqr()) / (a - c);
            let den = ONE - a.conj() * z;
            let u = s * (c - z) / den;
            if u.norm() >= 0.5 {
                return None;
            }
            let du = s * (a.conj() * c - ONE) / (den * den);
            f += m as f64 * ln_1p(u);
            df += m as f64 * du / (ONE + u);
        }
        Some((f, df))
    };
    let Some((mut f, _)) = h(z) else { return start };
    for _ in 0..8 {
        let Some((_, df)) = h(z) else { break };
        let cand = z - f / df;
        match h(cand) {
            Some((fc, _)) if fc.norm() < f.norm() => {
                z = cand;
                f = fc;
            }
            _ => break,
        }
    }
    if (z - start).norm() < basin {
        z
    } else {
        start
    }
}

/// `log(1 + u)` without losing the digits of small `u`.
fn ln_1p(u: Complex64) -> Complex64 {
    Complex64::new(
        0.5 * (2.0 * u.re + u.norm_sqr()).ln_1p(),
        u.im.atan2(1.0 + u.re),
    )
}

/// Newton on `B'/B`, whose simple zeros in the disk are well conditioned
/// where the expanded polynomial is not (clustered zeros near the circle).
fn polish_log_derivative(zeros: &[(Complex64, usize)], mut z: Complex64, basin: f64) -> Complex64 {
    let start = z;
    for _ in 0..8 {
        let (mut f, mut df) = (ZERO, ZERO);
        for &(a, m) in zeros {
            let u = (z - a) * (ONE - a.conj() * z);
            let w = m as f64 * (1.0 - a.norm_sqr());
            f += w / u;
            df -= w * (ONE - 2.0 * a.conj() * z + a.norm_sqr()) / (u * u);
        }
        let step = f / df;
        if !step.is_finite() {
            break;
        }
        z -= step;
        if step.norm() <= 1e-16 * z.norm().max(1.0) {
            break;
        }
    }
    // keep the eigenvalue if Newton wandered towards a different root
    if z.is_finite() && (z - start).norm() < basin {
        z
    } else {
        start
    }
}
