//! Dense complex polynomials and their roots.
//!
//! Roots come from the eigenvalues of the companion matrix, followed by a few
//! guarded Newton steps. Exact zero low-order coefficients are split off as
//! exact roots at the origin.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::multiset::{link_groups, merge_close};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Newton steps applied to every eigenvalue.
pub const POLISH_STEPS: usize = 3;

/// Coefficients in ascending order: `c[0] + c[1] z + ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == ZERO {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(ZERO);
        }
        Poly { coeffs }
    }

    pub fn constant(c: Complex64) -> Self {
        Poly::new(vec![c])
    }

    /// `c0 + c1 z`.
    pub fn linear(c0: Complex64, c1: Complex64) -> Self {
        Poly::new(vec![c0, c1])
    }

    /// Monic `prod (z - r)`.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        roots
            .iter()
            .fold(Poly::constant(ONE), |acc, &r| acc.mul_linear(-r, ONE))
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    /// Multiplies by `(c0 + c1 z)` in place of a full convolution.
    pub fn mul_linear(&self, c0: Complex64, c1: Complex64) -> Self {
        let n = self.coeffs.len();
        let mut out = vec![ZERO; n + 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            out[i] += a * c0;
            out[i + 1] += a * c1;
        }
        Poly::new(out)
    }

    pub fn mul(&self, other: &Poly) -> Self {
        let mut out = vec![ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn add(&self, other: &Poly) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let out = (0..n)
            .map(|i| {
                self.coeffs.get(i).copied().unwrap_or(ZERO)
                    + other.coeffs.get(i).copied().unwrap_or(ZERO)
            })
            .collect();
        Poly::new(out)
    }

    pub fn sub(&self, other: &Poly) -> Self {
        self.add(&other.scale(-ONE))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Poly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Poly::constant(ZERO);
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    /// Antiderivative vanishing at 0.
    pub fn integral(&self) -> Self {
        let mut out = vec![ZERO];
        out.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| c / (i + 1) as f64),
        );
        Poly::new(out)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    /// `(p(z), p'(z))` by a single Horner pass.
    pub fn eval_deriv(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = ZERO;
        let mut d = ZERO;
        for &c in self.coeffs.iter().rev() {
            d = d * z + p;
            p = p * z + c;
        }
        (p, d)
    }

    /// `sum |c_i| |z|^i`, the natural scale for the rounding error of `p(z)`.
    pub fn abs_eval(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn norm2(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// First `count` Taylor coefficients `p^(i)(c) / i!` at `c`.
    pub fn taylor_at(&self, c: Complex64, count: usize) -> Vec<Complex64> {
        // repeated synthetic division by (z - c)
        let mut work = self.coeffs.clone();
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            if work.is_empty() {
                out.push(ZERO);
                continue;
            }
            let n = work.len();
            let mut q = vec![ZERO; n.saturating_sub(1)];
            let mut acc = ZERO;
            for i in (0..n).rev() {
                acc = acc * c + work[i];
                if i > 0 {
                    q[i - 1] = acc;
                }
            }
            out.push(acc);
            work = q;
        }
        out
    }

    /// Drops leading coefficients below `rel_tol * |p|_inf`. For roots in the
    /// closed unit disk this is a backward perturbation of the same size.
    pub fn trim_leading(&self, rel_tol: f64) -> Self {
        let cut = rel_tol * self.norm_inf();
        let mut c = self.coeffs.clone();
        while c.len() > 1 && c.last().unwrap().norm() <= cut {
            c.pop();
        }
        Poly::new(c)
    }

    /// All roots with multiplicity (`degree()` values), each polished.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        Ok(self
            .eigen_roots()?
            .into_iter()
            .map(|z| newton_polish(self, z, POLISH_STEPS))
            .collect())
    }

    /// Companion-matrix eigenvalues, unpolished. Near a multiple root they
    /// keep the symmetric structure that [`cluster_roots`] relies on.
    pub fn eigen_roots(&self) -> Result<Vec<Complex64>> {
        if self.is_zero() {
            return Err(Error::Degenerate("roots of the zero polynomial".into()));
        }
        let low_zeros = self.coeffs.iter().take_while(|c| **c == ZERO).count();
        let mut roots = vec![ZERO; low_zeros];
        let q = Poly::new(self.coeffs[low_zeros..].to_vec());
        let n = q.degree();
        match n {
            0 => {}
            1 => roots.push(-q.coeffs[0] / q.coeffs[1]),
            _ => {
                let lead = q.coeffs[n];
                let mut m = DMatrix::<Complex64>::zeros(n, n);
                for i in 1..n {
                    m[(i, i - 1)] = ONE;
                }
                for i in 0..n {
                    m[(i, n - 1)] = -q.coeffs[i] / lead;
                }
                let eig = m.schur().eigenvalues().ok_or(Error::Eigen(n))?;
                roots.extend(eig.iter().copied());
            }
        }
        Ok(roots)
    }
}

/// Newton steps on `p`, each accepted only if it lowers `|p|`.
pub fn newton_polish(p: &Poly, mut z: Complex64, steps: usize) -> Complex64 {
    let mut fz = p.eval(z).norm();
    for _ in 0..steps {
        if fz == 0.0 {
            break;
        }
        let (v, d) = p.eval_deriv(z);
        if d.norm() == 0.0 {
            break;
        }
        let cand = z - v / d;
        let fc = p.eval(cand).norm();
        if fc.is_finite() && fc < fz {
            z = cand;
            fz = fc;
        } else {
            break;
        }
    }
    z
}

/// An `m`-fold root of `p` is a simple root of `p^(m-1)`; polish there.
fn refine_multiple_root(p: &Poly, z: Complex64, m: usize) -> Complex64 {
    let mut q = p.clone();
    for _ in 1..m {
        q = q.derivative();
    }
    let refined = newton_polish(&q, z, 6);
    if (refined - z).norm() <= LOOSE_RADIUS {
        refined
    } else {
        z
    }
}

fn polish_entry(p: &Poly, (z, m): (Complex64, usize)) -> (Complex64, usize) {
    if m == 1 {
        (newton_polish(p, z, POLISH_STEPS), 1)
    } else {
        (refine_multiple_root(p, z, m), m)
    }
}

/// Radius within which nearby roots are considered for a multiple root.
const LOOSE_RADIUS: f64 = 1e-3;

/// Largest relative size of the Taylor coefficients of orders below `m - 1`
/// at the candidate centre of an `m`-root cluster for it to count as one
/// `m`-fold root. For `m` distinct roots at spacing `δ` the order `m - 2`
/// coefficient is of size `δ^2` times the order `m` one, so genuinely
/// distinct roots further apart than a few 1e-6 stay separate.
const MULTIPLE_ROOT_RESIDUAL: f64 = 1e-11;

/// Groups computed roots of `p` into `(point, multiplicity)` pairs.
///
/// Roots within `tau` always merge. A wider group (up to 1e-3) merges only
/// when the low-order Taylor coefficients of `p` at its centroid are at
/// rounding level, which is how the scattered eigenvalues of a multiple
/// root show up.
pub fn cluster_roots(p: &Poly, roots: &[Complex64], tau: f64) -> Vec<(Complex64, usize)> {
    let tight = merge_close(roots.iter().map(|&r| (r, 1)).collect(), tau);
    if tight.len() < 2 {
        return tight.into_iter().map(|e| polish_entry(p, e)).collect();
    }
    let points: Vec<Complex64> = tight.iter().map(|e| e.0).collect();
    let labels = link_groups(&points, LOOSE_RADIUS);
    let groups = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<(Complex64, usize)>> = vec![Vec::new(); groups];
    for (&e, &g) in tight.iter().zip(&labels) {
        members[g].push(e);
    }
    let mut out = Vec::with_capacity(tight.len());
    for group in members {
        if group.len() == 1 {
            out.push(polish_entry(p, group[0]));
            continue;
        }
        let m: usize = group.iter().map(|(_, k)| k).sum();
        let centroid = group.iter().map(|(q, k)| q * *k as f64).sum::<Complex64>() / m as f64;
        // The centroid is pulled off by perturbations of the other roots, so
        // test at the nearby root of p^(m-1) instead, where the order m - 1
        // coefficient vanishes. p(c) alone is no scale: at a multiple root
        // it is rounding noise.
        let candidate = refine_multiple_root(p, centroid, m);
        let radius = candidate.norm().max(1.0);
        let scale = p.coeffs.iter().rev().fold(0.0, |acc, c| acc * radius + c.norm());
        let local = p.taylor_at(candidate, m - 1);
        let rel = if scale > 0.0 {
            local.iter().map(|t| t.norm()).fold(0.0, f64::max) / scale
        } else {
            0.0
        };
        if rel <= MULTIPLE_ROOT_RESIDUAL {
            out.push((candidate, m));
        } else {
            out.extend(group.into_iter().map(|e| polish_entry(p, e)));
        }
    }
    out.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn horner_and_derivative_agree() {
        let p = Poly::new(vec![c(1.0, 0.0), c(-2.0, 1.0), c(0.5, 0.0), c(0.0, 3.0)]);
        let z = c(0.3, -0.7);
        let (v, d) = p.eval_deriv(z);
        assert!((v - p.eval(z)).norm() < 1e-15);
        assert!((d - p.derivative().eval(z)).norm() < 1e-14);
    }

    #[test]
    fn taylor_shift_matches_derivatives() {
        let p = Poly::from_roots(&[c(0.2, 0.1), c(-0.4, 0.0), c(0.1, -0.6)]);
        let at = c(0.05, 0.3);
        let t = p.taylor_at(at, 4);
        assert!((t[0] - p.eval(at)).norm() < 1e-15);
        assert!((t[1] - p.derivative().eval(at)).norm() < 1e-14);
        assert!((t[2] - p.derivative().derivative().eval(at) / 2.0).norm() < 1e-14);
        assert!((t[3] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn integral_inverts_derivative() {
        let p = Poly::new(vec![c(0.0, 0.0), c(1.0, 1.0), c(-3.0, 0.0)]);
        assert!(p.derivative().integral().sub(&p).norm_inf() < 1e-15);
    }

    #[test]
    fn roots_of_known_polynomials() {
        let r = sorted(Poly::from_roots(&[c(0.5, 0.0), c(-0.5, 0.0)]).roots().unwrap());
        assert!((r[0] - c(-0.5, 0.0)).norm() < 1e-15);
        assert!((r[1] - c(0.5, 0.0)).norm() < 1e-15);

        let want = [c(0.3, 0.2), c(-0.7, 0.1), c(0.1, -0.9), c(2.0, 1.0)];
        let got = Poly::from_roots(&want).roots().unwrap();
        for w in want {
            assert!(got.iter().any(|g| (g - w).norm() < 1e-13), "missing {w}");
        }
    }

    #[test]
    fn exact_zero_coefficients_give_exact_origin_roots() {
        let p = Poly::new(vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(p.roots().unwrap(), vec![c(0.0, 0.0); 3]);
    }

    #[test]
    fn multiple_root_clusters_with_correct_multiplicity() {
        let r0 = c(0.31, -0.22);
        let p = Poly::from_roots(&[r0, r0, r0, c(-0.5, 0.4)]);
        let roots = p.eigen_roots().unwrap();
        let cl = cluster_roots(&p, &roots, 1e-7);
        assert_eq!(cl.len(), 2, "{cl:?} roots {roots:?}");
        let (pt, m) = cl.iter().copied().find(|(_, m)| *m == 3).unwrap();
        assert_eq!(m, 3);
        assert!((pt - r0).norm() < 1e-9, "{}", (pt - r0).norm());
    }

    #[test]
    fn distinct_close_roots_stay_apart() {
        let p = Poly::from_roots(&[c(0.1, 0.0), c(0.1 + 1e-4, 0.0)]);
        let roots = p.eigen_roots().unwrap();
        assert_eq!(cluster_roots(&p, &roots, 1e-7).len(), 2);
        // three distinct roots 1e-5 apart are not a triple root either
        let p = Poly::from_roots(&[c(0.2, 0.0), c(0.2 + 1e-5, 0.0), c(0.2, 1e-5)]);
        let roots = p.eigen_roots().unwrap();
        assert_eq!(cluster_roots(&p, &roots, 1e-7).len(), 3);
    }

    #[test]
    fn multiple_root_survives_coefficient_noise() {
        // a triple root at the origin with coefficients perturbed at 1e-13
        let mut p = Poly::from_roots(&[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.02, 0.001)]);
        let noisy: Vec<Complex64> = p.coeffs().iter().enumerate().map(|(i, &a)| a + c(1e-13 * i as f64, -1e-13)).collect();
        p = Poly::new(noisy);
        let cl = cluster_roots(&p, &p.eigen_roots().unwrap(), 1e-7);
        assert_eq!(cl.len(), 2, "{cl:?}");
        assert!(cl.iter().any(|&(z, m)| m == 3 && z.norm() < 1e-4));
    }

    #[test]
    fn trim_leading_drops_tiny_top() {
        let p = Poly::new(vec![c(1.0, 0.0), c(1.0, 0.0), c(1e-17, 0.0)]);
        assert_eq!(p.trim_leading(1e-14).degree(), 1);
    }
}
