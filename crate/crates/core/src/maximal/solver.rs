//! Finite Blaschke products with a prescribed critical set.
//!
//! `B(z) = z ∏ (w_k - z)/(1 - conj(w_k) z)` (one zero pinned at the origin,
//! constant 1) has critical points at the zeros in the disk of
//! `Q = N' D - N D'`, `N = z ∏ (w_k - z)`, `D = ∏ (1 - conj(w_k) z)`. The
//! unknowns `w ∈ ℂ^N` are found by continuation along the targets `t C`,
//! `t: t0 → 1`, with a Newton corrector on the smooth residual
//! `Q^{(i)}(t c_j)/i!`, `i < m_j`, scaled by the coefficient norm of `Q`.
//! For small `t` the solution is close to `t` times the nonzero roots of
//! `p(z) = ∫_0^z ∏ (s - c_j)^{m_j} ds`, the polynomial with critical set `C`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::blaschke::{FiniteBlaschke, DEFAULT_DEGREE_CAP};
use crate::error::{Error, Result};
use crate::multiset::PointMultiset;
use crate::poly::Poly;

use super::canonical::canonicalize;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// First continuation parameter (the Jacobian is singular at `t = 0`).
    pub t0: f64,
    pub initial_step: f64,
    pub max_step: f64,
    /// Continuation fails once the step drops below this.
    pub min_step: f64,
    /// Central-difference step for the Jacobian.
    pub fd_step: f64,
    /// Newton tolerance on the scaled residual at each `t`.
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Accepted final mismatch between computed and target critical points.
    pub residual_tol: f64,
    /// Zeros are kept inside `|w| < zero_bound` during the line search.
    pub zero_bound: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            t0: 0.05,
            initial_step: 0.1,
            max_step: 0.25,
            min_step: 1e-6,
            fd_step: 1e-7,
            newton_tol: 1e-11,
            max_newton: 30,
            residual_tol: 1e-9,
            zero_bound: 1.0 - 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverResult {
    /// Canonical form.
    pub product: FiniteBlaschke,
    /// Largest distance between matched computed and target critical points.
    pub residual: f64,
    pub homotopy_steps: usize,
    pub newton_iters: usize,
}

/// `Q = N' D - N D'` for zeros `{0} ∪ w` (constants dropped).
fn critical_poly(w: &[Complex64]) -> Poly {
    let mut num = Poly::linear(ZERO, ONE);
    let mut den = Poly::constant(ONE);
    for &wk in w {
        num = num.mul_linear(wk, -ONE);
        den = den.mul_linear(ONE, -wk.conj());
    }
    num.derivative().mul(&den).sub(&num.mul(&den.derivative()))
}

fn to_complex(x: &[f64]) -> Vec<Complex64> {
    x.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect()
}

fn to_real(w: &[Complex64]) -> Vec<f64> {
    w.iter().flat_map(|z| [z.re, z.im]).collect()
}

struct Problem<'a> {
    targets: &'a [(Complex64, usize)],
    opts: &'a SolverOptions,
}

impl Problem<'_> {
    fn residual(&self, x: &[f64], t: f64) -> Option<Vec<f64>> {
        let w = to_complex(x);
        if w.iter().any(|z| !(z.norm() < self.opts.zero_bound)) {
            return None;
        }
        let q = critical_poly(&w);
        let scale = q.norm2();
        if !(scale > 0.0) {
            return None;
        }
        let mut out = Vec::with_capacity(x.len());
        for &(c, m) in self.targets {
            for v in q.taylor_at(c * t, m) {
                out.push(v.re / scale);
                out.push(v.im / scale);
            }
        }
        Some(out)
    }

    fn jacobian(&self, x: &[f64], t: f64) -> Option<DMatrix<f64>> {
        let n = x.len();
        let h = self.opts.fd_step;
        let mut jac = DMatrix::zeros(n, n);
        let mut xp = x.to_vec();
        for j in 0..n {
            xp[j] = x[j] + h;
            let fp = self.residual(&xp, t)?;
            xp[j] = x[j] - h;
            let fm = self.residual(&xp, t)?;
            xp[j] = x[j];
            for i in 0..n {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        Some(jac)
    }

    /// Damped Newton at fixed `t`; stops below `tol` or when `polish` is set
    /// and no further decrease is possible.
    fn newton(&self, x: &mut Vec<f64>, t: f64, tol: f64, polish: bool, iters: &mut usize) -> Option<f64> {
        let mut f = self.residual(x, t)?;
        let mut norm = l2(&f);
        for _ in 0..self.opts.max_newton {
            if norm < tol {
                return Some(norm);
            }
            let jac = self.jacobian(x, t)?;
            let rhs = DVector::from_vec(f.clone());
            let step = jac
                .clone()
                .lu()
                .solve(&rhs)
                .filter(|s| s.iter().all(|v| v.is_finite()))
                .or_else(|| jac.svd(true, true).solve(&rhs, 1e-14).ok())?;
            *iters += 1;
            let mut alpha = 1.0;
            let mut accepted = false;
            while alpha >= 1.0 / 1024.0 {
                let cand: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a - alpha * s).collect();
                if let Some(fc) = self.residual(&cand, t) {
                    let nc = l2(&fc);
                    if nc < (1.0 - 1e-4 * alpha) * norm {
                        *x = cand;
                        f = fc;
                        norm = nc;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                return (norm < tol || polish).then_some(norm);
            }
        }
        (norm < tol || polish).then_some(norm)
    }
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Starting zeros at `t0`: `t0` times the roots of `p(z)/z`,
/// `p' = ∏ (z - c_j)^{m_j}`, `p(0) = 0`.
fn initial_zeros(targets: &[(Complex64, usize)], t0: f64) -> Result<Vec<Complex64>> {
    let mut dp = Poly::constant(ONE);
    for &(c, m) in targets {
        for _ in 0..m {
            dp = dp.mul_linear(-c, ONE);
        }
    }
    let p = dp.integral();
    let r = Poly::new(p.coeffs()[1..].to_vec());
    Ok(r.roots()?.into_iter().map(|z| z * t0).collect())
}

/// Pairs points of `a` and `b` greedily by global nearest distance and
/// returns the largest paired distance.
pub fn greedy_match_cost(a: &PointMultiset, b: &PointMultiset) -> Result<f64> {
    let mut xa = a.expanded();
    let mut xb = b.expanded();
    if xa.len() != xb.len() {
        return Err(Error::CriticalSetMismatch(format!(
            "{} computed points against {} targets",
            xa.len(),
            xb.len()
        )));
    }
    let mut cost: f64 = 0.0;
    while !xa.is_empty() {
        let mut best = (f64::INFINITY, 0, 0);
        for (i, p) in xa.iter().enumerate() {
            for (j, q) in xb.iter().enumerate() {
                let d = (p - q).norm();
                if d < best.0 {
                    best = (d, i, j);
                }
            }
        }
        cost = cost.max(best.0);
        xa.swap_remove(best.1);
        xb.swap_remove(best.2);
    }
    Ok(cost)
}

/// A finite Blaschke product of degree `|C| + 1` whose critical set is `C`,
/// in canonical form.
pub fn solve_maximal(c: &PointMultiset, opts: &SolverOptions) -> Result<SolverResult> {
    let n = c.cardinality();
    if n == 0 {
        return Ok(SolverResult {
            product: FiniteBlaschke::identity(),
            residual: 0.0,
            homotopy_steps: 0,
            newton_iters: 0,
        });
    }
    if n + 1 > DEFAULT_DEGREE_CAP {
        return Err(Error::DegreeCap {
            degree: n + 1,
            cap: DEFAULT_DEGREE_CAP,
        });
    }
    if let Some((p, _)) = c.iter().find(|(p, _)| p.norm() >= 1.0) {
        return Err(Error::OutsideDisk(p));
    }
    let targets = c.entries();
    let problem = Problem { targets, opts };
    let mut iters = 0;
    let mut steps = 0;

    let mut t = opts.t0;
    let mut x = to_real(&initial_zeros(targets, t)?);
    let stall = |t: f64, step: f64, x: &[f64]| Error::HomotopyStall {
        t,
        step,
        last_iterate: to_complex(x),
    };
    if problem.newton(&mut x, t, opts.newton_tol, false, &mut iters).is_none() {
        return Err(stall(t, 0.0, &x));
    }

    let mut dt = opts.initial_step;
    let mut prev: Option<(f64, Vec<f64>)> = None;
    while t < 1.0 {
        let t_next = (t + dt).min(1.0);
        let mut guess = match &prev {
            Some((tp, xp)) => {
                let s = (t_next - t) / (t - tp);
                x.iter().zip(xp).map(|(a, b)| a + s * (a - b)).collect()
            }
            None => x.iter().map(|a| a * t_next / t).collect::<Vec<f64>>(),
        };
        if problem
            .newton(&mut guess, t_next, opts.newton_tol, false, &mut iters)
            .is_some()
        {
            prev = Some((t, std::mem::replace(&mut x, guess)));
            t = t_next;
            steps += 1;
            dt = (dt * 1.5).min(opts.max_step);
        } else {
            dt *= 0.5;
            if dt < opts.min_step {
                return Err(stall(t, dt, &x));
            }
        }
    }
    problem.newton(&mut x, 1.0, 1e-15, true, &mut iters);

    let w = to_complex(&x);
    let mut zeros = vec![ZERO];
    zeros.extend_from_slice(&w);
    let raw = FiniteBlaschke::from_zeros(ONE, &zeros)?;
    let product = canonicalize(&raw)?;
    let residual = greedy_match_cost(&product.critical_set()?, c)?;
    if !(residual < opts.residual_tol) {
        return Err(Error::MatchingAmbiguity { cost: residual });
    }
    Ok(SolverResult {
        product,
        residual,
        homotopy_steps: steps,
        newton_iters: iters,
    })
}
