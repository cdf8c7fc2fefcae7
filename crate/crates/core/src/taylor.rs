//! Taylor coefficients at the origin from samples on a circle.
//!
//! `c_k ≈ (1/M) Σ_j f(ρ ω^j) ω^{-jk} / ρ^k` with `ω = e^{2πi/M}`, i.e. one
//! forward FFT of the samples. For a self-map of the disk every `|c_n| ≤ 1`,
//! so the aliased tail is at most `ρ^M / (1 - ρ^M)`; rounding adds roughly
//! `ε log2(M) max|f| / ρ^k`.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hyperbolic::EvaluableMap;

pub const DEFAULT_RADIUS: f64 = 0.5;
pub const MAX_ORDER: usize = 64;
/// Error bound above which a coefficient is flagged.
pub const WARN_BOUND: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TaylorStatus {
    Ok,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TaylorCoeff {
    pub value: Complex64,
    pub error_bound: f64,
    pub status: TaylorStatus,
}

/// Coefficients `0..count` from one set of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorExpansion {
    pub radius: f64,
    pub samples: usize,
    pub coeffs: Vec<TaylorCoeff>,
}

fn sample_count(count: usize) -> usize {
    (8 * count).max(256).next_power_of_two()
}

/// `f̂(0), ..., f̂(count-1)` of `f - shift`.
pub fn taylor_expansion<M: EvaluableMap + ?Sized>(
    f: &M,
    count: usize,
    radius: f64,
    shift: Complex64,
) -> Result<TaylorExpansion> {
    if !(radius > 0.0 && radius < 1.0) {
        return Err(Error::Domain(format!("radius {radius} outside (0, 1)")));
    }
    if count == 0 || count > MAX_ORDER + 1 {
        return Err(Error::Domain(format!(
            "coefficient count {count} outside 1..={}",
            MAX_ORDER + 1
        )));
    }
    let m = sample_count(count);
    let step = std::f64::consts::TAU / m as f64;
    let mut buf: Vec<Complex64> = (0..m)
        .map(|j| f.eval(Complex64::from_polar(radius, step * j as f64)) - shift)
        .collect();
    let max_abs = buf.iter().map(|v| v.norm()).fold(0.0, f64::max);
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);

    let tail = radius.powi(m as i32) / (1.0 - radius.powi(m as i32));
    let rounding = f64::EPSILON * ((m as f64).log2() + 1.0) * max_abs;
    let coeffs = (0..count)
        .map(|k| {
            let rk = radius.powi(k as i32);
            let error_bound = tail + rounding / rk;
            TaylorCoeff {
                value: buf[k] / (m as f64 * rk),
                error_bound,
                status: if error_bound > WARN_BOUND {
                    TaylorStatus::Warning
                } else {
                    TaylorStatus::Ok
                },
            }
        })
        .collect();
    Ok(TaylorExpansion {
        radius,
        samples: m,
        coeffs,
    })
}

/// `f̂(k)` via the discretized Cauchy integral on `|z| = radius`.
pub fn taylor_coeff<M: EvaluableMap + ?Sized>(f: &M, k: usize, radius: f64) -> Result<TaylorCoeff> {
    let e = taylor_expansion(f, k + 1, radius, Complex64::new(0.0, 0.0))?;
    Ok(e.coeffs[k])
}

/// Radius used for order detection: large enough that `ρ^{-k}` rounding
/// growth stays tame up to `k = MAX_ORDER`, small enough for a fast tail.
pub const ORDER_RADIUS: f64 = 0.8;

/// Order of the zero of `f - f(0)` at the origin: the first `k ≥ 1` with
/// `|f̂(k)| > tol`, reported only when that coefficient also clears
/// `10 tol`.
pub fn zero_order<M: EvaluableMap + ?Sized>(f: &M, tol: f64) -> Result<usize> {
    Ok(leading_term(f, tol)?.0)
}

/// The order `k` of [`zero_order`] together with `f̂(k)`.
pub fn leading_term<M: EvaluableMap + ?Sized>(f: &M, tol: f64) -> Result<(usize, TaylorCoeff)> {
    let f0 = f.eval(Complex64::new(0.0, 0.0));
    let e = taylor_expansion(f, MAX_ORDER + 1, ORDER_RADIUS, f0)?;
    for (k, c) in e.coeffs.iter().enumerate().skip(1) {
        let a = c.value.norm();
        if a > tol {
            if a > 10.0 * tol {
                return Ok((k, *c));
            }
            return Err(Error::Inconclusive(format!(
                "first coefficient above {tol:e} is |c_{k}| = {a:e}, inside the hysteresis band"
            )));
        }
    }
    Err(Error::Inconclusive(format!(
        "all coefficients up to order {MAX_ORDER} are below {tol:e}"
    )))
}
