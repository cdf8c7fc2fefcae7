//! McLaughlin's two conditions for indestructibility, checked on finite
//! products and along forward iterates.
//!
//! For `a ≠ f(0)`:  `|(f(0) - a)/(1 - conj(a) f(0))| = ∏_{z ∈ f⁻¹(a)} |z|`.
//! At `a = f(0)`:   `|f̂(k)| / (1 - |f(0)|^2) = ∏_{z ∈ Z_f(0) ∖ {0}} |z|`,
//! `k` the order of `f - f(0)` at the origin.

use num_complex::Complex64;
use serde::Serialize;

use crate::blaschke::{CompositionChain, FiniteBlaschke, DEFAULT_DEGREE_CAP};
use crate::error::{Error, Result};
use crate::hyperbolic::{moebius, DiskPoint, EvaluableMap};
use crate::iteration::{prefix_chain, MapSequence};
use crate::multiset::PointMultiset;
use crate::par;
use crate::taylor;

/// Closeness to `f(0)` below which the first condition does not apply.
pub const VALUE_SEPARATION: f64 = 1e-10;

/// A self-map whose fibers can be enumerated.
pub trait FiberMap: EvaluableMap {
    fn fiber(&self, a: Complex64) -> Result<PointMultiset>;
}

impl FiberMap for FiniteBlaschke {
    fn fiber(&self, a: Complex64) -> Result<PointMultiset> {
        self.preimages_raw(a)
    }
}

impl FiberMap for CompositionChain {
    fn fiber(&self, a: Complex64) -> Result<PointMultiset> {
        self.preimages(a, DEFAULT_DEGREE_CAP)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    NonzeroValueA,
    ZeroValue,
}

impl Condition {
    pub fn as_str(self) -> &'static str {
        match self {
            Condition::NonzeroValueA => "nonzero_value_a",
            Condition::ZeroValue => "zero_value",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McLaughlinReport {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub condition: Condition,
    pub a: Option<DiskPoint>,
    /// Order of `f - f(0)` at the origin (second condition only).
    pub order: Option<usize>,
    pub truncation_note: Option<String>,
}

fn product_of_moduli(points: impl IntoIterator<Item = Complex64>) -> f64 {
    points.into_iter().map(|p| p.norm()).product()
}

/// First condition at `a ≠ f(0)`.
pub fn mclaughlin_nonzero<F: FiberMap + ?Sized>(f: &F, a: DiskPoint) -> Result<McLaughlinReport> {
    let f0 = f.eval(Complex64::new(0.0, 0.0));
    let av = a.value();
    if (av - f0).norm() < VALUE_SEPARATION {
        return Err(Error::Precondition(format!(
            "a = {av} coincides with f(0) = {f0}; use the zero-value condition"
        )));
    }
    let lhs = moebius(av, f0).norm();
    let rhs = product_of_moduli(f.fiber(av)?.expanded());
    Ok(McLaughlinReport {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        condition: Condition::NonzeroValueA,
        a: Some(a),
        order: None,
        truncation_note: None,
    })
}

/// Second condition, with `k` detected from Taylor coefficients at
/// threshold `taylor_tol`.
pub fn mclaughlin_zero<F: FiberMap + ?Sized>(f: &F, taylor_tol: f64) -> Result<McLaughlinReport> {
    let f0 = f.eval(Complex64::new(0.0, 0.0));
    let (k, coeff) = taylor::leading_term(f, taylor_tol)?;
    let lhs = coeff.value.norm() / (1.0 - f0.norm_sqr());
    let fiber = f.fiber(f0)?;
    let rhs = product_of_moduli(fiber.without_nearest_to_origin(k));
    let truncation_note = (coeff.status == taylor::TaylorStatus::Warning).then(|| {
        format!(
            "coefficient of order {k} carries error bound {:e}",
            coeff.error_bound
        )
    });
    Ok(McLaughlinReport {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        condition: Condition::ZeroValue,
        a: None,
        order: Some(k),
        truncation_note,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IbpRow {
    pub n: usize,
    pub report: McLaughlinReport,
}

/// Both conditions evaluated on `B_n = b_n ∘ ... ∘ b_1` for each requested
/// `n`. Rows are ordered by `n`, then the zero condition, then the `a`
/// samples in input order. Iterates beyond the degree cap, and samples that
/// hit `B_n(0)`, are skipped and listed in `notes`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IbpTable {
    pub rows: Vec<IbpRow>,
    pub notes: Vec<String>,
}

impl IbpTable {
    /// `(n, lhs)` for one condition and sample, in row order.
    pub fn trajectory(&self, condition: Condition, a: Option<DiskPoint>) -> Vec<(usize, f64)> {
        self.rows
            .iter()
            .filter(|r| r.report.condition == condition && r.report.a == a)
            .map(|r| (r.n, r.report.lhs))
            .collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.report.residual).fold(0.0, f64::max)
    }
}

pub fn verify_stability_ibp<S: MapSequence + ?Sized>(
    seq: &S,
    a_samples: &[DiskPoint],
    n_list: &[usize],
    taylor_tol: f64,
) -> Result<IbpTable> {
    let mut notes = Vec::new();
    let mut chains = Vec::new();
    for &n in n_list {
        let chain = prefix_chain(seq, n)?;
        if chain.degree() > DEFAULT_DEGREE_CAP {
            notes.push(format!(
                "n = {n}: degree {} exceeds cap {DEFAULT_DEGREE_CAP}, skipped",
                chain.degree()
            ));
            continue;
        }
        chains.push((n, chain));
    }

    // one job per (n, condition/sample); job 0 of each n is the zero condition
    let per_n = a_samples.len() + 1;
    let jobs: Vec<(usize, usize)> = (0..chains.len())
        .flat_map(|i| (0..per_n).map(move |j| (i, j)))
        .collect();
    let results = par::map_slice(&jobs, |&(i, j)| {
        let (n, chain) = &chains[i];
        if j == 0 {
            return mclaughlin_zero(chain, taylor_tol).map(|r| Some((*n, r)));
        }
        let a = a_samples[j - 1];
        if (a.value() - chain.eval(Complex64::new(0.0, 0.0))).norm() < VALUE_SEPARATION {
            return Ok(None);
        }
        mclaughlin_nonzero(chain, a).map(|r| Some((*n, r)))
    });

    let mut rows = Vec::with_capacity(results.len());
    for (&(i, j), res) in jobs.iter().zip(results) {
        match res? {
            Some((n, report)) => rows.push(IbpRow { n, report }),
            None => notes.push(format!(
                "n = {}: sample {} equals B_n(0), first condition skipped",
                chains[i].0,
                a_samples[j - 1]
            )),
        }
    }
    Ok(IbpTable { rows, notes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iteration::SequenceSpec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dp(re: f64, im: f64) -> DiskPoint {
        DiskPoint::from_re_im(re, im).unwrap()
    }

    const TOL: f64 = 1e-8;

    #[test]
    fn nonzero_condition_examples() {
        let w = dp(0.4, -0.3);
        let t = FiniteBlaschke::automorphism(w);
        let a = dp(-0.2, 0.5);
        let r = mclaughlin_nonzero(&t, a).unwrap();
        assert!((r.lhs - moebius(w.value(), a.value()).norm()).abs() < 1e-15);
        assert!(r.residual < 1e-12);

        let r = mclaughlin_nonzero(&FiniteBlaschke::monomial(2), dp(0.25, 0.0)).unwrap();
        assert!((r.lhs - 0.25).abs() < 1e-15 && (r.rhs - 0.25).abs() < 1e-15);

        let b = FiniteBlaschke::from_zeros(c(1.0, 0.0), &[c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
        for k in 0..20 {
            let a = DiskPoint::from_polar(0.05 + 0.045 * k as f64, 0.9 * k as f64).unwrap();
            assert!(mclaughlin_nonzero(&b, a).unwrap().residual < 1e-9);
        }
    }

    #[test]
    fn nonzero_condition_rejects_value_at_origin() {
        let t = FiniteBlaschke::automorphism(dp(0.4, 0.0));
        assert!(matches!(
            mclaughlin_nonzero(&t, dp(0.4, 0.0)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn zero_condition_examples() {
        let r = mclaughlin_zero(&FiniteBlaschke::monomial(2), TOL).unwrap();
        assert_eq!(r.order, Some(2));
        assert!((r.lhs - 1.0).abs() < 1e-12 && r.rhs == 1.0);

        let t = FiniteBlaschke::automorphism(dp(0.6, 0.2));
        let r = mclaughlin_zero(&t, TOL).unwrap();
        assert_eq!(r.order, Some(1));
        assert!((r.lhs - 1.0).abs() < 1e-12 && (r.rhs - 1.0).abs() < 1e-15);

        let b = FiniteBlaschke::from_zeros(c(1.0, 0.0), &[c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
        let r = mclaughlin_zero(&b, TOL).unwrap();
        assert_eq!(r.order, Some(1));
        assert!((r.lhs - 0.5).abs() < 1e-12 && (r.rhs - 0.5).abs() < 1e-14);
    }

    #[test]
    fn tangential_iterates_stay_exact() {
        let seq = SequenceSpec::Tangential { rate: 0.5 };
        let a = dp(0.3, 0.0);
        let table = verify_stability_ibp(&seq, &[a], &[1, 2, 3, 4], TOL).unwrap();
        assert_eq!(table.rows.len(), 8);
        assert!(table.notes.is_empty());
        assert!(table.max_residual() < 1e-8, "{}", table.max_residual());
        // B_n(0) = 0, so the first condition reads |a| = fiber product at every n
        let traj = table.trajectory(Condition::NonzeroValueA, Some(a));
        assert!(traj.iter().all(|(_, v)| (v - 0.3).abs() < 1e-15));
        // |B_n'(0)| = r_1 ... r_n settles with shrinking gaps
        let traj = table.trajectory(Condition::ZeroValue, None);
        let mut prod = 1.0;
        for (n, v) in &traj {
            prod *= 1.0 - 0.5f64.powi(*n as i32);
            assert!((v - prod).abs() < 1e-12);
        }
        let gaps: Vec<f64> = traj.windows(2).map(|w| (w[1].1 - w[0].1).abs()).collect();
        assert!(gaps.windows(2).all(|g| g[1] < g[0]), "{gaps:?}");
    }

    #[test]
    fn automorphism_iterates() {
        let seq = SequenceSpec::Automorphism { w: dp(0.2, 0.5) };
        let samples = [dp(0.1, 0.1), dp(-0.6, 0.2)];
        let table = verify_stability_ibp(&seq, &samples, &[1, 2, 3], TOL).unwrap();
        assert!(table.max_residual() < 1e-12);
    }

    #[test]
    fn single_map_delegates() {
        let seq = SequenceSpec::Squaring {};
        let table = verify_stability_ibp(&seq, &[], &[1], TOL).unwrap();
        let direct = mclaughlin_zero(&FiniteBlaschke::monomial(2), TOL).unwrap();
        assert_eq!(table.rows[0].report, direct);
    }

    #[test]
    fn cap_produces_partial_table() {
        let table = verify_stability_ibp(&SequenceSpec::Squaring {}, &[dp(0.3, 0.0)], &[2, 7], TOL).unwrap();
        assert_eq!(table.rows.len(), 2);
        assert_eq!(table.notes.len(), 1);
    }
}
