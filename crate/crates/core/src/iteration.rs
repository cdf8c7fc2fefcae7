//! Forward iteration `F_n = f_n ∘ ... ∘ f_1` of sequences of finite
//! Blaschke products.

use std::sync::Mutex;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::blaschke::{CompositionChain, FiniteBlaschke, DEFAULT_DEGREE_CAP};
use crate::error::{Error, Result};
use crate::hyperbolic::{hyp_dist, hyp_distortion, moebius, DiskPoint, EvaluableMap, MAX_MODULUS};
use crate::multiset::{PointMultiset, TAU_CLUSTER};
use crate::par;
use crate::taylor;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// An index-deterministic sequence `n ↦ f_n`, `n ≥ 1`.
pub trait MapSequence: Sync {
    /// `f_n`; repeated calls with the same `n` return the same map.
    fn term(&self, n: usize) -> Result<FiniteBlaschke>;

    /// Number of available terms, `None` for unbounded generators.
    fn declared_len(&self) -> Option<usize> {
        None
    }
}

impl<S: MapSequence + ?Sized> MapSequence for &S {
    fn term(&self, n: usize) -> Result<FiniteBlaschke> {
        (**self).term(n)
    }
    fn declared_len(&self) -> Option<usize> {
        (**self).declared_len()
    }
}

fn check_index<S: MapSequence + ?Sized>(seq: &S, n: usize) -> Result<()> {
    match seq.declared_len() {
        _ if n == 0 => Err(Error::IndexOutOfRange { index: 0, len: seq.declared_len().unwrap_or(usize::MAX) }),
        Some(len) if n > len => Err(Error::IndexOutOfRange { index: n, len }),
        _ => Ok(()),
    }
}

/// Named families, as read from config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceSpec {
    /// `f_n(z) = z^2`.
    Squaring {},
    /// `f_n(z) = z (r_n + z)/(1 + r_n z)` with `r_n = 1 - rate^n`, capped at
    /// the largest admissible modulus (past that the map is the identity
    /// to working precision).
    Tangential { rate: f64 },
    /// `f_n(z) = e^{i angle} z`.
    Rotation { angle: f64 },
    /// `f_n = T_w` for every `n`.
    Automorphism { w: DiskPoint },
    /// `f_n = maps[n-1]`.
    Explicit { maps: Vec<FiniteBlaschke> },
}

impl SequenceSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            SequenceSpec::Tangential { rate } if !(*rate > 0.0 && *rate < 1.0) => Err(
                Error::Precondition(format!("tangential rate {rate} outside (0, 1)")),
            ),
            SequenceSpec::Rotation { angle } if !angle.is_finite() => {
                Err(Error::Precondition("rotation angle must be finite".into()))
            }
            SequenceSpec::Explicit { maps } if maps.is_empty() => {
                Err(Error::Precondition("explicit sequence needs at least one map".into()))
            }
            _ => Ok(()),
        }
    }
}

/// `z (r + z)/(1 + r z)`: zeros `{0, -r}`, derivative `r` at the origin.
pub fn tangential_map(r: f64) -> Result<FiniteBlaschke> {
    FiniteBlaschke::from_zeros(-ONE, &[Complex64::new(0.0, 0.0), Complex64::new(-r, 0.0)])
}

impl MapSequence for SequenceSpec {
    fn term(&self, n: usize) -> Result<FiniteBlaschke> {
        check_index(self, n)?;
        match self {
            SequenceSpec::Squaring {} => Ok(FiniteBlaschke::monomial(2)),
            SequenceSpec::Tangential { rate } => tangential_map((1.0 - rate.powi(n as i32)).min(MAX_MODULUS)),
            SequenceSpec::Rotation { angle } => Ok(FiniteBlaschke::rotation(*angle)),
            SequenceSpec::Automorphism { w } => Ok(FiniteBlaschke::automorphism(*w)),
            SequenceSpec::Explicit { maps } => Ok(maps[n - 1].clone()),
        }
    }

    fn declared_len(&self) -> Option<usize> {
        match self {
            SequenceSpec::Explicit { maps } => Some(maps.len()),
            _ => None,
        }
    }
}

/// The normalized sequence `f̃_n = T_{F_n(a)} ∘ f_n ∘ T_{F_{n-1}(a)}`
/// (`F_0 = id`), so that every `f̃_n` fixes the origin.
pub struct Normalized<S> {
    inner: S,
    a: DiskPoint,
    orbit: Mutex<Vec<Complex64>>,
}

impl<S: MapSequence> Normalized<S> {
    pub fn new(inner: S, a: DiskPoint) -> Self {
        Normalized {
            inner,
            a,
            orbit: Mutex::new(vec![a.value()]),
        }
    }

    pub fn base_point(&self) -> DiskPoint {
        self.a
    }

    /// `F_n(a)` of the underlying sequence.
    pub fn orbit_point(&self, n: usize) -> Result<Complex64> {
        let mut orbit = self.orbit.lock().expect("orbit cache poisoned");
        while orbit.len() <= n {
            let k = orbit.len();
            let next = self.inner.term(k)?.eval(orbit[k - 1]);
            orbit.push(next);
        }
        Ok(orbit[n])
    }
}

impl<S: MapSequence> MapSequence for Normalized<S> {
    fn term(&self, n: usize) -> Result<FiniteBlaschke> {
        check_index(self, n)?;
        let b = DiskPoint::new(self.orbit_point(n - 1)?)?;
        let c = DiskPoint::new(self.orbit_point(n)?)?;
        let f = self.inner.term(n)?;
        let inner = f.compose(&FiniteBlaschke::automorphism(b), DEFAULT_DEGREE_CAP)?;
        FiniteBlaschke::automorphism(c).compose(&inner, DEFAULT_DEGREE_CAP)
    }

    fn declared_len(&self) -> Option<usize> {
        self.inner.declared_len()
    }
}

pub fn normalize_sequence<S: MapSequence>(seq: S, a: DiskPoint) -> Normalized<S> {
    Normalized::new(seq, a)
}

/// `f_1, ..., f_n`.
pub fn terms<S: MapSequence + ?Sized>(seq: &S, n: usize) -> Result<Vec<FiniteBlaschke>> {
    (1..=n).map(|k| seq.term(k)).collect()
}

/// `F_n(z)`.
pub fn forward_eval<S: MapSequence + ?Sized>(seq: &S, n: usize, z: DiskPoint) -> Result<Complex64> {
    Ok(forward_eval_deriv(seq, n, z)?.0)
}

/// `(F_n(z), F_n'(z))`.
pub fn forward_eval_deriv<S: MapSequence + ?Sized>(
    seq: &S,
    n: usize,
    z: DiskPoint,
) -> Result<(Complex64, Complex64)> {
    check_index(seq, n)?;
    Ok(prefix_chain(seq, n)?.eval_deriv(z.value()))
}

/// `F_n` as a lazy chain.
pub fn prefix_chain<S: MapSequence + ?Sized>(seq: &S, n: usize) -> Result<CompositionChain> {
    tail_map(seq, 0, n)
}

/// `h_{N,n} = f_{N+n} ∘ ... ∘ f_{N+1}`.
pub fn tail_map<S: MapSequence + ?Sized>(seq: &S, big_n: usize, n: usize) -> Result<CompositionChain> {
    if n == 0 {
        return Err(Error::Precondition("tail length must be at least 1".into()));
    }
    check_index(seq, big_n + n)?;
    CompositionChain::new(
        (big_n + 1..=big_n + n)
            .map(|k| seq.term(k))
            .collect::<Result<_>>()?,
    )
}

/// `F_1(z), ..., F_n(z)`.
pub fn orbit<S: MapSequence + ?Sized>(seq: &S, z: DiskPoint, n: usize) -> Result<Vec<Complex64>> {
    let mut v = z.value();
    (1..=n)
        .map(|k| {
            v = seq.term(k)?.eval(v);
            Ok(v)
        })
        .collect()
}

/// `λ_n(z) = |F_n'(z)| / (1 - |F_n(z)|^2)` for `n = 1..=n_max`.
pub fn density_trajectory<S: MapSequence + ?Sized>(
    seq: &S,
    z: DiskPoint,
    n_max: usize,
) -> Result<Vec<f64>> {
    let mut v = z.value();
    let mut d = ONE;
    (1..=n_max)
        .map(|k| {
            let (fv, fd) = seq.term(k)?.eval_deriv(v);
            d *= fd;
            v = fv;
            Ok(crate::hyperbolic::density_of(v, d))
        })
        .collect()
}

/// `s_k = Σ_{n ≤ k} (1 - D_h f_n(a))` for `k = 1..=big_n`.
pub fn criterion_partial_sums<S: MapSequence + ?Sized>(
    seq: &S,
    a: DiskPoint,
    big_n: usize,
) -> Result<Vec<f64>> {
    if big_n == 0 {
        return Err(Error::Precondition("need at least one partial sum".into()));
    }
    let mut s = 0.0;
    (1..=big_n)
        .map(|n| {
            let d = hyp_distortion(&seq.term(n)?, a)?;
            s += (1.0 - d).clamp(0.0, 1.0);
            Ok(s)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquisummabilityBounds {
    pub lower: f64,
    pub upper: f64,
    pub ratio: f64,
    /// Curvature -1 distance `2 hyp_dist(a, F_{n-1}(a))` used in the bracket.
    pub distance: f64,
    pub holds: bool,
}

/// Compares `(1 - D_h f_n(F_{n-1}(a))) / (1 - D_h f_n(a))` with
/// `e^{±2ρ}`, `ρ` the distance of curvature -1 between `a` and
/// `F_{n-1}(a)`.
pub fn equisummability_bounds<S: MapSequence + ?Sized>(
    seq: &S,
    a: DiskPoint,
    n: usize,
) -> Result<EquisummabilityBounds> {
    check_index(seq, n)?;
    let prev = if n == 1 {
        a
    } else {
        DiskPoint::new(forward_eval(seq, n - 1, a)?)?
    };
    let f = seq.term(n)?;
    let den = 1.0 - hyp_distortion(&f, a)?;
    if den < 1e-14 {
        return Err(Error::Degenerate(format!(
            "1 - D_h f_{n}(a) = {den:e}: distortion is 1 at a"
        )));
    }
    let num = 1.0 - hyp_distortion(&f, prev)?;
    let rho = 2.0 * hyp_dist(a, prev);
    let (lower, upper) = ((-2.0 * rho).exp(), (2.0 * rho).exp());
    let ratio = num / den;
    Ok(EquisummabilityBounds {
        lower,
        upper,
        ratio,
        distance: rho,
        holds: lower - 1e-10 <= ratio && ratio <= upper + 1e-10,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceStatus {
    ConvergedNonconstant,
    ConvergedConstant,
    NotConvergedAtCutoff,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub status: ConvergenceStatus,
    pub criterion_partial_sums: Vec<f64>,
    pub grid_cauchy_gap: f64,
    pub limit_samples: Vec<Complex64>,
    pub n_used: usize,
    /// `s_{n_max} - s_{n_max/2}`.
    pub series_tail: f64,
    /// Largest pairwise distance between limit samples.
    pub limit_variation: f64,
    pub diagnostics: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceOptions {
    pub lags: Vec<usize>,
    pub tol_series: f64,
    /// Point at which the series is evaluated.
    pub series_point: DiskPoint,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        ConvergenceOptions {
            lags: vec![1, 2, 5, 10],
            tol_series: 1e-3,
            series_point: DiskPoint::ORIGIN,
        }
    }
}

pub const DEFAULT_N_MAX: usize = 200;
pub const DEFAULT_TOL: f64 = 1e-9;

/// 60 points: radii {0.3, 0.6, 0.9} × 20 angles.
pub fn default_grid() -> Vec<DiskPoint> {
    [0.3, 0.6, 0.9]
        .iter()
        .flat_map(|&r| {
            (0..20).map(move |k| {
                DiskPoint::from_polar(r, std::f64::consts::TAU * k as f64 / 20.0).expect("inside")
            })
        })
        .collect()
}

/// Grid-and-lag Cauchy test combined with the series criterion.
pub fn detect_convergence<S: MapSequence + ?Sized>(
    seq: &S,
    grid: &[DiskPoint],
    n_max: usize,
    tol: f64,
    opts: &ConvergenceOptions,
) -> Result<ConvergenceReport> {
    if grid.is_empty() {
        return Err(Error::Precondition("empty grid".into()));
    }
    if let Some(p) = grid.iter().find(|p| p.norm() > 0.9 + 1e-12) {
        return Err(Error::Precondition(format!("grid point {p} outside |z| <= 0.9")));
    }
    if n_max == 0 || opts.lags.is_empty() {
        return Err(Error::Precondition("n_max and lags must be nonempty".into()));
    }
    let max_lag = *opts.lags.iter().max().expect("nonempty");
    let horizon = n_max + max_lag;
    let available = seq.declared_len().map_or(horizon, |l| l.min(horizon));
    let maps = terms(seq, available)?;

    // rows[i][n] = F_n(grid[i]), n = 0..=available
    let rows: Vec<Vec<Complex64>> = par::map_slice(grid, |z| {
        let mut v = z.value();
        let mut row = Vec::with_capacity(available + 1);
        row.push(v);
        for f in &maps {
            v = f.eval(v);
            row.push(v);
        }
        row
    });
    let gap_at = |n: usize| -> Option<f64> {
        let mut g: f64 = 0.0;
        for &m in &opts.lags {
            if n + m > available {
                return None;
            }
            for row in &rows {
                g = g.max((row[n + m] - row[n]).norm());
            }
        }
        Some(g)
    };
    let mut best = (f64::INFINITY, n_max.min(available));
    let mut cauchy_at = None;
    for n in 1..=n_max {
        let Some(g) = gap_at(n) else { break };
        if g < best.0 {
            best = (g, n);
        }
        if g < tol {
            cauchy_at = Some((g, n));
            break;
        }
    }

    let series_len = n_max.min(available);
    let sums = criterion_partial_sums(seq, opts.series_point, series_len)?;
    let half = (series_len / 2).max(1);
    let series_tail = sums[series_len - 1] - sums[half - 1];
    let bounded = series_tail < opts.tol_series;

    let (gap, n_used) = cauchy_at.unwrap_or(best);
    let limit_at = match cauchy_at {
        Some((_, n)) => (n + max_lag).min(available),
        None => series_len,
    };
    let limit_samples: Vec<Complex64> = rows.iter().map(|r| r[limit_at]).collect();
    let mut variation: f64 = 0.0;
    for (i, p) in limit_samples.iter().enumerate() {
        for q in &limit_samples[i + 1..] {
            variation = variation.max((p - q).norm());
        }
    }
    let varies = variation > 10.0 * tol;

    let (status, diagnostics) = match (cauchy_at.is_some(), bounded, varies) {
        (false, _, _) => (
            ConvergenceStatus::NotConvergedAtCutoff,
            Some(format!(
                "no n <= {n_max} with grid Cauchy gap below {tol:e}; smallest gap {:e} at n = {}",
                best.0, best.1
            )),
        ),
        (true, true, true) => (ConvergenceStatus::ConvergedNonconstant, None),
        (true, false, false) => (ConvergenceStatus::ConvergedConstant, None),
        (true, bounded, varies) => (
            ConvergenceStatus::NotConvergedAtCutoff,
            Some(format!(
                "signals disagree: series bounded = {bounded} (tail {series_tail:e}), \
                 limit varies = {varies} (spread {variation:e})"
            )),
        ),
    };
    Ok(ConvergenceReport {
        status,
        criterion_partial_sums: sums,
        grid_cauchy_gap: gap,
        limit_samples,
        n_used,
        series_tail,
        limit_variation: variation,
        diagnostics,
    })
}

pub const ORDER_TOL: f64 = 1e-8;

/// `K_n`: order of the zero of `F_n - F_n(0)` at the origin.
pub fn order_of_zero<S: MapSequence + ?Sized>(seq: &S, n: usize, tol: f64) -> Result<usize> {
    taylor::zero_order(&prefix_chain(seq, n)?, tol)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroMonotonicity {
    pub included: bool,
    pub product_n: f64,
    pub product_next: f64,
    pub monotone: bool,
    pub fiber_n: PointMultiset,
    pub fiber_next: PointMultiset,
}

/// `Z_{F_n}(c)`, pulled back through the chain factor by factor.
pub fn chain_fiber(chain: &CompositionChain, c: DiskPoint, cap: usize) -> Result<PointMultiset> {
    chain.preimages(chain.eval(c.value()), cap)
}

pub fn zero_monotonicity_check<S: MapSequence + ?Sized>(
    seq: &S,
    c: DiskPoint,
    n: usize,
    cap: usize,
) -> Result<ZeroMonotonicity> {
    let fiber_n = chain_fiber(&prefix_chain(seq, n)?, c, cap)?;
    let fiber_next = chain_fiber(&prefix_chain(seq, n + 1)?, c, cap)?;
    let product_n = fiber_n.modulus_product_excluding_origin(TAU_CLUSTER);
    let product_next = fiber_next.modulus_product_excluding_origin(TAU_CLUSTER);
    Ok(ZeroMonotonicity {
        included: fiber_next.contains_multiset(&fiber_n, TAU_CLUSTER),
        product_n,
        product_next,
        monotone: product_next <= product_n + 1e-9,
        fiber_n,
        fiber_next,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoveringCertificate {
    pub min_modulus: f64,
    pub covered: bool,
    pub required_radius: f64,
    pub winding_origin: i64,
    pub winding_probes: Vec<i64>,
    pub samples: usize,
}

pub const COVERING_SAMPLES: usize = 4096;

/// Winding number of the closed polygon `curve` about `p`, or the largest
/// argument increment if some increment exceeds π/2.
fn winding(curve: &[Complex64], p: Complex64) -> std::result::Result<i64, f64> {
    let mut total = 0.0;
    let mut worst: f64 = 0.0;
    for (i, w) in curve.iter().enumerate() {
        let next = curve[(i + 1) % curve.len()];
        let step = ((next - p) / (w - p)).arg();
        worst = worst.max(step.abs());
        total += step;
    }
    if worst > std::f64::consts::FRAC_PI_2 {
        return Err(worst);
    }
    Ok((total / std::f64::consts::TAU).round() as i64)
}

/// Checks `H(K_{1-√ε}(0)) ⊇ K_{1-3√ε}(0)` on a sampled circle.
pub fn covering_certificate<M: EvaluableMap + ?Sized>(h: &M, epsilon: f64) -> Result<CoveringCertificate> {
    if !(epsilon > 0.0 && epsilon < 1.0 / 9.0) {
        return Err(Error::Precondition(format!("epsilon {epsilon} outside (0, 1/9)")));
    }
    let (h0, d0) = h.eval_deriv(Complex64::new(0.0, 0.0));
    if h0.norm() > 1e-12 {
        return Err(Error::Precondition(format!("H(0) = {h0} is not 0")));
    }
    if d0.norm() <= 1.0 - epsilon {
        return Err(Error::Precondition(format!(
            "|H'(0)| = {} not above 1 - epsilon = {}",
            d0.norm(),
            1.0 - epsilon
        )));
    }
    let s = epsilon.sqrt();
    let r = 1.0 - s;
    let required = 1.0 - 3.0 * s;
    let probes: Vec<Complex64> = (0..8)
        .map(|k| Complex64::from_polar(0.9 * required, std::f64::consts::TAU * k as f64 / 8.0 + 0.1))
        .collect();

    let mut m = COVERING_SAMPLES;
    loop {
        let curve: Vec<Complex64> = par::map_indexed(m, |j| {
            h.eval(Complex64::from_polar(r, std::f64::consts::TAU * j as f64 / m as f64))
        });
        let min_modulus = curve.iter().map(|w| w.norm()).fold(f64::INFINITY, f64::min);
        let windings: std::result::Result<Vec<i64>, f64> = std::iter::once(Complex64::new(0.0, 0.0))
            .chain(probes.iter().copied())
            .map(|p| winding(&curve, p))
            .collect();
        match windings {
            Ok(w) => {
                let covered = min_modulus >= required - 1e-9 && w.iter().all(|&k| k >= 1);
                return Ok(CoveringCertificate {
                    min_modulus,
                    covered,
                    required_radius: required,
                    winding_origin: w[0],
                    winding_probes: w[1..].to_vec(),
                    samples: m,
                });
            }
            Err(jump) if m == COVERING_SAMPLES => {
                let _ = jump;
                m *= 2;
            }
            Err(jump) => {
                return Err(Error::WindingUnstable {
                    max_jump: jump,
                    samples: m,
                })
            }
        }
    }
}

/// `T_{F_n(a)}(F_n(T_a(z)))`, the iterate the normalized sequence should
/// reproduce.
pub fn conjugated_iterate<S: MapSequence + ?Sized>(
    seq: &S,
    a: DiskPoint,
    n: usize,
    z: Complex64,
) -> Result<Complex64> {
    let chain = prefix_chain(seq, n)?;
    let fa = chain.eval(a.value());
    Ok(moebius(fa, chain.eval(moebius(a.value(), z))))
}
