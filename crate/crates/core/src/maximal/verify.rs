//! Density comparisons behind maximality: competitors against a maximal
//! product, the auxiliary density `σ = λ_A λ_B / λ_{A2}`, and the
//! decomposition round trip for `A = A1 ∘ A2`.

use num_complex::Complex64;
use serde::Serialize;

use crate::blaschke::{compose_explicit, CompositionChain, FiniteBlaschke};
use crate::error::{Error, Result};
use crate::hyperbolic::{density, DiskPoint};
use crate::multiset::{PointMultiset, TAU_CLUSTER};
use crate::par;

use super::field::{curvature_at, GridSpec, PseudometricField};
use super::solver::{solve_maximal, SolverOptions};

/// Admissible σ probes keep this distance from the zero set of `λ_A`.
pub const SIGMA_MARGIN: f64 = 0.1;
/// Lattice spacing of the curvature probes.
pub const PROBE_SPACING: f64 = 1e-3;
/// Slack on the two density ratios.
pub const RATIO_SLACK: f64 = 1e-9;
/// Slack on `κ_σ ≤ -4`.
pub const KAPPA_SLACK: f64 = 1e-3;

#[derive(Debug, Clone)]
pub enum CompetitorMap {
    /// Its critical set is computed and checked against `C`.
    Explicit(FiniteBlaschke),
    /// `factors[0]` is checked against `C`; later factors only add
    /// critical points.
    Chain(CompositionChain),
}

#[derive(Debug, Clone)]
pub struct Competitor {
    pub label: String,
    pub map: CompetitorMap,
}

impl Competitor {
    pub fn explicit(label: impl Into<String>, map: FiniteBlaschke) -> Self {
        Competitor {
            label: label.into(),
            map: CompetitorMap::Explicit(map),
        }
    }

    pub fn chain(label: impl Into<String>, chain: CompositionChain) -> Self {
        Competitor {
            label: label.into(),
            map: CompetitorMap::Chain(chain),
        }
    }

    fn critical_witness(&self) -> Result<PointMultiset> {
        match &self.map {
            CompetitorMap::Explicit(f) => f.critical_set(),
            CompetitorMap::Chain(c) => c.factors()[0].critical_set(),
        }
    }

    fn density(&self, z: Complex64) -> f64 {
        match &self.map {
            CompetitorMap::Explicit(f) => density(f, z),
            CompetitorMap::Chain(c) => density(c, z),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompetitorResult {
    pub label: String,
    /// `max (λ_f - λ_B)` over the grid; computed for rejected competitors too.
    pub violation: f64,
    pub rejected: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaximalityReport {
    /// Over accepted competitors only; `-inf` when none was accepted.
    pub max_violation: f64,
    pub competitors: Vec<CompetitorResult>,
}

/// Compares `λ_f` with `λ_B` on `grid` for every competitor `f` whose
/// critical set contains `c`.
pub fn verify_maximal(
    b: &FiniteBlaschke,
    c: &PointMultiset,
    competitors: &[Competitor],
    grid: GridSpec,
) -> MaximalityReport {
    let points = grid.points();
    let lambda_b: Vec<f64> = par::map_slice(&points, |&z| density(b, z));
    let competitors: Vec<CompetitorResult> = competitors
        .iter()
        .map(|comp| {
            let rejected = match comp.critical_witness() {
                Ok(cs) if cs.contains_multiset(c, TAU_CLUSTER) => None,
                Ok(_) => Some("critical set does not contain the prescribed set".to_string()),
                Err(e) => Some(format!("critical set unavailable: {e}")),
            };
            let violation = par::map_indexed(points.len(), |i| comp.density(points[i]) - lambda_b[i])
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max);
            CompetitorResult {
                label: comp.label.clone(),
                violation,
                rejected,
            }
        })
        .collect();
    let max_violation = competitors
        .iter()
        .filter(|r| r.rejected.is_none())
        .map(|r| r.violation)
        .fold(f64::NEG_INFINITY, f64::max);
    MaximalityReport {
        max_violation,
        competitors,
    }
}

/// `𝒞_{outer ∘ inner} = 𝒞_inner + inner⁻¹(𝒞_outer)`, each preimage of a
/// critical point of multiplicity `m` counted `m` times its own multiplicity.
pub fn composite_critical_set(outer: &FiniteBlaschke, inner: &FiniteBlaschke) -> Result<PointMultiset> {
    let mut set = inner.critical_set()?;
    for (c, m) in outer.critical_set()?.iter() {
        let fiber = inner.preimages(DiskPoint::new(c)?)?;
        let scaled = fiber.iter().map(|(p, k)| (p, k * m)).collect();
        set = set.union(&PointMultiset::from_entries(scaled, 0.0)?, TAU_CLUSTER);
    }
    Ok(set)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaReport {
    /// `σ` on the grid, zero set `𝒞_A`.
    pub field: PseudometricField,
    /// Grid points at distance at least [`SIGMA_MARGIN`] from `𝒞_A`.
    pub admissible: usize,
    /// `min λ_B / λ_{A2}` over admissible points.
    pub min_ratio_b: f64,
    /// `min λ_{A2} / λ_A` over admissible points.
    pub min_ratio_a: f64,
    /// Largest finite-difference `κ_σ` over admissible points.
    pub max_kappa: f64,
    /// Largest gap between the finite-difference and closed-form `κ_σ`.
    pub closed_form_gap: f64,
    /// Admissible points whose curvature stencil was excluded.
    pub kappa_excluded: usize,
}

impl SigmaReport {
    pub fn holds(&self) -> bool {
        self.min_ratio_b >= 1.0 - RATIO_SLACK
            && self.min_ratio_a >= 1.0 - RATIO_SLACK
            && self.max_kappa <= -4.0 + KAPPA_SLACK
            && self.kappa_excluded == 0
    }
}

/// `σ = λ_A λ_B / λ_{A2}` for `A = A1 ∘ A2` and `B` maximal for `𝒞_{A2}`.
///
/// With `x = (λ_{A2}/λ_B)^2` and `y = (λ_{A2}/λ_A)^2` (both curvature -4
/// densities), `κ_σ = -4 (x + y (1 - x))`; the finite-difference value is
/// compared against it.
pub fn sigma_field(
    a1: &FiniteBlaschke,
    a2: &FiniteBlaschke,
    b: &FiniteBlaschke,
    grid: GridSpec,
) -> Result<SigmaReport> {
    let c_a2 = a2.critical_set()?;
    let c_b = b.critical_set()?;
    if !c_b.approx_eq(&c_a2, TAU_CLUSTER) {
        return Err(Error::CriticalSetMismatch(format!(
            "B has {} critical points, A2 has {}, or they differ beyond {TAU_CLUSTER:e}",
            c_b.cardinality(),
            c_a2.cardinality()
        )));
    }
    let chain = CompositionChain::new(vec![a2.clone(), a1.clone()])?;
    let c_a = composite_critical_set(a1, a2)?;
    let sigma = |z: Complex64| density(&chain, z) * density(b, z) / density(a2, z);
    let field = PseudometricField::from_density(grid, c_a.clone(), sigma);

    let probes: Vec<Complex64> = grid
        .points()
        .into_iter()
        .filter(|&z| c_a.distance_to(z) >= SIGMA_MARGIN)
        .collect();
    struct Probe {
        ratio_b: f64,
        ratio_a: f64,
        kappa: Option<f64>,
        closed: f64,
    }
    let rows = par::map_slice(&probes, |&z| {
        let (la, lb, la2) = (density(&chain, z), density(b, z), density(a2, z));
        let x = (la2 / lb).powi(2);
        let y = (la2 / la).powi(2);
        Probe {
            ratio_b: lb / la2,
            ratio_a: la2 / la,
            kappa: curvature_at(sigma, &c_a, z, PROBE_SPACING),
            closed: -4.0 * (x + y * (1.0 - x)),
        }
    });
    let mut report = SigmaReport {
        field,
        admissible: rows.len(),
        min_ratio_b: f64::INFINITY,
        min_ratio_a: f64::INFINITY,
        max_kappa: f64::NEG_INFINITY,
        closed_form_gap: 0.0,
        kappa_excluded: 0,
    };
    for p in rows {
        report.min_ratio_b = report.min_ratio_b.min(p.ratio_b);
        report.min_ratio_a = report.min_ratio_a.min(p.ratio_a);
        match p.kappa {
            Some(k) => {
                report.max_kappa = report.max_kappa.max(k);
                report.closed_form_gap = report.closed_form_gap.max((k - p.closed).abs());
            }
            None => report.kappa_excluded += 1,
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub degree: usize,
    /// `sup |λ_solved - λ_A1|` for the product solved from `𝒞_{A1}`.
    pub gap_outer: Option<f64>,
    /// Same for `A2`.
    pub gap_inner: Option<f64>,
    /// Same for `A = A1 ∘ A2`.
    pub gap_composite: Option<f64>,
    /// The first solver failure; later gaps stay `None`.
    pub failure: Option<String>,
}

impl DecompositionReport {
    /// The largest gap, `None` unless all three were computed.
    pub fn max_gap(&self) -> Option<f64> {
        Some(self.gap_outer?.max(self.gap_inner?).max(self.gap_composite?))
    }
}

/// Solves for the maximal products with the critical sets of `A1`, `A2`
/// and `A = A1 ∘ A2` and measures how far their densities are from the
/// given ones.
pub fn decomposition_check(
    a1: &FiniteBlaschke,
    a2: &FiniteBlaschke,
    grid: GridSpec,
    opts: &SolverOptions,
) -> Result<DecompositionReport> {
    let a = compose_explicit(a1, a2)?;
    let points = grid.points();
    let gap = |given: &FiniteBlaschke, crit: PointMultiset| -> Result<f64> {
        let solved = solve_maximal(&crit, opts)?.product;
        Ok(par::map_slice(&points, |&z| (density(&solved, z) - density(given, z)).abs())
            .into_iter()
            .fold(0.0, f64::max))
    };
    let targets = [
        (a1, a1.critical_set()?),
        (a2, a2.critical_set()?),
        (&a, composite_critical_set(a1, a2)?),
    ];
    let mut gaps = [None; 3];
    let mut failure = None;
    for (slot, (given, crit)) in gaps.iter_mut().zip(targets) {
        match gap(given, crit) {
            Ok(g) => *slot = Some(g),
            Err(e) if e.is_numerical() => {
                failure = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let [gap_outer, gap_inner, gap_composite] = gaps;
    let report = DecompositionReport {
        degree: a.degree(),
        gap_outer,
        gap_inner,
        gap_composite,
        failure,
    };
    Ok(report)
}
