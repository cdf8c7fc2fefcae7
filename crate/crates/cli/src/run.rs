//! One function per command. Each returns its artifacts plus a status
//! string; verification outcomes ("pass", "fail", "inconclusive") are data,
//! only hard errors become a nonzero exit.

use serde::Serialize;

use blaschke_core::blaschke::FiniteBlaschke;
use blaschke_core::corpus::{self, case_rng};
use blaschke_core::indestructible::{verify_stability_ibp, Condition};
use blaschke_core::iteration::{
    covering_certificate, default_grid, detect_convergence, orbit, ConvergenceReport, CoveringCertificate,
};
use blaschke_core::maximal::{
    canonicalize, curvature, decomposition_check, lambda_field, map_distance, sigma_field, solve_maximal,
    DecompositionReport, SolverOptions,
};
use blaschke_core::multiset::PointMultiset;
use blaschke_core::par;
use blaschke_core::report::{
    curvature_table, emit_plot_data, fmt_real, ibp_table, ArtifactHeader, CsvTable, PlotKind, PlotSource,
};

use crate::config::{
    CoveringInputs, CurvatureInputs, DecomposeInputs, ExperimentConfig, IbpInputs, Inputs, IterateInputs,
    MbpInputs, SolveInputs, Tolerances,
};
use crate::output::{self, Artifact};
use crate::CliError;

#[derive(Debug)]
pub struct RunOutcome {
    pub status: String,
    pub artifacts: Vec<Artifact>,
    /// A hard error found after the artifacts were produced (they are still
    /// written, then the process exits with this error's code).
    pub failure: Option<CliError>,
}

struct Produced {
    status: String,
    artifacts: Vec<Artifact>,
    plots: Vec<PlotSource>,
    failure: Option<CliError>,
}

impl Produced {
    fn new(status: impl Into<String>, artifacts: Vec<Artifact>) -> Self {
        Produced {
            status: status.into(),
            artifacts,
            plots: Vec::new(),
            failure: None,
        }
    }
}

/// Runs `cfg` with the effective `seed` and tolerances; `config_bytes` is
/// hashed into every artifact header.
pub fn run(cfg: &ExperimentConfig, config_bytes: &[u8], seed: u64, tol: &Tolerances) -> Result<RunOutcome, CliError> {
    let header = ArtifactHeader::new(config_bytes, seed);
    let mut produced = match &cfg.inputs {
        Inputs::Iterate(i) => iterate(i, &header, tol)?,
        Inputs::SolveMaximal(i) => solve(i, &header, tol)?,
        Inputs::VerifyIbp(i) => verify_ibp(i, &header, seed, tol)?,
        Inputs::VerifyMbp(i) => verify_mbp(i, &header, seed, tol)?,
        Inputs::Curvature(i) => run_curvature(i, &header, tol)?,
        Inputs::Covering(i) => covering(i, &header)?,
        Inputs::Decompose(i) => decompose(i, &header, tol)?,
    };
    for &kind in &cfg.plots {
        let table = plot(&produced.plots, kind, cfg)?;
        produced
            .artifacts
            .push(output::csv(&format!("plot_{}.csv", kind.as_str()), &header, &table)?);
    }
    Ok(RunOutcome {
        status: produced.status,
        artifacts: produced.artifacts,
        failure: produced.failure,
    })
}

fn plot(sources: &[PlotSource], kind: PlotKind, cfg: &ExperimentConfig) -> Result<CsvTable, CliError> {
    let source = sources
        .iter()
        .find(|s| s.kind() == kind)
        .or_else(|| sources.first())
        .ok_or_else(|| {
            CliError::Schema(format!(
                "plot kind {} is not available for {}",
                kind.as_str(),
                cfg.command.as_str()
            ))
        })?;
    Ok(emit_plot_data(source, kind)?)
}

#[derive(Serialize)]
struct IterateDoc<'a> {
    command: &'static str,
    status: String,
    tolerance: f64,
    report: &'a ConvergenceReport,
}

fn iterate(i: &IterateInputs, header: &ArtifactHeader, tol: &Tolerances) -> Result<Produced, CliError> {
    let grid = i.grid.clone().unwrap_or_else(default_grid);
    let report = detect_convergence(&i.sequence, &grid, i.n_max, tol.convergence, &i.options)?;
    let status = serde_json::to_value(report.status)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    let doc = IterateDoc {
        command: "iterate",
        status: status.clone(),
        tolerance: tol.convergence,
        report: &report,
    };
    let mut out = Produced::new(status, vec![output::json("iterate.json", header, &doc)?]);
    if let Some(z) = i.orbit_start {
        out.plots.push(PlotSource::Orbit(orbit(&i.sequence, z, i.n_max)?));
    }
    Ok(out)
}

#[derive(Serialize)]
struct SolveDoc<'a> {
    command: &'static str,
    status: &'static str,
    critical_points: &'a PointMultiset,
    product: &'a FiniteBlaschke,
    residual: f64,
    homotopy_steps: usize,
    newton_iters: usize,
}

fn solve(i: &SolveInputs, header: &ArtifactHeader, tol: &Tolerances) -> Result<Produced, CliError> {
    let opts = SolverOptions {
        residual_tol: tol.solver_residual,
        ..i.solver.clone()
    };
    let r = solve_maximal(&i.critical_points, &opts)?;
    let doc = SolveDoc {
        command: "solve-maximal",
        status: "converged",
        critical_points: &i.critical_points,
        product: &r.product,
        residual: r.residual,
        homotopy_steps: r.homotopy_steps,
        newton_iters: r.newton_iters,
    };
    Ok(Produced::new("converged", vec![output::json("solve-maximal.json", header, &doc)?]))
}

#[derive(Serialize)]
struct IbpDoc<'a> {
    command: &'static str,
    status: &'static str,
    tolerance: f64,
    rows: usize,
    max_residual: f64,
    notes: &'a [String],
}

fn verify_ibp(i: &IbpInputs, header: &ArtifactHeader, seed: u64, tol: &Tolerances) -> Result<Produced, CliError> {
    let mut samples = i.a_samples.clone();
    let mut rng = case_rng(seed, 0);
    samples.extend((0..i.random_samples).map(|_| corpus::disk_point(&mut rng, 0.95)));
    let table = verify_stability_ibp(&i.sequence, &samples, &i.n_list, tol.taylor)?;
    let max_residual = table.max_residual();
    let status = if table.rows.is_empty() {
        "inconclusive"
    } else if max_residual < tol.ibp_residual {
        "pass"
    } else {
        "fail"
    };
    let doc = IbpDoc {
        command: "verify-ibp",
        status,
        tolerance: tol.ibp_residual,
        rows: table.rows.len(),
        max_residual,
        notes: &table.notes,
    };
    let mut out = Produced::new(
        status,
        vec![
            output::csv("ibp.csv", header, &ibp_table(&table))?,
            output::json("verify-ibp.json", header, &doc)?,
        ],
    );
    let trajectory = table
        .rows
        .iter()
        .filter(|r| r.report.condition == Condition::ZeroValue)
        .map(|r| (r.n, r.report.residual))
        .collect();
    out.plots.push(PlotSource::ResidualTrajectory(trajectory));
    Ok(out)
}

#[derive(Serialize)]
struct MbpDoc {
    command: &'static str,
    status: &'static str,
    tolerance: f64,
    cases: usize,
    over_tolerance: usize,
    errors: usize,
    max_map_distance: f64,
}

struct MbpRow {
    degree: usize,
    result: Result<(f64, f64, usize, usize), blaschke_core::error::Error>,
}

fn verify_mbp(i: &MbpInputs, header: &ArtifactHeader, seed: u64, tol: &Tolerances) -> Result<Produced, CliError> {
    let maps = corpus::blaschke_corpus(seed, i.cases, i.max_degree, i.radius);
    let grid = default_grid();
    let opts = SolverOptions {
        residual_tol: tol.solver_residual,
        ..i.solver.clone()
    };
    let rows = par::map_slice(&maps, |b| MbpRow {
        degree: b.degree(),
        result: (|| {
            let canon = canonicalize(b)?;
            let solved = solve_maximal(&b.critical_set()?, &opts)?;
            let dist = map_distance(&canon, &solved.product, &grid);
            Ok((solved.residual, dist, solved.homotopy_steps, solved.newton_iters))
        })(),
    });

    let mut table = CsvTable::new([
        "case",
        "degree",
        "solver_residual",
        "map_distance",
        "homotopy_steps",
        "newton_iters",
        "status",
    ]);
    let (mut over, mut errors, mut worst) = (0usize, 0usize, 0.0f64);
    let mut trajectory = Vec::new();
    let mut first_error = None;
    for (k, row) in rows.into_iter().enumerate() {
        match row.result {
            Ok((res, dist, steps, iters)) => {
                worst = worst.max(dist);
                let ok = dist < tol.round_trip;
                over += usize::from(!ok);
                trajectory.push((k, dist));
                table.push(vec![
                    k.to_string(),
                    row.degree.to_string(),
                    fmt_real(res),
                    fmt_real(dist),
                    steps.to_string(),
                    iters.to_string(),
                    if ok { "ok" } else { "over_tolerance" }.into(),
                ]);
            }
            Err(e) => {
                errors += 1;
                table.push(vec![
                    k.to_string(),
                    row.degree.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    format!("error: {e}"),
                ]);
                first_error.get_or_insert(CliError::from(e));
            }
        }
    }
    let status = if errors > 0 {
        "error"
    } else if over > 0 {
        "fail"
    } else {
        "pass"
    };
    let doc = MbpDoc {
        command: "verify-mbp",
        status,
        tolerance: tol.round_trip,
        cases: maps.len(),
        over_tolerance: over,
        errors,
        max_map_distance: worst,
    };
    let mut out = Produced::new(
        status,
        vec![
            output::csv("round_trip.csv", header, &table)?,
            output::json("verify-mbp.json", header, &doc)?,
        ],
    );
    out.plots.push(PlotSource::ResidualTrajectory(trajectory));
    out.failure = first_error;
    Ok(out)
}

#[derive(Serialize)]
struct CurvatureDoc {
    command: &'static str,
    status: &'static str,
    tolerance: f64,
    samples: usize,
    interior: usize,
    within_tolerance: usize,
    worst_deviation: f64,
}

/// Share of interior samples that must satisfy `|κ + 4| ≤ tol` for "pass";
/// stencil error blows up next to the excluded zero set.
const CURVATURE_PASS_FRACTION: f64 = 0.95;

fn run_curvature(i: &CurvatureInputs, header: &ArtifactHeader, tol: &Tolerances) -> Result<Produced, CliError> {
    let field = lambda_field(&i.map, i.grid, i.map.critical_set()?);
    let samples = curvature(&field, i.stencil);
    let interior: Vec<f64> = samples.iter().filter_map(|s| s.kappa).collect();
    let within = interior.iter().filter(|k| (**k + 4.0).abs() <= tol.kappa).count();
    let worst = interior.iter().map(|k| (k + 4.0).abs()).fold(0.0, f64::max);
    let status = if interior.is_empty() {
        "inconclusive"
    } else if within as f64 >= CURVATURE_PASS_FRACTION * interior.len() as f64 {
        "pass"
    } else {
        "fail"
    };
    let doc = CurvatureDoc {
        command: "curvature",
        status,
        tolerance: tol.kappa,
        samples: samples.len(),
        interior: interior.len(),
        within_tolerance: within,
        worst_deviation: worst,
    };
    let mut out = Produced::new(
        status,
        vec![
            output::csv("curvature.csv", header, &curvature_table(&samples))?,
            output::json("curvature.json", header, &doc)?,
        ],
    );
    out.plots.push(PlotSource::Field(samples));
    Ok(out)
}

#[derive(Serialize)]
struct CoveringEntry {
    epsilon: f64,
    #[serde(flatten)]
    certificate: CoveringCertificate,
}

#[derive(Serialize)]
struct CoveringDoc {
    command: &'static str,
    status: &'static str,
    certificates: Vec<CoveringEntry>,
}

fn covering(i: &CoveringInputs, header: &ArtifactHeader) -> Result<Produced, CliError> {
    let certificates = i
        .epsilon
        .iter()
        .map(|&epsilon| {
            Ok(CoveringEntry {
                epsilon,
                certificate: covering_certificate(&i.map, epsilon)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let status = if certificates.iter().all(|c| c.certificate.covered) {
        "covered"
    } else {
        "not_covered"
    };
    let doc = CoveringDoc {
        command: "covering",
        status,
        certificates,
    };
    Ok(Produced::new(status, vec![output::json("covering.json", header, &doc)?]))
}

#[derive(Serialize)]
struct SigmaSummary {
    admissible: usize,
    min_ratio_b: f64,
    min_ratio_a: f64,
    max_kappa: f64,
    closed_form_gap: f64,
    kappa_excluded: usize,
    holds: bool,
}

#[derive(Serialize)]
struct DecomposeDoc<'a> {
    command: &'static str,
    status: &'static str,
    tolerance: f64,
    decomposition: &'a DecompositionReport,
    sigma: Option<SigmaSummary>,
    sigma_failure: Option<String>,
}

fn decompose(i: &DecomposeInputs, header: &ArtifactHeader, tol: &Tolerances) -> Result<Produced, CliError> {
    let opts = SolverOptions {
        residual_tol: tol.solver_residual,
        ..i.solver.clone()
    };
    let report = decomposition_check(&i.outer, &i.inner, i.grid, &opts)?;

    // σ needs the maximal product for the inner critical set
    let sigma = solve_maximal(&i.inner.critical_set()?, &opts)
        .and_then(|b| sigma_field(&i.outer, &i.inner, &b.product, i.grid));
    let (sigma, sigma_failure) = match sigma {
        Ok(s) => (
            Some(SigmaSummary {
                admissible: s.admissible,
                min_ratio_b: s.min_ratio_b,
                min_ratio_a: s.min_ratio_a,
                max_kappa: s.max_kappa,
                closed_form_gap: s.closed_form_gap,
                kappa_excluded: s.kappa_excluded,
                holds: s.holds(),
            }),
            None,
        ),
        Err(e) if e.is_numerical() => (None, Some(e.to_string())),
        Err(e) => return Err(e.into()),
    };

    let status = match (report.max_gap(), &sigma) {
        (Some(gap), Some(s)) if gap < tol.round_trip && s.holds => "pass",
        (Some(_), Some(_)) => "fail",
        _ => "inconclusive",
    };
    let doc = DecomposeDoc {
        command: "decompose",
        status,
        tolerance: tol.round_trip,
        decomposition: &report,
        sigma,
        sigma_failure,
    };
    Ok(Produced::new(status, vec![output::json("decompose.json", header, &doc)?]))
}
