//! Experiment configuration files.
//!
//! A config is TOML with a top-level `version = 1`, a `command`, an optional
//! `seed` and `output_path`, and three optional blocks: `[inputs]` (shape
//! depends on the command), `[tolerances]` and `plots`. Unknown keys are
//! rejected everywhere.

use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use blaschke_core::blaschke::FiniteBlaschke;
use blaschke_core::corpus::DEFAULT_RADIUS;
use blaschke_core::hyperbolic::DiskPoint;
use blaschke_core::iteration::{ConvergenceOptions, SequenceSpec, DEFAULT_N_MAX};
use blaschke_core::maximal::{GridSpec, SolverOptions, Stencil};
use blaschke_core::multiset::PointMultiset;
use blaschke_core::report::PlotKind;

use crate::CliError;

pub const CONFIG_VERSION: u32 = 1;

/// Environment variable naming the tolerance profile used as the base for
/// the `[tolerances]` block.
pub const PROFILE_ENV: &str = "BLASCHKE_TOLERANCE_PROFILE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Iterate,
    SolveMaximal,
    VerifyIbp,
    VerifyMbp,
    Curvature,
    Covering,
    Decompose,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Iterate => "iterate",
            Command::SolveMaximal => "solve-maximal",
            Command::VerifyIbp => "verify-ibp",
            Command::VerifyMbp => "verify-mbp",
            Command::Curvature => "curvature",
            Command::Covering => "covering",
            Command::Decompose => "decompose",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    version: u32,
    command: Command,
    #[serde(default)]
    seed: u64,
    output_path: Option<PathBuf>,
    #[serde(default)]
    inputs: toml::Table,
    #[serde(default)]
    tolerances: ToleranceOverrides,
    #[serde(default)]
    plots: Vec<PlotKind>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
    pub inputs: Inputs,
    pub tolerances: ToleranceOverrides,
    pub plots: Vec<PlotKind>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Inputs {
    Iterate(IterateInputs),
    SolveMaximal(SolveInputs),
    VerifyIbp(IbpInputs),
    VerifyMbp(MbpInputs),
    Curvature(CurvatureInputs),
    Covering(CoveringInputs),
    Decompose(DecomposeInputs),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterateInputs {
    pub sequence: SequenceSpec,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// Probe points for the Cauchy test; the 60-point default grid if absent.
    pub grid: Option<Vec<DiskPoint>>,
    #[serde(default)]
    pub options: ConvergenceOptions,
    /// Start of the orbit written for the `orbit` plot.
    pub orbit_start: Option<DiskPoint>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveInputs {
    /// `[[re, im, multiplicity], ...]`.
    pub critical_points: PointMultiset,
    #[serde(default)]
    pub solver: SolverOptions,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IbpInputs {
    pub sequence: SequenceSpec,
    pub n_list: Vec<usize>,
    #[serde(default)]
    pub a_samples: Vec<DiskPoint>,
    /// Extra seeded samples drawn uniformly from `|a| < 0.95`.
    #[serde(default)]
    pub random_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MbpInputs {
    #[serde(default = "default_cases")]
    pub cases: usize,
    #[serde(default = "default_max_degree")]
    pub max_degree: usize,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default)]
    pub solver: SolverOptions,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureInputs {
    pub map: FiniteBlaschke,
    #[serde(default = "default_curvature_grid")]
    pub grid: GridSpec,
    #[serde(default)]
    pub stencil: Stencil,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoveringInputs {
    pub map: FiniteBlaschke,
    pub epsilon: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeInputs {
    pub outer: FiniteBlaschke,
    pub inner: FiniteBlaschke,
    #[serde(default = "default_decompose_grid")]
    pub grid: GridSpec,
    #[serde(default)]
    pub solver: SolverOptions,
}

fn default_n_max() -> usize {
    DEFAULT_N_MAX
}
fn default_cases() -> usize {
    50
}
fn default_max_degree() -> usize {
    6
}
fn default_radius() -> f64 {
    DEFAULT_RADIUS
}
fn default_curvature_grid() -> GridSpec {
    GridSpec::disk(0.02)
}
fn default_decompose_grid() -> GridSpec {
    GridSpec::disk(0.1)
}

/// Per-run overrides; anything left out comes from the active profile.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub convergence: Option<f64>,
    pub taylor: Option<f64>,
    pub solver_residual: Option<f64>,
    pub round_trip: Option<f64>,
    pub ibp_residual: Option<f64>,
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Grid Cauchy tolerance for `iterate`.
    pub convergence: f64,
    /// Taylor-coefficient threshold for orders of vanishing.
    pub taylor: f64,
    /// Accepted critical-point mismatch of the solver.
    pub solver_residual: f64,
    /// Accepted map distance in `verify-mbp`.
    pub round_trip: f64,
    /// Accepted McLaughlin residual in `verify-ibp`.
    pub ibp_residual: f64,
    /// Accepted `|κ + 4|` in `curvature`.
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Standard,
    Strict,
    Relaxed,
}

impl Profile {
    pub fn parse(name: &str) -> Result<Self, CliError> {
        match name {
            "standard" => Ok(Profile::Standard),
            "strict" => Ok(Profile::Strict),
            "relaxed" => Ok(Profile::Relaxed),
            other => Err(CliError::Schema(format!(
                "{PROFILE_ENV}={other:?}: expected standard, strict or relaxed"
            ))),
        }
    }

    /// The profile named by the environment, `standard` if unset.
    pub fn from_env() -> Result<Self, CliError> {
        match std::env::var(PROFILE_ENV) {
            Ok(name) => Profile::parse(name.trim()),
            Err(std::env::VarError::NotPresent) => Ok(Profile::Standard),
            Err(e) => Err(CliError::Schema(format!("{PROFILE_ENV}: {e}"))),
        }
    }

    pub fn tolerances(self) -> Tolerances {
        let standard = Tolerances {
            convergence: 1e-9,
            taylor: 1e-8,
            solver_residual: 1e-9,
            round_trip: 1e-8,
            ibp_residual: 1e-9,
            kappa: 1e-4,
        };
        match self {
            Profile::Standard => standard,
            Profile::Strict => Tolerances {
                convergence: 1e-11,
                taylor: 1e-10,
                solver_residual: 1e-10,
                round_trip: 1e-10,
                ibp_residual: 1e-11,
                kappa: 1e-5,
            },
            Profile::Relaxed => Tolerances {
                convergence: 1e-7,
                taylor: 1e-6,
                solver_residual: 1e-7,
                round_trip: 1e-6,
                ibp_residual: 1e-7,
                kappa: 1e-3,
            },
        }
    }
}

impl ToleranceOverrides {
    pub fn resolve(&self, profile: Profile) -> Result<Tolerances, CliError> {
        let base = profile.tolerances();
        let pick = |name: &str, v: Option<f64>, d: f64| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => {
                Err(CliError::Schema(format!("tolerances.{name} = {x} must be positive")))
            }
            Some(x) => Ok(x),
            None => Ok(d),
        };
        Ok(Tolerances {
            convergence: pick("convergence", self.convergence, base.convergence)?,
            taylor: pick("taylor", self.taylor, base.taylor)?,
            solver_residual: pick("solver_residual", self.solver_residual, base.solver_residual)?,
            round_trip: pick("round_trip", self.round_trip, base.round_trip)?,
            ibp_residual: pick("ibp_residual", self.ibp_residual, base.ibp_residual)?,
            kappa: pick("kappa", self.kappa, base.kappa)?,
        })
    }
}

fn block<T: DeserializeOwned>(command: Command, table: toml::Table) -> Result<T, CliError> {
    toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Schema(format!("[inputs] for {}: {}", command.as_str(), e.message())))
}

/// Parses and validates a config; every schema problem is a [`CliError::Schema`].
pub fn parse(text: &str) -> Result<ExperimentConfig, CliError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
    if raw.version != CONFIG_VERSION {
        return Err(CliError::Schema(format!(
            "unsupported config version {} (expected {CONFIG_VERSION})",
            raw.version
        )));
    }
    let c = raw.command;
    let inputs = match c {
        Command::Iterate => Inputs::Iterate(block(c, raw.inputs)?),
        Command::SolveMaximal => Inputs::SolveMaximal(block(c, raw.inputs)?),
        Command::VerifyIbp => Inputs::VerifyIbp(block(c, raw.inputs)?),
        Command::VerifyMbp => Inputs::VerifyMbp(block(c, raw.inputs)?),
        Command::Curvature => Inputs::Curvature(block(c, raw.inputs)?),
        Command::Covering => Inputs::Covering(block(c, raw.inputs)?),
        Command::Decompose => Inputs::Decompose(block(c, raw.inputs)?),
    };
    validate(&inputs)?;
    // catches non-positive overrides without consulting the environment
    raw.tolerances.resolve(Profile::Standard)?;
    Ok(ExperimentConfig {
        command: c,
        seed: raw.seed,
        output_path: raw.output_path,
        inputs,
        tolerances: raw.tolerances,
        plots: raw.plots,
    })
}

fn validate(inputs: &Inputs) -> Result<(), CliError> {
    let schema = |msg: String| Err(CliError::Schema(msg));
    match inputs {
        Inputs::Iterate(i) => {
            i.sequence.validate().map_err(|e| CliError::Schema(e.to_string()))?;
            if i.n_max == 0 {
                return schema("n_max must be at least 1".into());
            }
        }
        Inputs::VerifyIbp(i) => {
            i.sequence.validate().map_err(|e| CliError::Schema(e.to_string()))?;
            if i.n_list.is_empty() || i.n_list.contains(&0) {
                return schema("n_list must be nonempty and start at 1".into());
            }
            if i.a_samples.is_empty() && i.random_samples == 0 {
                return schema("give a_samples or random_samples".into());
            }
        }
        Inputs::VerifyMbp(i) => {
            if i.cases == 0 || i.max_degree == 0 {
                return schema("cases and max_degree must be positive".into());
            }
            if !(i.radius > 0.0 && i.radius < 1.0) {
                return schema(format!("radius {} outside (0, 1)", i.radius));
            }
        }
        Inputs::Covering(i) => {
            if i.epsilon.is_empty() {
                return schema("epsilon needs at least one value".into());
            }
        }
        Inputs::SolveMaximal(_) | Inputs::Curvature(_) | Inputs::Decompose(_) => {}
    }
    Ok(())
}
