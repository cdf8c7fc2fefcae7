use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {0} does not lie in the open unit disk")]
    OutsideDisk(Complex64),

    #[error("constant has modulus {0}, expected 1")]
    NotUnimodular(f64),

    #[error("a finite Blaschke product needs at least one zero")]
    EmptyZeroSet,

    #[error("map value {value} has modulus > 1 at z = {at}")]
    NotSelfMap { at: Complex64, value: Complex64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degree {degree} exceeds the explicit-form cap {cap}")]
    DegreeCap { degree: usize, cap: usize },

    #[error("root polish failed at {root}: residual {residual:e}")]
    RootPolish { root: Complex64, residual: f64 },

    #[error("eigenvalue solver failed on a degree-{0} companion matrix")]
    Eigen(usize),

    #[error("expected {expected} critical points in the disk, found {found}")]
    CriticalCount { expected: usize, found: usize },

    #[error("composition probe mismatch {0:e}")]
    ProbeMismatch(f64),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("winding computation unstable: argument jump {max_jump:.3} rad with {samples} samples")]
    WindingUnstable { max_jump: f64, samples: usize },

    #[error("homotopy stalled at t = {t} (step {step:e})")]
    HomotopyStall {
        t: f64,
        step: f64,
        last_iterate: Vec<Complex64>,
    },

    #[error("solver did not converge: residual {residual:e}")]
    Nonconvergence {
        residual: f64,
        last_iterate: Vec<Complex64>,
    },

    #[error("critical-point matching is ambiguous: assignment cost {cost:e}")]
    MatchingAmbiguity { cost: f64 },

    #[error("critical sets do not match: {0}")]
    CriticalSetMismatch(String),

    #[error("index {index} outside the declared sequence length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("plot kind {requested} does not match report kind {available}")]
    KindMismatch {
        requested: &'static str,
        available: &'static str,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of a numerical method (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RootPolish { .. }
                | Error::Eigen(_)
                | Error::CriticalCount { .. }
                | Error::ProbeMismatch(_)
                | Error::WindingUnstable { .. }
                | Error::HomotopyStall { .. }
                | Error::Nonconvergence { .. }
                | Error::MatchingAmbiguity { .. }
                | Error::Inconclusive(_)
        )
    }
}
