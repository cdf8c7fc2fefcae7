//! Maximal Blaschke products: prescribed critical sets, density comparisons
//! and curvature of conformal pseudometrics.

pub mod canonical;
pub mod field;
pub mod solver;
pub mod verify;

pub use canonical::{canonicalize, map_distance};
pub use field::{curvature, curvature_at, lambda_field, GridSpec, PseudometricField, Stencil};
pub use solver::{solve_maximal, SolverOptions, SolverResult};
pub use verify::{
    composite_critical_set, decomposition_check, sigma_field, verify_maximal, Competitor,
    CompetitorMap, CompetitorResult, DecompositionReport, MaximalityReport, SigmaReport,
};
