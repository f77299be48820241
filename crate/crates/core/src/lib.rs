//! Numerical laboratory for the thin obstacle (Signorini) problem on
//! box grids: a projected-relaxation solver for the variational
//! inequality, Almgren frequency functions and blow-up classification
//! at free boundary points, frequency stratification, and cleaning-rate
//! measurements for monotone families of solutions.

pub mod catalog;
pub mod config;
pub mod error;
pub mod frequency;
pub mod geometry;
pub mod solver;

pub use catalog::{
    admissible_homogeneity, nearest_homogeneity, validate_solution, CubicProfile,
    HalfPlaneSolution, Profile, QuadraticProfile, ThinMatrix, ValidationReport,
};
pub use config::AnalysisConfig;
pub use error::{CoreError, Result};
pub use frequency::{
    frequency_profile, growth_check, growth_check_w, w_frequency_profile, FrequencyProfile,
};
pub use geometry::{Grid, Point, ScalarField};
pub use solver::{
    compare_ordered, random_datum, solve, verify_superharmonicity, Datum, SignoriniProblem,
    SolveResult,
};
