use thiserror::Error;

use crate::solver::SolveResult;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("point {point:?} lies outside the grid box")]
    OutOfDomain { point: [f64; 3] },

    #[error("radius {r} is below the resolution floor {min} (4h)")]
    ResolutionTooCoarse { r: f64, min: f64 },

    #[error("ball of radius {r} around {center:?} exits the box")]
    BallExitsBox { center: [f64; 3], r: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid boundary datum: {0}")]
    InvalidDatum(String),

    #[error("solver did not converge after {iterations} sweeps (last update {max_update:.3e})")]
    NonConvergence {
        iterations: usize,
        max_update: f64,
        /// Partial state at the moment the iteration budget ran out.
        partial: Box<SolveResult>,
    },

    #[error("family member t = {t} failed to solve: {source}")]
    FamilyMember {
        t: f64,
        #[source]
        source: Box<CoreError>,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("fitted quadratic form is not nonnegative on the thin space (min eigenvalue {min_eigenvalue:.3e}, fit residual {residual:.3e})")]
    NotQuadraticPoint { min_eigenvalue: f64, residual: f64 },

    #[error("insufficient range: needed {needed} usable values, got {got}")]
    InsufficientRange { needed: usize, got: usize },

    #[error("monotonicity violation: {0}")]
    MonotonicityViolation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("malformed field file: {0}")]
    FieldFormat(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
