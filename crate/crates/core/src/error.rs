//! Error type shared across the crate.

use thiserror::Error;

/// Errors reported by path, form and section operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("time {t} is not on the grid (step {h})")]
    OffGrid { t: f64, h: f64 },

    #[error("time {t} exceeds the grid horizon {horizon}")]
    BeyondHorizon { t: f64, horizon: f64 },

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("fiber mismatch: path lengths {left} and {right} cells")]
    FiberMismatch { left: usize, right: usize },

    #[error("{op}: {what}")]
    InvalidArgument { op: &'static str, what: String },

    #[error("form requires real-valued cells (d = 1), got complex or vector data")]
    RealOnlyForm,

    #[error("Gram matrix is not Hermitian: max asymmetry {asym:.3e} exceeds {tol:.3e}")]
    NonHermitianGram { asym: f64, tol: f64 },

    #[error("exponential overflow in {op}: rescale the form (max exponent {max:.3e})")]
    Overflow { op: &'static str, max: f64 },

    #[error("cocycle residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    CocycleResidual { residual: f64, tol: f64 },

    #[error("stabilization failed: grid horizon {horizon} too short for t = {t} (need horizon >= 3t)")]
    StabilizationFailed { t: f64, horizon: f64 },

    #[error("branch guard violated at s = {s}: |ratio - 1| = {excess:.3e} >= 1 after {levels} refinement levels")]
    BranchGuard { s: f64, excess: f64, levels: usize },

    #[error("not a right divisor: tail mismatch {deviation:.3e} at cell {cell}")]
    NotADivisor { cell: usize, deviation: f64 },

    #[error("missing defect entry for a term pair; extend the defect table")]
    MissingDefectEntry,

    #[error("operation requires the coordinatized (Inner) form")]
    NonCoordinatized,

    #[error("point ({x}, {y}) enters the obstacle at time {t}; reduce the step size")]
    ObstacleHit { x: f64, y: f64, t: f64 },

    #[error("serialization: {0}")]
    Serialization(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
