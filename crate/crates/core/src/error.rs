use thiserror::Error;

/// Errors raised by the solvers and calculators.
///
/// Numeric payloads are converted to `f64` so the type does not depend on
/// the scalar parameter.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("field has zero norm")]
    ZeroNorm,

    #[error("non-finite value after step {step} (t = {time})")]
    NonFinite { step: usize, time: f64 },

    #[error("pilot wave node near x = {position:?} at t = {time} (|psi| = {amplitude:e})")]
    NodeProximity {
        time: f64,
        position: [f64; 3],
        amplitude: f64,
    },

    #[error("trajectory aborted at t = {time}, last good position {position:?}: {reason}")]
    TrajectoryAborted {
        time: f64,
        position: [f64; 3],
        reason: String,
    },

    #[error("unsupported pilot wave: {0}")]
    UnsupportedPilot(String),

    #[error("point (t = {time}, x = {position:?}) lies outside the numeric pilot domain")]
    OutsideNumericDomain { time: f64, position: [f64; 3] },

    #[error("grid does not cover the soliton support: {0}")]
    GridCoverage(String),

    #[error("need at least {needed} history samples, got {got}")]
    InsufficientHistory { needed: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ensemble sample at {position:?} lies outside the histogram bins")]
    SupportNotCovered { position: [f64; 3] },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// Non-fatal conditions recorded during a run.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// Field amplitude on the boundary exceeds the periodic-domain threshold.
    EdgeMass { time: f64, relative_amplitude: f64 },
    /// The soliton is not small compared to the pilot variation scale.
    ApproximationBreach { first_time: f64, max_width_ratio: f64 },
}
