use thiserror::Error;

use crate::hydro::BlowUpReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("kernel profile is not integrable on {0}")]
    NonIntegrable(String),

    #[error("kernel profile has zero mass")]
    ZeroMass,

    #[error("empty ensemble")]
    EmptyEnsemble,

    #[error("potential is not twice differentiable at r = {radius}")]
    SingularPotential { radius: f64 },

    #[error("operation requires a torus domain")]
    NotTorus,

    #[error(
        "tail bound inconclusive at K_max = {k_max}: bound {bound:.3e} exceeds in-range maximum {max:.3e}; increase K_max"
    )]
    TailInconclusive { k_max: usize, bound: f64, max: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:.3e})")]
    EigenNoConvergence { iterations: usize, residual: f64 },

    #[error("blow-up detected: {0}")]
    BlowUp(BlowUpReport),

    #[error("particle blow-up at t = {time}: agent {agent} has speed {speed:.3e}")]
    ParticleBlowUp { time: f64, agent: usize, speed: f64 },

    #[error("mismatched series: {0}")]
    MismatchedSeries(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("csv parse error at line {line}: {message}")]
    Csv { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
