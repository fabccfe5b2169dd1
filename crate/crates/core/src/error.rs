use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("density `{label}` returned a non-finite value at {point:?}")]
    EvaluationFailure { label: String, point: Vec<f64> },

    #[error("nested quadrature did not converge at x' = {point:?}, w = {height} (last relative change {change:e})")]
    Quadrature {
        point: Vec<f64>,
        height: f64,
        change: f64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("ball of radius {radius} holds {nodes} nodes, need at least {required}")]
    InsufficientResolution {
        radius: f64,
        nodes: usize,
        required: usize,
    },

    #[error("solver did not converge after {iterations} outer iterations (kkt {kkt:e}, volume mismatch {volume:e})")]
    NonConvergence {
        iterations: usize,
        kkt: f64,
        volume: f64,
        best: Box<crate::solver::Solution>,
        history: Vec<(f64, f64)>,
    },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("shooting did not converge: residual {residual:e} after {iterations} iterations")]
    Shooting {
        iterations: usize,
        residual: f64,
        /// `(amplitude, lambda, |residual|)` over a box around the last iterate.
        residual_map: Vec<(f64, f64, f64)>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
