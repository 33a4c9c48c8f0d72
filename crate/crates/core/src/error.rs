use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("potential is not admissible: {0}")]
    NonAdmissible(String),
    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),
    #[error("profile routes disagree: sup difference {diff:e} exceeds {tol:e}")]
    ProfileMismatch { diff: f64, tol: f64 },
    #[error("could not bracket a root: {0}")]
    BracketFailure(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("outside the resolvable regime: {0}")]
    RegimeViolation(String),
    #[error("solver did not converge after {iterations} iterations (residual {residual:e}): {reason}")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        reason: String,
    },
    #[error("no decaying solution found: {0}")]
    NoDecayingSolution(String),
    #[error("perturbation violates the admissibility hypotheses: {0}")]
    HypothesisViolation(String),
    #[error("no sign change of F on (0,1): {0}")]
    NoBeta(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
