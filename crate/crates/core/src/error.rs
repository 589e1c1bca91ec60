use thiserror::Error;

/// Errors produced by samplers, estimators and the experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The conditioning event has probability zero in floating point.
    #[error("threshold unreachable: {0}")]
    ThresholdUnreachable(String),

    /// A caller broke a precondition (e.g. a state outside the rare set).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// The normalizing constant of the estimator is zero.
    #[error("degenerate model: normalizing constant is zero")]
    DegenerateModel,

    #[error("quadrature oracle supports at most 4 steps, got {0}")]
    UnsupportedDepth(usize),

    /// Rejection sampling would need too many trials per accepted draw.
    #[error("oracle infeasible: expected {expected_trials:.3e} trials per sample exceeds {limit:.0e}")]
    OracleInfeasible { expected_trials: f64, limit: f64 },

    /// Every violated configuration constraint, one message each.
    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
