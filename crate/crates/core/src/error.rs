use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid mass vector: {0}")]
    InvalidMass(String),

    #[error("not a metric: {0}")]
    NonMetric(String),

    #[error("invalid flow: {0}")]
    InvalidFlow(String),

    #[error("infeasible dual potentials at edge ({0}, {1})")]
    InfeasibleDuals(usize, usize),

    #[error("invalid market: {0}")]
    InvalidMarket(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
