use thiserror::Error;

/// Errors raised by the simulator and its analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("relay index {k} out of range 1..={relays}")]
    RelayOutOfRange { k: usize, relays: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("multiplexing gain {0} outside [0, 1]")]
    GainOutOfRange(f64),

    #[error("power level must exceed 1 (got {0})")]
    PowerTooSmall(f64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("noise covariance is not positive definite")]
    NotPositiveDefinite,

    #[error("hamiltonian search supports at most {max} relays (got {relays})")]
    GraphTooLarge { relays: usize, max: usize },

    #[error("malformed interference graph: {0}")]
    MalformedGraph(String),

    #[error("need at least 3 usable estimates for a slope fit (got {0})")]
    TooFewPoints(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
