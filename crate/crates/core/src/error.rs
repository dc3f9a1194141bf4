use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Shapes or alphabet sizes of the operands do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// A vector or matrix is not a probability distribution.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    /// Every term of a normalizing sum vanished.
    #[error("degenerate support: {0}")]
    DegenerateSupport(String),
    /// A non-finite value appeared where a finite one is required.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// The update constraint cannot be met by any joint distribution.
    #[error("infeasible exponent: {0}")]
    Infeasible(String),
    /// Invalid simulation or scenario parameters.
    #[error("configuration error: {0}")]
    Config(String),
    /// A Monte-Carlo experiment would need an impractical number of samples.
    #[error("experiment infeasible: {0}")]
    ExperimentInfeasible(String),
    /// Reading a scenario or writing results failed.
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
