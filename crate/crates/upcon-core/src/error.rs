//! Error type shared by all simulator modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the physical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter set is internally inconsistent or unusable.
    #[error("configuration error: {0}")]
    Config(String),

    /// A documented precondition (e.g. sortedness) does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Measured quantities contradict a physical bound.
    #[error("inconsistency: {0}")]
    Inconsistency(String),

    /// An iterative fit failed to converge.
    #[error("fit error: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
