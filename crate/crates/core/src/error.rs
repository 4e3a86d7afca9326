use thiserror::Error;

/// Errors raised by the exponent, lattice, scheme and simulation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Lattice enumeration would exceed the configured point cap.
    #[error("enumeration needs about {estimated:.0} points, cap is {cap}")]
    Resource { estimated: f64, cap: usize },

    /// The requested configuration cannot be realised (codebook too large, ...).
    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
