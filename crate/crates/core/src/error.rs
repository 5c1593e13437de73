//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter failed validation (nonpositive scale, empty sample, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A registry lookup failed (unknown profile, kernel, suite, ...).
    #[error("not found: {0}")]
    NotFound(String),

    /// A numerical contract was violated; carries the measured value and the
    /// limit it was checked against (e.g. density floor vs. bump sup-norm).
    #[error("contract violation: {what} (measured {measured:.6e}, limit {limit:.6e})")]
    Contract {
        what: String,
        measured: f64,
        limit: f64,
    },

    /// A derived object could not be built from its inputs.
    #[error("construction error: {0}")]
    Construction(String),

    /// A numerical routine failed to converge; carries a residual estimate.
    #[error("numeric error: {what} (residual {residual:.6e})")]
    Numeric { what: String, residual: f64 },

    /// The inputs are outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An instance exceeds the size this implementation supports.
    #[error("capacity exceeded: {what} (limit {limit}, got {got})")]
    Capacity {
        what: String,
        limit: usize,
        got: usize,
    },

    /// Experiment configuration failed to parse or validate.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
