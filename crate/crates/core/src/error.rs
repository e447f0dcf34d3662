use thiserror::Error;

/// Errors raised by the shrinkage library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the requested map.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural invariant of an input was violated (e.g. c² + s² ≠ 1).
    #[error("invariant violation: {0}")]
    Invariant(String),

    /// A numerical routine failed (non-convergence, complex eigenvalues, ...).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A closed-form shrinker was requested for a loss that has none.
    #[error("no closed-form shrinker is available for loss {0}")]
    Unsupported(String),

    /// The asymptotic shift is only defined for shrinkers with unit slope.
    #[error("asymptotic shift undefined for loss {0}: slope is not 1")]
    UndefinedShift(String),

    /// A requested problem size exceeds the configured ceiling.
    #[error("capacity error: {0}")]
    Capacity(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn numeric<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Numeric(msg.into()))
}
