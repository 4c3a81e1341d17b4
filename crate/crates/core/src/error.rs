use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of a distribution function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A test specification violates one of its invariants.
    #[error("invalid test specification: {0}")]
    InvalidSpec(String),

    /// No design satisfies the requested size, e.g. alpha is too small for
    /// the maximum sample size of a discrete test.
    #[error("infeasible design: {0}")]
    Infeasible(String),

    /// The observations so far carry no spread, so the t statistic is undefined.
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    /// The caller drove the sequential machinery in a way it does not allow
    /// (observation after a terminal decision, mismatched sub-tests, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// A line of an observation file could not be parsed.
    #[error("malformed observation at line {line}: {message}")]
    Malformed { line: usize, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn spec(msg: impl Into<String>) -> Self {
        Error::InvalidSpec(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}
