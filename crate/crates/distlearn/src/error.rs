use thiserror::Error;

/// Errors reported by distribution construction, metric evaluation,
/// bound calculators, and the experiment harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty domain: a pmf needs at least one entry")]
    EmptyDomain,

    #[error("negative mass {value} at index {index}")]
    NegativeMass { index: usize, value: f64 },

    #[error("non-finite pmf entry at index {index}")]
    NonFinite { index: usize },

    #[error("pmf sums to {sum}, which is farther than 1e-9 from 1")]
    NotNormalized { sum: f64 },

    #[error("domain mismatch: k = {left} vs k = {right}")]
    DomainMismatch { left: usize, right: usize },

    #[error("sample value {value} outside the domain [1, {k}]")]
    OutOfDomain { value: u64, k: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
