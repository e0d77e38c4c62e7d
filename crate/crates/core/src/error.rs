use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An input lies outside the operation's domain (negative radicand, composite "prime", ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A checked invariant failed. For several operations this would be a mathematical
    /// counterexample, so it is reported loudly instead of being swallowed.
    #[error("contract violation: {0}")]
    ContractViolation(String),
    /// A fixed-width search was asked for parameters outside its representable range.
    #[error("overflow: {0}")]
    Overflow(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn violation(msg: impl Into<String>) -> Error {
    Error::ContractViolation(msg.into())
}
