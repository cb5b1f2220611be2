//! Error type shared by every module in this crate.

use num_bigint::BigUint;
use thiserror::Error;

/// Errors produced by the library.
///
/// Two broad classes matter to callers: malformed inputs
/// ([`Error::InvalidInput`], [`Error::EvenModulus`], [`Error::ZeroValue`]) and
/// requests whose parameters fall outside a documented budget or hypothesis
/// gate ([`Error::BudgetExceeded`], [`Error::HypothesisViolated`],
/// [`Error::SieveLimitExceeded`], [`Error::FactorSplitFailed`]).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An operation requiring an odd modulus received an even one.
    #[error("modulus must be odd, got {0}")]
    EvenModulus(BigUint),

    /// An operation requiring a nonzero value received zero.
    #[error("value must be nonzero")]
    ZeroValue,

    /// A parameter violates the operation's documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A sieve was requested past its configured limit.
    #[error("sieve limit {requested} exceeds the supported maximum {max}")]
    SieveLimitExceeded { requested: u64, max: u64 },

    /// An enumeration or sampling loop exceeded its configured budget.
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    /// Factorization could not split a composite cofactor within its
    /// effort budget.
    #[error("could not split composite cofactor {cofactor} within the effort budget")]
    FactorSplitFailed { cofactor: BigUint },

    /// The parameters fall outside the hypotheses under which the requested
    /// quantity is meaningful.
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
}

pub type Result<T> = core::result::Result<T, Error>;
