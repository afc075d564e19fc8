use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Bad user-supplied parameters (ranges, malformed input, inconsistent data).
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular curve: the discriminant vanishes")]
    SingularCurve,

    #[error("curve has bad reduction at {0}")]
    BadReduction(u64),

    #[error("prime {0} divides the modulus and is ramified in K")]
    Ramified(u64),

    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A computed value broke a mathematical invariant. Always a bug or a
    /// hardware fault, never a user error.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub fn is_invariant_violation(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }
}
