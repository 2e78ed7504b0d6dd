//! Crate-wide error type. Every fallible operation returns [`Result`];
//! domain failures are data, not panics.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("characteristic {0} is neither 0 nor a prime")]
    NotPrime(u64),
    #[error("modulus is reducible{}", .factor.as_ref().map(|f| format!(" (factor {f})")).unwrap_or_default())]
    ReducibleModulus { factor: Option<String> },
    #[error("could not verify irreducibility over Q; use an asserted constructor if the modulus is known irreducible")]
    IrreducibilityUnverified,
    #[error("tower contains no element of multiplicative order {n}")]
    NoSuchRoot { n: u64 },
    #[error("multiplicative order of zero is undefined")]
    ZeroElement,
    #[error("bad reduction at p = {p}: {reason}")]
    BadReduction { p: u64, reason: String },
    #[error("element has a pole at the place over p = {p}")]
    PoleAtPlace { p: u64 },
    #[error("denominator divisible by p = {0}")]
    DenominatorDivisibleByP(u64),
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("expression divides by zero")]
    DivisionByZeroExpr,
    #[error("truncation mismatch: {left} vs {right}")]
    TruncationMismatch { left: usize, right: usize },
    #[error("series is not invertible (zero constant term)")]
    NotInvertible,
    #[error("matrix D_{0} is singular")]
    SingularD(usize),
    #[error("phi is singular")]
    SingularPhi,
    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("values belong to different contexts")]
    ContextMismatch,
    #[error("values belong to different towers")]
    TowerMismatch,
    #[error("module level {0} is not stored")]
    MissingLevel(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("q must be a primitive root of unity with q != 1")]
    InvalidQ,
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    /// Stable machine-readable code for diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotPrime(_) => "NOT_PRIME",
            Error::ReducibleModulus { .. } => "REDUCIBLE_MODULUS",
            Error::IrreducibilityUnverified => "IRREDUCIBILITY_UNVERIFIED",
            Error::NoSuchRoot { .. } => "NO_SUCH_ROOT",
            Error::ZeroElement => "ZERO_ELEMENT",
            Error::BadReduction { .. } => "BAD_REDUCTION",
            Error::PoleAtPlace { .. } => "POLE_AT_PLACE",
            Error::DenominatorDivisibleByP(_) => "DENOMINATOR_DIVISIBLE_BY_P",
            Error::Syntax { .. } => "SYNTAX",
            Error::DivisionByZeroExpr => "DIVISION_BY_ZERO_EXPR",
            Error::TruncationMismatch { .. } => "TRUNCATION_MISMATCH",
            Error::NotInvertible => "NOT_INVERTIBLE",
            Error::SingularD(_) => "SINGULAR_D",
            Error::SingularPhi => "SINGULAR_PHI",
            Error::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            Error::ContextMismatch => "CONTEXT_MISMATCH",
            Error::TowerMismatch => "TOWER_MISMATCH",
            Error::MissingLevel(_) => "MISSING_LEVEL",
            Error::DivisionByZero => "DIVISION_BY_ZERO",
            Error::InvalidQ => "INVALID_Q",
            Error::Invalid(_) => "INVALID",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
