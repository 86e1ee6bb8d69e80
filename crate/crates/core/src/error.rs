use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("recurrence order must be at least 1")]
    EmptyOrder,

    #[error("order {order} requires {order} coefficients and {order} initial terms, got {coeffs} and {initial}")]
    ArityMismatch {
        order: usize,
        coeffs: usize,
        initial: usize,
    },

    #[error("constant coefficient a0 must be non-zero")]
    ZeroLeadCoefficient,

    #[error("composition chain must contain at least one level")]
    EmptyChain,

    #[error("level {level} ({name}) of the chain is not reversible: a0 = {a0}")]
    NotReversible {
        level: usize,
        name: String,
        a0: String,
    },

    #[error("modulus must be at least 2, got {0}")]
    InvalidModulus(u64),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("level {level} was asked for non-positive index {index}")]
    NonPositiveIndex { level: usize, index: String },

    #[error("window evidence insufficient: {0}")]
    NonMonotoneEvidence(String),

    #[error("index {n} is below the tower start {m} and exact fallback failed")]
    IndexBelowTowerStart { n: String, m: u64 },

    #[error("precision insufficient: {0}")]
    PrecisionInsufficient(String),

    #[error("polynomial does not define a Pisot or Salem number")]
    NotPisotOrSalem,

    #[error("no prime factor up to {bound} found for {what}")]
    NoFactorFound { bound: u64, what: String },

    #[error("cannot certify the size condition: {0}")]
    HTooLarge(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn budget(msg: impl Into<String>) -> Self {
        Error::BudgetExceeded(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
