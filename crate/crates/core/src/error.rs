use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("expected a unique recurrent class, found {0}")]
    MultipleRecurrentClasses(usize),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("quotient machine is not well defined: {0}")]
    NotWellDefinedQuotient(String),

    #[error("matrix is not positive semidefinite: eigenvalue {0:e}")]
    NotPsd(f64),

    #[error("trace distance bound {t_max} lies outside the monotone range [0, {limit}]")]
    OutOfMonotoneRange { t_max: f64, limit: f64 },

    #[error("invalid delta assignment: {0}")]
    InvalidDelta(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("malformed machine: {0}")]
    MalformedMachine(String),

    #[error("symmetric eigensolver did not converge")]
    NoConvergence,

    #[error("quantum complexity {quantum} exceeds classical complexity {classical}")]
    QuantumExceedsClassical { quantum: f64, classical: f64 },

    #[error("classical/quantum reversal does not hold: {0}")]
    ReversalViolated(String),

    #[error("machine document: {0}")]
    Document(String),
}

pub type Result<T> = std::result::Result<T, Error>;
