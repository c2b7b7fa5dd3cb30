use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown variable `{name}` at byte {offset}")]
    UnknownVariable { name: String, offset: usize },
    #[error("negative exponent at byte {offset}")]
    NegativeExponent { offset: usize },
    #[error("arity mismatch: {0}")]
    Arity(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported group: {0}")]
    UnsupportedGroup(String),
    #[error("not quasi-homogeneous: {0}")]
    NotQuasiHomogeneous(String),
    #[error("degenerate weights: {0}")]
    DegenerateWeights(String),
    #[error("zero denominator at monomial {0}")]
    ZeroDenominator(String),
    #[error("not finite: {0}")]
    NonFinite(String),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
    #[error("atlas: {0}")]
    Atlas(String),
    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
