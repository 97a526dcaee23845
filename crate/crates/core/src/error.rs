use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("code length {0} is not a power of two >= 2")]
    InvalidLength(usize),
    #[error("information count {k} must satisfy 0 < k < {n}")]
    InvalidInfoCount { n: usize, k: usize },
    #[error("design erasure probability {0} must lie in (0, 1)")]
    InvalidErasure(f64),
    #[error("expected length {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("bit value {value} at index {index} is not 0 or 1")]
    NotABit { index: usize, value: u8 },
    #[error("frozen position {0} carries a nonzero bit")]
    NonzeroFrozen(usize),
    #[error("channel LLR at index {0} is not finite")]
    NonFiniteLlr(usize),
    #[error("scale factor {0} must lie in (0, 1]")]
    InvalidScale(f64),
    #[error("invalid decoder options: {0}")]
    InvalidOptions(&'static str),
    #[error("message LLRs are not computed by the pruned decoder")]
    Unsupported,
    #[error("constituent update needs at least two inputs, got {0}")]
    TooShort(usize),
    #[error("malformed frozen mask: {0}")]
    MalformedMask(String),
    #[error("invalid campaign configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
