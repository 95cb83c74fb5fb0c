use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("ring mismatch: cannot combine a line function with a circle function")]
    RingMismatch,
    #[error("unsupported functional: {0}")]
    UnsupportedFunctional(String),
    #[error("weight mismatch: expected {expected}, found {found}")]
    WeightMismatch { expected: String, found: String },
    #[error("inapplicable symmetry: {0}")]
    Inapplicable(String),
    #[error("operator is not in the kernel of P0 (a0 != 0)")]
    NotInKernel,
    #[error("image leaves the truncation: {0}")]
    Overflow(String),
    #[error("truncation too small: {0}")]
    TruncationTooSmall(String),
    #[error("span mismatch: {0}")]
    SpanMismatch(String),
    #[error("span is not closed under composition: {0}")]
    SpanNotClosed(String),
    #[error("oracle disagreement: {0}")]
    OracleDisagreement(String),
    #[error("parse error: {0}")]
    Parse(String),
}
