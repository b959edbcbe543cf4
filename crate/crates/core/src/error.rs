use alloc::string::String;
use alloc::vec::Vec;

/// Everything that can go wrong inside the algorithmic core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("token not found in embedding space: {0}")]
    MissingWord(String),

    #[error("tokens not found in embedding space: {}", .0.join(", "))]
    MissingWords(Vec<String>),

    #[error("zero-norm vector (degenerate embedding)")]
    ZeroNorm,

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite component at row {row}")]
    NonFinite { row: usize },

    #[error("degenerate statistic: {0}")]
    Degenerate(&'static str),

    #[error("attribute set `{name}` has {len} words, at least {min} required")]
    AttributeTooSmall {
        name: String,
        len: usize,
        min: usize,
    },

    #[error("attribute sets differ in size ({a} vs {b})")]
    UnequalAttributes { a: usize, b: usize },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty result: {0}")]
    Empty(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
