use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the numerical kernels and decompositions.
///
/// Mode numbers and multi-index components are reported 1-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("result dimensions overflow the platform size limit")]
    DimensionOverflow,

    #[error("SVD failed to converge after {iterations} iterations")]
    ConvergenceFailure { iterations: usize },

    #[error("rank {rank} out of range 1..={max}{}", mode_suffix(*.mode))]
    RankOutOfRange {
        rank: usize,
        max: usize,
        mode: Option<usize>,
    },

    #[error("index {index} out of range 1..={size} in mode {mode}")]
    IndexOutOfRange {
        mode: usize,
        index: usize,
        size: usize,
    },

    #[error("mode {mode} out of range for an order-{order} tensor")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("incompatible dimensions: {0}")]
    IncompatibleDimensions(String),

    #[error("non-finite value at offset {offset}")]
    NonFinite { offset: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn mode_suffix(mode: Option<usize>) -> String {
    match mode {
        Some(k) => format!(" in mode {k}"),
        None => String::new(),
    }
}
