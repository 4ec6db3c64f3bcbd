use thiserror::Error;

/// Errors surfaced by model, likelihood, prior, sampler, and evaluation code.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("non-finite input: {0}")]
    NonFinite(f64),

    #[error("node index {index} out of range for {n_nodes} nodes")]
    IndexOutOfRange { index: usize, n_nodes: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("cell ({0}, {1}) is not in the supplied cell list")]
    CellNotInList(usize, usize),

    #[error("cell list must not be empty")]
    EmptyCells,

    #[error("negative count: {0}")]
    NegativeCount(f64),

    #[error("count {0} is not integer-valued")]
    NonIntegerCount(f64),

    #[error("sample list must not be empty")]
    EmptySamples,

    #[error("count matrix has no nonzero counts")]
    AllZeroCounts,

    #[error("observed mask has {0} cells, need at least 2")]
    MaskTooSmall(usize),

    #[error("need at least 2 nodes, got {0}")]
    TooFewNodes(usize),

    #[error("slice interval collapsed below 1e-300 (degenerate density)")]
    DegenerateSlice,

    #[error("vector is constant; rank correlation is undefined")]
    ConstantVector,

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
