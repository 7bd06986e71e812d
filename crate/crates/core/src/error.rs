use thiserror::Error;

/// Errors raised by mesh construction, assembly and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh parameter: {0}")]
    InvalidMeshParameter(String),

    #[error("degenerate cell {cell} (signed measure {measure:e})")]
    DegenerateCell { cell: usize, measure: f64 },

    #[error("cell id {0} out of range")]
    InvalidCell(usize),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("zero diagonal entry in the bubble block at face {face}")]
    ZeroBubbleDiagonal { face: usize },

    #[error("bubble block is not diagonal; static condensation needs a diagonal block")]
    NonDiagonalBubbleBlock,

    #[error("linear solve failed ({scheme}): {reason}")]
    LinearSolve { scheme: String, reason: String },

    #[error("unknown benchmark case '{0}'")]
    UnknownCase(String),

    #[error("unknown scheme '{scheme}' for case kind {kind}")]
    UnknownScheme { scheme: String, kind: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
