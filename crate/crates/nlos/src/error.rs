//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-side contract (pre-condition) was violated.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Index outside the valid grid.
    #[error("index ({i}, {j}) out of bounds for {rows}x{cols} grid")]
    OutOfBounds {
        i: isize,
        j: isize,
        rows: usize,
        cols: usize,
    },

    /// Malformed binary or JSON input. `offset` is the byte offset at which
    /// the problem was detected, when known.
    #[error("format error at byte {offset}: {message}")]
    Format { offset: usize, message: String },

    /// Geometry too degenerate to produce a meaningful answer.
    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    /// No feature tracks survived detection/matching.
    #[error("no usable feature tracks")]
    EmptyTracks,

    /// Every optimizer start failed.
    #[error("optimization failed: {0}")]
    OptimizationFailed(String),

    /// Iterative solver did not reach its tolerance.
    #[error("solver failed: {0}")]
    SolverFailed(String),

    /// Array shapes do not agree.
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("render error: {0}")]
    Render(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("image: {0}")]
    Image(#[from] image::ImageError),
}

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn format(offset: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: msg.into(),
        }
    }
}
