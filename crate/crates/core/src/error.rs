//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input text (manifests, predictions, raster headers).
    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse {
        line: usize,
        column: usize,
        msg: String,
    },

    /// Structurally valid input that violates an invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// Mismatched raster/label shapes.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A pipeline stage failed while processing a frame.
    #[error("stage `{stage}` failed on frame {frame_id}: {msg}")]
    Stage {
        stage: &'static str,
        frame_id: u64,
        msg: String,
    },

    /// A pipeline worker made no progress within the watchdog window.
    #[error("pipeline watchdog fired at `{site}` after {waited_ms} ms without progress")]
    Watchdog { site: &'static str, waited_ms: u64 },
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub fn stage(stage: &'static str, frame_id: u64, msg: impl Into<String>) -> Self {
        Error::Stage {
            stage,
            frame_id,
            msg: msg.into(),
        }
    }
}
