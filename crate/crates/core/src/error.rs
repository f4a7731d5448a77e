use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("write failed: {0}")]
    Write(#[from] std::io::Error),

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("line {line}: frame index {frame} follows frame {previous}")]
    FrameRegression { line: usize, frame: u64, previous: u64 },

    #[error("position id {position_id} at frame {frame} lies outside the configured grid")]
    OutOfGrid { frame: u64, position_id: u64 },

    #[error("frame {frame}: {side} detection without a track id")]
    MissingTrackId { frame: u64, side: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("rate {rate} fps: window frames not produced by the tracker: {missing}")]
    MissingWindowFrames { rate: f64, missing: String },

    #[error("frame {frame}: {count} detections exceed the enumeration bound of {bound}")]
    EnumerationBound { frame: u64, count: usize, bound: usize },

    #[error("config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    /// Errors caused by the caller's inputs rather than by the toolkit itself.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Write(_) => false,
            Error::InFile { source, .. } => source.is_input_error(),
            _ => true,
        }
    }

    /// Attach a file path so diagnostics read `path: line N, column M: ...`.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        match self {
            Error::Io { .. } | Error::InFile { .. } => self,
            other => Error::InFile {
                path: path.into(),
                source: Box::new(other),
            },
        }
    }
}
