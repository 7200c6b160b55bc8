//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by parsing, asset loading, rendering and pipeline runs.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A label file line could not be parsed. Carries the 1-based line number.
    #[error("label parse error at line {line}: {message}")]
    LabelParse { line: usize, message: String },

    /// An annotation could not be serialized in the requested representation.
    #[error("cannot serialize annotation {index}: {message}")]
    LabelSerialize { index: usize, message: String },

    /// Metadata table problem. `row` is the 1-based data row (0 = header).
    #[error("metadata error at row {row}: {message}")]
    Metadata { row: usize, message: String },

    /// Image decode/encode problem (wrong channel count, bit depth, ...).
    #[error("image error: {message}")]
    Image { message: String },

    /// Mesh or material sidecar problem.
    #[error("mesh error: {message}")]
    Mesh { message: String },

    /// Pipeline configuration problem (missing key, bad range, unknown key).
    #[error("config error: {message}")]
    Config { message: String },

    /// Inconsistent or invalid data encountered while running.
    #[error("{message}")]
    Data { message: String },

    /// I/O failure with the path that caused it.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn image(message: impl Into<String>) -> Self {
        Error::Image {
            message: message.into(),
        }
    }

    pub(crate) fn mesh(message: impl Into<String>) -> Self {
        Error::Mesh {
            message: message.into(),
        }
    }

    pub(crate) fn config(message: impl Into<String>) -> Self {
        Error::Config {
            message: message.into(),
        }
    }

    pub(crate) fn data(message: impl Into<String>) -> Self {
        Error::Data {
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
