//! Error type shared across the simulation, configuration, and output layers.

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the engine.
///
/// `Invalid` carries a dotted field path (`trigger.alpha`,
/// `model.params_by_regime[1].sigma`, ...) so configuration mistakes point at
/// the offending value.
#[derive(Debug, Error)]
pub enum Error {
    /// A value violated its domain contract.
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },

    /// A configuration file could not be read or parsed.
    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },

    /// Filesystem failure while writing results.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A Monte Carlo path failed; the index identifies the substream.
    #[error("path {path_index}: {source}")]
    Path {
        path_index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Process exit code the CLI maps this error to: 2 for configuration and
    /// validation problems, 3 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invalid { .. } | Error::Config { .. } => 2,
            Error::Io { .. } | Error::Path { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
