use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    /// Bad configuration or command-line input.
    #[error("configuration error: {key}: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Core(#[from] selfnorm_core::Error),

    /// A core failure inside one experiment cell.
    #[error("cell {cell}: {source}")]
    Cell {
        cell: String,
        #[source]
        source: selfnorm_core::Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    /// A verification check did not hold.
    #[error("check failed: {0}")]
    Check(String),
}

impl LabError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        LabError::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for configuration, 3 for numeric failures and aborts, 4 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Config { .. } => 2,
            LabError::Core(e) | LabError::Cell { source: e, .. } => {
                if e.is_config() {
                    2
                } else {
                    3
                }
            }
            LabError::Io { .. } => 4,
            LabError::Csv(e) => {
                if e.is_io_error() {
                    4
                } else {
                    2
                }
            }
            LabError::Check(_) => 3,
        }
    }
}

impl From<&LabError> for ExitCode {
    fn from(e: &LabError) -> Self {
        ExitCode::from(e.exit_code())
    }
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;
