use std::io;
use std::path::PathBuf;

use navcast_core::Error as CoreError;

/// Failures of the command-line tool, each mapped to a distinct exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Ingest { path: PathBuf, message: String },
    #[error("analysis failed: {0}")]
    Analysis(CoreError),
    #[error("model fitting failed: {0}")]
    Training(CoreError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl CliError {
    pub const EXIT_USAGE: i32 = 2;
    pub const EXIT_INGEST: i32 = 3;
    pub const EXIT_ANALYSIS: i32 = 4;
    pub const EXIT_TRAINING: i32 = 5;
    pub const EXIT_IO: i32 = 6;

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => Self::EXIT_USAGE,
            CliError::Ingest { .. } => Self::EXIT_INGEST,
            CliError::Analysis(_) => Self::EXIT_ANALYSIS,
            CliError::Training(_) => Self::EXIT_TRAINING,
            CliError::Io { .. } | CliError::Format { .. } => Self::EXIT_IO,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Classifies a core error raised while fitting models: configuration
    /// problems are usage errors, everything else is a training failure.
    pub(crate) fn from_fit(e: CoreError) -> Self {
        match e {
            CoreError::Configuration(msg) => CliError::Usage(msg),
            CoreError::Analysis(_) => CliError::Analysis(e),
            other => CliError::Training(other),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
