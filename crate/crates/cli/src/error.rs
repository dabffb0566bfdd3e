use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    Artifact { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Model(#[from] wavesrc::Error),
}

impl CliError {
    pub fn artifact(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Artifact {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 for invalid input, 2 for runtime and numerical failures.
    pub fn exit_code(&self) -> i32 {
        use wavesrc::Error as E;
        match self {
            CliError::Config(_) | CliError::Artifact { .. } => 1,
            CliError::Io { .. } => 2,
            CliError::Model(e) => match e {
                E::InvalidArgument(_)
                | E::DimensionMismatch { .. }
                | E::GridMismatch(_)
                | E::UnknownCase(_)
                | E::Supersonic { .. } => 1,
                _ => 2,
            },
        }
    }
}
