use std::path::PathBuf;

use redistrib_core::Error as CoreError;

/// Exit codes: 0 ok, 1 axiom failure, 2 bad rule/axiom/grid text,
/// 3 dataset problems, 4 anything else.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(CoreError),
    #[error("dataset {path}: {message}")]
    Dataset { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Core(CoreError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("serializing report: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::Usage(_) => 2,
            CliError::Dataset { .. } => 3,
            CliError::Core(_) | CliError::Io { .. } | CliError::Json(_) => 4,
        }
    }

    pub fn dataset(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        CliError::Dataset {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Parse { .. } | CoreError::UnknownAxiom(_) | CoreError::InvalidGrid(_) => CliError::Parse(e),
            other => CliError::Core(other),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
