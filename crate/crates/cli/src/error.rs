use std::path::{Path, PathBuf};

/// Everything that can stop a run. Each variant maps to a stable code and an
/// exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] graphlap_core::Error),
    #[error("unknown example `{0}`")]
    UnknownExample(String),
    #[error("unknown analysis `{0}`")]
    UnknownAnalysis(String),
    #[error("parameter `{key}` is not accepted by {analysis}")]
    UnknownParameter { key: String, analysis: String },
    #[error("parameter `{key}`: {message}")]
    BadParameter { key: String, message: String },
    #[error("{0}")]
    Config(String),
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::UnknownExample(_) => "UnknownExample",
            CliError::UnknownAnalysis(_) => "UnknownAnalysis",
            CliError::UnknownParameter { .. } => "UnknownParameter",
            CliError::BadParameter { .. } => "BadParameter",
            CliError::Config(_) => "ConfigError",
            CliError::Io { .. } => "IoError",
            CliError::Parse { .. } => "ParseError",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if !e.is_validation() => EXIT_NUMERICAL,
            _ => EXIT_VALIDATION,
        }
    }

    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            message: err.to_string(),
        }
    }

    pub fn parse(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Parse {
            path: path.to_path_buf(),
            message: err.to_string(),
        }
    }

    pub fn param(key: &str, message: impl Into<String>) -> Self {
        CliError::BadParameter {
            key: key.to_string(),
            message: message.into(),
        }
    }
}
