use thiserror::Error;

/// CLI failure classes and their process exit codes: parse and validation
/// problems exit 2, numerical failures 3, failed checks 4.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid scenario: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{failed} of {total} checks failed")]
    CheckFailure { failed: usize, total: usize },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Validation(_) | CliError::Io { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::CheckFailure { .. } => 4,
        }
    }
}

/// Errors surfacing from the library while a run is in progress are
/// numerical; everything raised while building a run is a scenario problem.
pub fn run_error(e: liepoisson::Error) -> CliError {
    match e {
        liepoisson::Error::NonFinite { .. } => CliError::Numerical(e.to_string()),
        other => CliError::Validation(other.to_string()),
    }
}

pub fn config_error(e: liepoisson::Error) -> CliError {
    CliError::Validation(e.to_string())
}

pub fn io_error(path: &std::path::Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        source,
    }
}
