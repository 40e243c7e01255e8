use std::path::PathBuf;

use crate::config::ConfigError;

/// Exit status for configuration, usage and input problems.
pub const EXIT_USAGE: i32 = 2;
/// Exit status when an estimator fails at run time.
pub const EXIT_ESTIMATOR: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),

    #[error("{0}")]
    Usage(String),

    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },

    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },

    /// Rejected parameters or data shapes, caught before any estimator runs.
    #[error("invalid input: {0}")]
    Invalid(covthresh_core::Error),

    #[error("estimator failed: {0}")]
    Estimator(covthresh_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Estimator(_) => EXIT_ESTIMATOR,
            _ => EXIT_USAGE,
        }
    }

    pub fn write(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Write {
            path: path.into(),
            source,
        }
    }
}

/// Sorts a core error into input problems and estimator failures.
pub fn classify(e: covthresh_core::Error) -> CliError {
    use covthresh_core::Error as E;
    match e {
        E::ConvergenceFailure { .. } | E::DegenerateInput(_) => CliError::Estimator(e),
        _ => CliError::Invalid(e),
    }
}
