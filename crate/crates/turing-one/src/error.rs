use std::path::PathBuf;

use turing_one_core::Error as CoreError;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(i32)]
pub enum ExitCode {
    Ok = 0,
    Failure = 1,
    InvalidInput = 2,
    Divergence = 3,
    TypeI = 10,
    TypeII = 11,
    NotTuring = 12,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("simulation diverged at t = {time}")]
    Divergence { time: f64 },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Core(CoreError),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Input(_) => ExitCode::InvalidInput,
            CliError::Divergence { .. } => ExitCode::Divergence,
            CliError::Core(e) => match e {
                CoreError::Divergence { .. } => ExitCode::Divergence,
                CoreError::NoConvergence => ExitCode::Failure,
                _ => ExitCode::InvalidInput,
            },
            CliError::Io { .. } | CliError::Csv(_) => ExitCode::Failure,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Divergence { time } => CliError::Divergence { time },
            other => CliError::Core(other),
        }
    }
}
