//! Error type of the IO and command layer.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Configuration or input validation problems (exit code 2).
    #[error("{0}")]
    Config(String),
    /// Estimation failures surfaced from the core (exit code 3 in
    /// single-model commands).
    #[error(transparent)]
    Core(#[from] choicefit_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn json(path: impl Into<String>, source: serde_json::Error) -> Self {
        CliError::Json {
            path: path.into(),
            source,
        }
    }

    /// Process exit code this error maps to: 2 for configuration and
    /// validation problems, 3 for estimation failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } | CliError::Json { .. } => 2,
            CliError::Core(e) => core_exit_code(e),
        }
    }
}

fn core_exit_code(e: &choicefit_core::Error) -> u8 {
    use choicefit_core::Error::*;
    match e {
        UnknownVariable { .. }
        | DuplicateVariable { .. }
        | KindMismatch { .. }
        | InvalidValue { .. }
        | InvalidSpec(_)
        | AllMissing { .. }
        | Dimension { .. } => 2,
        Underdetermined { .. }
        | DegenerateOutcome { .. }
        | Separation { .. }
        | Collinear { .. }
        | NestingViolation { .. }
        | Inconsistent(_) => 3,
        Subset { source, .. } => core_exit_code(source),
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
