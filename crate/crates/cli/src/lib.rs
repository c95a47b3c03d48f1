//! Command implementations behind the `staticgate` binary.

pub mod commands;
pub mod config;
pub mod table;

use std::path::PathBuf;

use staticgate::Error;

pub const EXIT_OTHER: i32 = 1;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_BOUND: i32 = 4;
pub const EXIT_INVARIANT: i32 = 5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] Error),
    #[error("config: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e {
                Error::Parse { .. } | Error::InvalidNetwork(_) => EXIT_PARSE,
                Error::SearchBound { .. } | Error::DimensionBound { .. } => EXIT_BOUND,
                Error::Invariant { .. } | Error::Annihilated { .. } | Error::StepGuard { .. } => EXIT_INVARIANT,
                _ => EXIT_OTHER,
            },
            CliError::Config(_) => EXIT_PARSE,
            CliError::Io { .. } | CliError::Usage(_) => EXIT_OTHER,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
