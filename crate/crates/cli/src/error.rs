use std::fmt;

use dfs_core::DfsError;

/// Failure classes with distinct process exit codes.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    NonConvergence(String),
    Io(String),
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Other(_) => 1,
            CliError::Config(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn io(path: &std::path::Path, err: impl fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::NonConvergence(m) => write!(f, "fit did not converge: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Other(m) => write!(f, "{m}"),
        }
    }
}

impl From<DfsError> for CliError {
    fn from(e: DfsError) -> Self {
        match e {
            DfsError::InvalidState(_)
            | DfsError::InvalidParameter { .. }
            | DfsError::InvalidSequence(_)
            | DfsError::RegimeViolated(_)
            | DfsError::UnsupportedByEngine { .. }
            | DfsError::EmptyInput(_) => CliError::Config(e.to_string()),
            DfsError::NonConvergence { .. } | DfsError::RankDeficient(_) => CliError::NonConvergence(e.to_string()),
            _ => CliError::Other(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
