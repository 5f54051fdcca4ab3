use std::path::PathBuf;

use maslov_core::MaslovError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("cannot access {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Ambiguous(String),
    #[error("verification failed: {0}")]
    Verify(String),
    #[error(transparent)]
    Maslov(#[from] MaslovError),
}

impl CliError {
    /// 1 verification failure, 2 input error, 3 numerical ambiguity.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verify(_) => 1,
            CliError::Input(_) | CliError::Io { .. } => 2,
            CliError::Ambiguous(_) => 3,
            CliError::Maslov(e) => match e {
                MaslovError::UndersampledLoop { .. }
                | MaslovError::AmbiguousDegree { .. }
                | MaslovError::IntegrationFailed(_)
                | MaslovError::LiftFailed(_) => 3,
                MaslovError::Internal(_) => 1,
                _ => 2,
            },
        }
    }
}
