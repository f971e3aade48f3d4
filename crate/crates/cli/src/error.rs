use std::path::PathBuf;

use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] mems_liquid::Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0} reproduction row(s) failed")]
    Reproduce(usize),
}

impl CliError {
    /// 1 for bad input, 2 for solver failures, 3 for a failed reproduction.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Model(e) if e.is_numerical() => 2,
            CliError::Reproduce(_) => 3,
            _ => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
