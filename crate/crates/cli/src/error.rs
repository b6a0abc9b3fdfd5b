use std::path::PathBuf;
use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Input { path: PathBuf, source: maglap::Error },
    #[error(transparent)]
    Core(#[from] maglap::Error),
    #[error("replay mismatch: {0}")]
    Replay(String),
}

impl CliError {
    /// 2 for bad input, 3 when a dense computation is over its size limit,
    /// 4 for numerical failures and irreproducible replays.
    pub fn code(&self) -> u8 {
        let core = match self {
            CliError::Input { source, .. } | CliError::Core(source) => Some(source),
            _ => None,
        };
        match (self, core) {
            (CliError::Replay(_), _) => 4,
            (_, Some(maglap::Error::DimensionTooLarge { .. })) => 3,
            (_, Some(maglap::Error::Numerical(_))) => 4,
            _ => 2,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code())
    }
}

pub fn io_error(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}
