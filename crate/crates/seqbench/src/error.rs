use std::path::{Path, PathBuf};

/// Errors from file handling and command execution.
///
/// `Io` and `Format` always name the offending path so CLI failures point at
/// the file, not just the syscall.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Core(#[from] seqbench_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    pub fn format(path: &Path, msg: impl std::fmt::Display) -> Self {
        Error::Format(format!("{}: {msg}", path.display()))
    }

    pub fn at_line(path: &Path, line: usize, msg: impl std::fmt::Display) -> Self {
        Error::Format(format!("{}: line {line}: {msg}", path.display()))
    }
}
