use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration file or flag value.
    #[error("config error: {0}")]
    Config(String),

    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("{path}: {source}")]
    Input { path: String, source: rankfield::Error },

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("pattern {index}: {source}")]
    Generator { index: usize, source: rankfield::Error },

    #[error(transparent)]
    Core(#[from] rankfield::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }

    /// Attaches `path` to a library error, keeping parse line numbers.
    pub fn at(path: &Path, err: rankfield::Error) -> Self {
        let path = path.display().to_string();
        match err {
            rankfield::Error::Parse { line, message } => CliError::Parse { path, line, message },
            source => CliError::Input { path, source },
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}
