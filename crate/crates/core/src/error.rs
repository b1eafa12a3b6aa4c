use std::path::PathBuf;
use thiserror::Error;

/// An invalid configuration value or combination of values.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid configuration: {0}")]
pub struct ConfigError(pub String);

impl ConfigError {
    pub fn new(msg: impl Into<String>) -> Self {
        ConfigError(msg.into())
    }
}

/// Errors surfaced by the runner and its file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}{loc}: {msg}", path = .path.display(), loc = .line.map(|l| format!(":{l}")).unwrap_or_default())]
    ConfigFile { path: PathBuf, line: Option<usize>, msg: String },
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {msg}", .path.display())]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("replay mismatch at step {step}: {field}")]
    ReplayMismatch { step: u64, field: String },
    #[error("{0}")]
    Data(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::ConfigFile { .. } => 2,
            Error::Invariant(_) => 3,
            Error::ReplayMismatch { .. } => 4,
            Error::Io { .. } | Error::Parse { .. } | Error::Data(_) => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
