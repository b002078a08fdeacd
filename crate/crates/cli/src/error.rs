use std::path::PathBuf;

/// Failure of a CLI run, mapped onto a stable exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] qpf_core::Error),
}

/// Exit codes. Documented in the README; do not renumber.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const NON_FINITE: i32 = 3;
    pub const IO: i32 = 4;
    pub const NUMERICAL: i32 = 5;
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        use qpf_core::Error as E;
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Io { .. } => exit::IO,
            CliError::Core(E::NonFinite { .. }) => exit::NON_FINITE,
            CliError::Core(E::AlphaOutOfRange(_) | E::InvalidArgument(_)) => exit::CONFIG,
            CliError::Core(_) => exit::NUMERICAL,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
