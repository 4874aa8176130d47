use bayescase_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config or input files. Exit code 1.
    #[error("{0}")]
    Invalid(String),
    /// A sampler or numerical routine failed. Exit code 2.
    #[error("{0}")]
    Model(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Model(_) | CliError::Io { .. } => 2,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        if e.is_input_error() {
            CliError::Invalid(e.to_string())
        } else {
            CliError::Model(e.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::error::CliError::Invalid(format!($($arg)*))
    };
}
pub(crate) use invalid;
