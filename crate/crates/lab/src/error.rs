use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}:{line}: {message}")]
    Config {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}:{line}: {message}")]
    Input {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Core(#[from] dyson_core::Error),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Format(String),
}

impl LabError {
    pub fn usage(msg: impl Into<String>) -> Self {
        LabError::Usage(msg.into())
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        LabError::Io {
            context: context.into(),
            source,
        }
    }

    /// Parameter and input problems exit with 2; failures of the computation itself with 1.
    pub fn exit_code(&self) -> i32 {
        use dyson_core::Error as E;
        match self {
            LabError::Usage(_) | LabError::Config { .. } | LabError::Input { .. } => EXIT_USAGE,
            LabError::Core(e) => match e {
                E::NotConverged { .. } | E::DegenerateFamily => EXIT_VERIFICATION_FAILED,
                _ => EXIT_USAGE,
            },
            LabError::Io { .. } | LabError::Format(_) => EXIT_VERIFICATION_FAILED,
        }
    }

    /// Short machine-readable tag for structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            LabError::Usage(_) => "usage",
            LabError::Config { .. } => "config",
            LabError::Input { .. } => "input",
            LabError::Core(dyson_core::Error::ConditionIiiDivergent { .. }) => {
                "condition-iii-divergent"
            }
            LabError::Core(_) => "parameter",
            LabError::Io { .. } => "io",
            LabError::Format(_) => "format",
        }
    }
}

pub type LabResult<T> = Result<T, LabError>;
