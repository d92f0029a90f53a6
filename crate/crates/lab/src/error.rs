use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("{0}")]
    Model(#[from] ssm_dynamics::Error),

    #[error("I/O error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("run diverged at step {step}: {reason}")]
    Diverged { step: usize, reason: String },
}

impl LabError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        LabError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 config, 2 divergence, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config { .. } | LabError::Model(_) => 1,
            LabError::Diverged { .. } => 2,
            LabError::Io { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
