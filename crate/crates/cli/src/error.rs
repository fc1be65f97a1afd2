use std::path::PathBuf;

use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY_FAILURE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_OPTIMIZER: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: kd_coherence::Error,
    },

    #[error("cannot read {path}: {source}", path = path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Invalid(String),
}

impl CliError {
    pub fn core(context: impl Into<String>) -> impl FnOnce(kd_coherence::Error) -> Self {
        let context = context.into();
        move |source| Self::Core { context, source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core {
                source: kd_coherence::Error::OptimizerFailure { .. },
                ..
            } => EXIT_OPTIMIZER,
            _ => EXIT_VALIDATION,
        }
    }
}
