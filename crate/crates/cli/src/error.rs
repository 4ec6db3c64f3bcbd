use std::path::PathBuf;

use thiserror::Error;

/// CLI-level failures, tagged with the pipeline stage that produced them.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{stage}: {message}")]
    Stage { stage: &'static str, message: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{stage}: {source}")]
    Io {
        stage: &'static str,
        #[source]
        source: std::io::Error,
    },

    #[error("{stage}: {source}")]
    Core {
        stage: &'static str,
        #[source]
        source: countnet_core::CoreError,
    },
}

impl CliError {
    pub fn stage(stage: &'static str, message: impl Into<String>) -> Self {
        Self::Stage {
            stage,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) trait StageContext<T> {
    fn at_stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageContext<T> for std::result::Result<T, countnet_core::CoreError> {
    fn at_stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|source| CliError::Core { stage, source })
    }
}

impl<T> StageContext<T> for std::result::Result<T, std::io::Error> {
    fn at_stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|source| CliError::Io { stage, source })
    }
}
