use std::path::PathBuf;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] openevt_core::Error),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },

    #[error("pipeline {pipeline} refused: {reason}")]
    Refused {
        pipeline: &'static str,
        reason: String,
        parameter: String,
    },
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Machine-readable failure written to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub name: String,
    pub module: String,
    pub parameter: String,
    pub message: String,
}

impl From<&CliError> for ErrorRecord {
    fn from(e: &CliError) -> Self {
        let (name, module, parameter) = match e {
            CliError::Core(c) => (c.name().to_string(), c.module().to_string(), c.parameter()),
            CliError::Config(_) => ("invalid_config".into(), "cli".into(), "config".into()),
            CliError::Io { path, .. } => ("io".into(), "cli".into(), path.display().to_string()),
            CliError::Refused { parameter, .. } => {
                ("pipeline_refused".into(), "cli".into(), parameter.clone())
            }
        };
        ErrorRecord {
            name,
            module,
            parameter,
            message: e.to_string(),
        }
    }
}
