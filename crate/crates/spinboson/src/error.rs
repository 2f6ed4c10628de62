use std::path::PathBuf;

use spinboson_core::dynamics::DynamicsError;
use spinboson_core::model::ModelError;
use spinboson_core::observables::ObservablesError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{context}: {message}")]
    Numerical { context: String, message: String },
}

impl Error {
    /// 1 for configuration and IO problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical { .. } => 2,
            _ => 1,
        }
    }

    pub(crate) fn numerical(context: impl Into<String>, err: impl std::fmt::Display) -> Self {
        Error::Numerical {
            context: context.into(),
            message: err.to_string(),
        }
    }

    pub(crate) fn model(context: impl Into<String>, err: ModelError) -> Self {
        match err {
            ModelError::InvalidConfig { .. } | ModelError::DegenerateRange { .. } => {
                Error::Config(format!("{}: {err}", context.into()))
            }
            other => Error::numerical(context, other),
        }
    }

    pub(crate) fn dynamics(context: impl Into<String>, err: DynamicsError) -> Self {
        Error::numerical(context, err)
    }

    pub(crate) fn observables(context: impl Into<String>, err: ObservablesError) -> Self {
        Error::numerical(context, err)
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
