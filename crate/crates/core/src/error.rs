use thiserror::Error;

/// Errors produced by the simulator core.
#[derive(Debug, Error)]
pub enum EconError {
    #[error("invalid config: {field}: {message}")]
    Config { field: String, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("data file {path}: {message}")]
    Data { path: String, message: String },

    #[error("policy error: {0}")]
    Policy(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl EconError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        EconError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn domain(message: impl Into<String>) -> Self {
        EconError::Domain(message.into())
    }

    pub fn data(path: impl Into<String>, message: impl Into<String>) -> Self {
        EconError::Data {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = EconError> = std::result::Result<T, E>;
