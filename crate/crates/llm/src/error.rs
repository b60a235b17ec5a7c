use thiserror::Error;

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("prompt construction: missing or invalid field: {0}")]
    MissingField(&'static str),

    #[error("prompt construction: {0}")]
    Template(String),

    #[error("decision parse: {message}; raw response: {raw:?}")]
    Parse { message: String, raw: String },

    #[error("transport: {0}")]
    Transport(String),

    #[error("protocol: {0}")]
    Protocol(String),

    #[error("scripted client has no response for agent {agent_id}, month {month_index}")]
    MissingScript { agent_id: usize, month_index: usize },

    #[error("{0}")]
    Domain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = LlmError> = std::result::Result<T, E>;
