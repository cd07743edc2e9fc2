use thiserror::Error;

#[derive(Debug, Error)]
pub enum BackendError {
    /// Misconfiguration or missing credentials; raised before any request.
    #[error("backend configuration: {0}")]
    Config(String),
    #[error("transport: {0}")]
    Transport(String),
    #[error("HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response: {0}")]
    Response(String),
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Core(#[from] prospect_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = LlmError> = std::result::Result<T, E>;
