//! Exit-code classification of command failures.

use std::fmt;

use prospect_core::Error as CoreError;
use prospect_llm::{BackendError, LlmError};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_BACKEND: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub type CmdResult<T = ()> = Result<T, Failure>;

impl Failure {
    pub fn usage(msg: impl fmt::Display) -> Self {
        Self {
            code: EXIT_USAGE,
            error: anyhow::anyhow!("{msg}"),
        }
    }

    pub fn data(msg: impl fmt::Display) -> Self {
        Self {
            code: EXIT_DATA,
            error: anyhow::anyhow!("{msg}"),
        }
    }

    pub fn backend(msg: impl fmt::Display) -> Self {
        Self {
            code: EXIT_BACKEND,
            error: anyhow::anyhow!("{msg}"),
        }
    }

    pub fn context(self, what: impl fmt::Display) -> Self {
        Self {
            code: self.code,
            error: self.error.context(what.to_string()),
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        let code = match e {
            CoreError::InvalidConfig(_) | CoreError::ParameterOutOfBounds { .. } | CoreError::Io(_) => {
                EXIT_USAGE
            }
            _ => EXIT_DATA,
        };
        Self {
            code,
            error: e.into(),
        }
    }
}

impl From<LlmError> for Failure {
    fn from(e: LlmError) -> Self {
        match e {
            LlmError::Core(c) => c.into(),
            LlmError::Config(_) | LlmError::Backend(BackendError::Config(_)) | LlmError::Io(_) => {
                Self {
                    code: EXIT_USAGE,
                    error: e.into(),
                }
            }
            LlmError::Backend(_) => Self {
                code: EXIT_BACKEND,
                error: e.into(),
            },
            LlmError::Json(_) => Self {
                code: EXIT_DATA,
                error: e.into(),
            },
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self {
            code: EXIT_USAGE,
            error: e.into(),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Self {
            code: EXIT_DATA,
            error: e.into(),
        }
    }
}
