//! Prompt rendering, chat-completion backends and response collection for
//! two-option risky-choice questionnaires.

pub mod backend;
pub mod collect;
pub mod config;
pub mod error;
pub mod parse;
pub mod prompt;

pub use backend::{Backend, FixedBackend, HttpBackend, MockBackend, Request};
pub use collect::{collect_responses, Collected, TrialRecord};
pub use config::{BackendConfig, ExperimentConfig, MockAgent, QueryConfig};
pub use error::{BackendError, LlmError};
pub use parse::{parse_choice, ParsedChoice};
pub use prompt::{render_prompt, PromptSpec};
