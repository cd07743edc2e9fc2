//! Chat-completion backends.

use std::time::Duration;

use prospect_core::agents::{trial_draw, Agent};
use prospect_core::prospects::{Context, PairOption};
use serde_json::json;

use crate::error::BackendError;

/// One request: the rendered prompt plus what a mock needs to answer it.
pub struct Request<'a> {
    pub context: &'a Context,
    pub rep: u32,
    pub prompt: &'a str,
    pub temperature: f64,
    pub max_tokens: u32,
}

pub trait Backend: Send + Sync {
    fn name(&self) -> String;

    /// Configuration and credential checks; runs before any request.
    fn validate(&self) -> Result<(), BackendError> {
        Ok(())
    }

    fn complete(&self, req: &Request<'_>) -> Result<String, BackendError>;
}

/// OpenAI-style `/chat/completions` endpoint.
#[derive(Debug, Clone)]
pub struct HttpBackend {
    pub endpoint: String,
    pub model: String,
    /// Environment variable holding the bearer token.
    pub api_key_env: String,
    pub timeout: Duration,
}

impl HttpBackend {
    fn api_key(&self) -> Result<String, BackendError> {
        match std::env::var(&self.api_key_env) {
            Ok(k) if !k.is_empty() => Ok(k),
            _ => Err(BackendError::Config(format!(
                "environment variable {} is not set",
                self.api_key_env
            ))),
        }
    }

    pub fn request_body(&self, req: &Request<'_>) -> serde_json::Value {
        json!({
            "model": self.model,
            "messages": [{"role": "user", "content": req.prompt}],
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        })
    }
}

/// Message content of the first choice.
pub fn extract_content(body: &str) -> Result<String, BackendError> {
    let v: serde_json::Value =
        serde_json::from_str(body).map_err(|e| BackendError::Response(e.to_string()))?;
    v.pointer("/choices/0/message/content")
        .and_then(|c| c.as_str())
        .map(str::to_string)
        .ok_or_else(|| BackendError::Response(format!("no choices[0].message.content in {body}")))
}

impl Backend for HttpBackend {
    fn name(&self) -> String {
        format!("http:{}", self.model)
    }

    fn validate(&self) -> Result<(), BackendError> {
        if self.endpoint.is_empty() || self.model.is_empty() {
            return Err(BackendError::Config("endpoint and model are required".into()));
        }
        self.api_key().map(|_| ())
    }

    fn complete(&self, req: &Request<'_>) -> Result<String, BackendError> {
        let key = self.api_key()?;
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let body = self.request_body(req).to_string();
        let mut resp = agent
            .post(&self.endpoint)
            .header("Authorization", &format!("Bearer {key}"))
            .header("Content-Type", "application/json")
            .send(body.as_str())
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(BackendError::Status { status, body: text });
        }
        extract_content(&text)
    }
}

/// Answers with the slot letter an agent's Bernoulli draw picks, using the
/// same draws as `simulate_choices` for the same seed.
pub struct MockBackend {
    pub agent: Box<dyn Agent>,
    pub seed: u64,
}

impl Backend for MockBackend {
    fn name(&self) -> String {
        format!("mock:{}", self.agent.label())
    }

    fn complete(&self, req: &Request<'_>) -> Result<String, BackendError> {
        let id = req.context.id();
        let p = self.agent.choice_prob(req.context);
        let option = if trial_draw(self.seed, &id, req.rep, p) {
            PairOption::A
        } else {
            PairOption::B
        };
        // The order variant is its own inverse.
        let slot = req.context.order().option_in_slot(option);
        Ok(match slot {
            PairOption::A => "A".to_string(),
            PairOption::B => "B".to_string(),
        })
    }
}

/// Always returns the same text.
pub struct FixedBackend(pub String);

impl Backend for FixedBackend {
    fn name(&self) -> String {
        "fixed".into()
    }

    fn complete(&self, _: &Request<'_>) -> Result<String, BackendError> {
        Ok(self.0.clone())
    }
}
