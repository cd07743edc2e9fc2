//! Experiment configuration (TOML).

use std::path::{Path, PathBuf};
use std::time::Duration;

use prospect_core::agents::{Agent, Economicus, PtAgent, RegretAgent};
use prospect_core::models::{PtParams, RegretParams};
use prospect_core::prospects::{Context, GridConfig};
use serde::{Deserialize, Serialize};

use crate::backend::{Backend, HttpBackend, MockBackend};
use crate::error::{LlmError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QueryConfig {
    pub reps: u32,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout_secs: u64,
    /// Extra attempts after a failed request.
    pub retries: u32,
    /// Concurrent requests.
    pub in_flight: usize,
    /// Request rate cap; 0 disables it.
    pub requests_per_second: f64,
    /// Seed recorded in the dataset (and used by mock backends).
    pub seed: u64,
}

impl Default for QueryConfig {
    fn default() -> Self {
        Self {
            reps: 10,
            temperature: 1.0,
            max_tokens: 1024,
            timeout_secs: 120,
            retries: 3,
            in_flight: 4,
            requests_per_second: 0.0,
            seed: 0,
        }
    }
}

impl QueryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(LlmError::Config("reps must be at least 1".into()));
        }
        if self.in_flight == 0 {
            return Err(LlmError::Config("in_flight must be at least 1".into()));
        }
        if !(self.temperature >= 0.0) || !(self.requests_per_second >= 0.0) {
            return Err(LlmError::Config(
                "temperature and requests_per_second must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "agent", rename_all = "lowercase", deny_unknown_fields)]
pub enum MockAgent {
    Economicus,
    Pt {
        sigma: f64,
        lambda: f64,
        gamma: f64,
        beta: f64,
    },
    Regret {
        lambda_reg: f64,
        kappa: f64,
        alpha: f64,
    },
}

impl MockAgent {
    pub fn build(&self, contexts: &[Context]) -> Result<Box<dyn Agent>> {
        Ok(match self {
            MockAgent::Economicus => Box::new(Economicus),
            MockAgent::Pt {
                sigma,
                lambda,
                gamma,
                beta,
            } => Box::new(PtAgent::new(
                PtParams::new(*sigma, *lambda, *gamma, *beta)?,
                contexts,
            )?),
            MockAgent::Regret {
                lambda_reg,
                kappa,
                alpha,
            } => Box::new(RegretAgent::new(
                RegretParams::new(*lambda_reg, *kappa, *alpha)?,
                contexts,
            )?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BackendConfig {
    Http {
        endpoint: String,
        model: String,
        api_key_env: String,
    },
    Mock {
        #[serde(flatten)]
        agent: MockAgent,
    },
}

impl BackendConfig {
    pub fn build(&self, contexts: &[Context], query: &QueryConfig) -> Result<Box<dyn Backend>> {
        Ok(match self {
            BackendConfig::Http {
                endpoint,
                model,
                api_key_env,
            } => Box::new(HttpBackend {
                endpoint: endpoint.clone(),
                model: model.clone(),
                api_key_env: api_key_env.clone(),
                timeout: Duration::from_secs(query.timeout_secs),
            }),
            BackendConfig::Mock { agent } => Box::new(MockBackend {
                agent: agent.build(contexts)?,
                seed: query.seed,
            }),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Label recorded in the dataset.
    #[serde(default)]
    pub label: Option<String>,
    pub backend: BackendConfig,
    #[serde(default)]
    pub query: QueryConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub output: Option<OutputConfig>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| LlmError::Config(e.to_string()))?;
        cfg.query.validate()?;
        cfg.grid.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LlmError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| LlmError::Config(e.to_string()))
    }
}
