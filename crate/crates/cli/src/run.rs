use std::collections::HashSet;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use prospect_core::agents::{simulate_choices, ChoiceDataset};
use prospect_core::Exec;
use prospect_llm::{collect_responses, BackendConfig, ExperimentConfig, MockAgent, QueryConfig, TrialRecord};
use serde::Serialize;

use crate::failure::{CmdResult, Failure};
use crate::inputs::load_contexts;
use crate::output::OutDir;
use crate::OutArgs;

pub const DATASET: &str = "dataset.json";
pub const RESPONSES: &str = "responses.csv";
pub const ARCHIVE: &str = "archive.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgentKind {
    Economicus,
    Pt,
    Regret,
}

/// Mock backends answer through the prompt/parse path like a live model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MockKind {
    MockEconomicus,
    MockPt,
    MockRegret,
}

#[derive(Debug, Args, Serialize)]
pub struct AgentParams {
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub lambda_reg: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct RunArgs {
    /// Context set written by `gen`.
    #[arg(long)]
    pub contexts: PathBuf,
    /// Simulate a behavioral agent directly.
    #[arg(long, value_enum)]
    pub agent: Option<AgentKind>,
    /// Query a mock backend built over an agent.
    #[arg(long, value_enum)]
    pub backend: Option<MockKind>,
    /// Experiment config (TOML) naming a live or mock backend.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub params: AgentParams,
    /// Trials per context (default 10, or the config's value).
    #[arg(long)]
    pub reps: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Dataset label (defaults to the agent or backend name).
    #[arg(long)]
    pub label: Option<String>,
    #[command(flatten)]
    pub out: OutArgs,
}

fn required(name: &str, v: Option<f64>) -> CmdResult<f64> {
    v.ok_or_else(|| Failure::usage(format!("--{name} is required for this agent")))
}

fn mock_agent(kind: AgentKind, p: &AgentParams) -> CmdResult<MockAgent> {
    Ok(match kind {
        AgentKind::Economicus => MockAgent::Economicus,
        AgentKind::Pt => MockAgent::Pt {
            sigma: required("sigma", p.sigma)?,
            lambda: required("lambda", p.lambda)?,
            gamma: required("gamma", p.gamma)?,
            beta: required("beta", p.beta)?,
        },
        AgentKind::Regret => MockAgent::Regret {
            lambda_reg: required("lambda-reg", p.lambda_reg)?,
            kappa: required("kappa", p.kappa)?,
            alpha: required("alpha", p.alpha)?,
        },
    })
}

pub fn run(args: &RunArgs, jobs: Option<usize>) -> CmdResult {
    let sources = [args.agent.is_some(), args.backend.is_some(), args.config.is_some()];
    if sources.iter().filter(|s| **s).count() != 1 {
        return Err(Failure::usage(
            "give exactly one of --agent, --backend or --config",
        ));
    }
    let mut out = OutDir::prepare(&args.out.out, args.out.force, "run")?;
    let contexts = load_contexts(&mut out, &args.contexts)?;

    let (dataset, archive, query, backend_cfg) = if let Some(kind) = args.agent {
        let agent = mock_agent(kind, &args.params)?.build(&contexts)?;
        let reps = args.reps.unwrap_or(10);
        let seed = args.seed.unwrap_or(0);
        let mut ds = simulate_choices(agent.as_ref(), &contexts, reps, seed, Exec::Parallel)?;
        if let Some(l) = &args.label {
            ds.meta.label = l.clone();
        }
        let query = QueryConfig {
            reps,
            seed,
            ..QueryConfig::default()
        };
        (ds, None, query, BackendConfig::Mock { agent: mock_agent(kind, &args.params)? })
    } else {
        let (backend_cfg, mut query, label) = match (&args.backend, &args.config) {
            (Some(kind), _) => {
                let agent_kind = match kind {
                    MockKind::MockEconomicus => AgentKind::Economicus,
                    MockKind::MockPt => AgentKind::Pt,
                    MockKind::MockRegret => AgentKind::Regret,
                };
                let agent = mock_agent(agent_kind, &args.params)?;
                (BackendConfig::Mock { agent }, QueryConfig::default(), None)
            }
            (None, Some(path)) => {
                out.input(path)?;
                let cfg = ExperimentConfig::load(path)?;
                (cfg.backend, cfg.query, cfg.label)
            }
            (None, None) => unreachable!("checked above"),
        };
        if let Some(r) = args.reps {
            query.reps = r;
        }
        if let Some(s) = args.seed {
            query.seed = s;
        }
        if let Some(j) = jobs {
            query.in_flight = query.in_flight.min(j);
        }
        let backend = backend_cfg.build(&contexts, &query)?;
        let label = args
            .label
            .clone()
            .or(label)
            .unwrap_or_else(|| backend.name());
        let collected = collect_responses(backend.as_ref(), &contexts, &query, &label)?;
        (collected.dataset, Some(collected.archive), query, backend_cfg)
    };

    out.write(DATASET, dataset.to_json()? + "\n")?;
    let table_path = out.claim(RESPONSES)?;
    dataset.table().write_csv(&table_path)?;
    if let Some(records) = &archive {
        let mut buf = Vec::new();
        for r in records {
            serde_json::to_writer(&mut buf, r)?;
            buf.push(b'\n');
        }
        out.write(ARCHIVE, buf)?;
    }
    let config = serde_json::json!({
        "args": args,
        "backend": backend_cfg,
        "query": query,
    });
    out.finish(config, &[("seed", query.seed)])?;
    completeness(&dataset, archive.as_deref())
}

/// Exit 3 when a context has no valid trial, or 4 when every request
/// behind those contexts failed at the transport level.
fn completeness(dataset: &ChoiceDataset, archive: Option<&[TrialRecord]>) -> CmdResult {
    let empty = dataset.contexts_without_valid_trials();
    if empty.is_empty() {
        return Ok(());
    }
    let shown: Vec<&str> = empty.iter().take(5).map(String::as_str).collect();
    let summary = format!(
        "{} of {} contexts have no valid trial (e.g. {})",
        empty.len(),
        dataset.table().len(),
        shown.join(", ")
    );
    if let Some(records) = archive {
        let empty: HashSet<&str> = empty.iter().map(String::as_str).collect();
        let mut affected = records
            .iter()
            .filter(|r| empty.contains(r.context_id.as_str()))
            .peekable();
        if affected.peek().is_some() && affected.all(|r| r.error.is_some()) {
            return Err(Failure::backend(format!("{summary}; every request failed")));
        }
    }
    Err(Failure::data(summary))
}
