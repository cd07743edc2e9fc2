//! Repeated querying of a backend over a context set.

use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use prospect_core::agents::{Choice, ChoiceDataset, DatasetMeta, Trial};
use prospect_core::prospects::{Context, PairOption};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::backend::{Backend, Request};
use crate::config::QueryConfig;
use crate::error::Result;
use crate::parse::{parse_choice, ParsedChoice};
use crate::prompt::render_prompt;

/// One archived trial (a JSON line).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub context_id: String,
    pub rep: u32,
    pub prompt_sha256: String,
    pub raw: String,
    /// `A`/`B` as the displayed slot letter, or `invalid`.
    pub parsed: String,
    pub latency_ms: u64,
    pub attempts: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Collected {
    pub dataset: ChoiceDataset,
    pub archive: Vec<TrialRecord>,
}

impl Collected {
    pub fn write_archive<W: Write>(&self, mut out: W) -> Result<()> {
        for r in &self.archive {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

pub fn read_archive(text: &str) -> Result<Vec<TrialRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}

/// Spaces request starts at least `1 / rate` seconds apart.
struct RateLimiter {
    interval: Option<Duration>,
    next: Mutex<Instant>,
}

impl RateLimiter {
    fn new(per_second: f64) -> Self {
        Self {
            interval: (per_second > 0.0).then(|| Duration::from_secs_f64(1.0 / per_second)),
            next: Mutex::new(Instant::now()),
        }
    }

    fn wait(&self) {
        let Some(step) = self.interval else { return };
        let slot = {
            let mut next = self.next.lock().expect("rate limiter lock");
            let now = Instant::now();
            let slot = (*next).max(now);
            *next = slot + step;
            slot
        };
        let now = Instant::now();
        if slot > now {
            std::thread::sleep(slot - now);
        }
    }
}

pub fn prompt_sha256(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

/// Maps a displayed slot letter back to the pair option it showed.
pub fn choice_from_slot(ctx: &Context, parsed: &ParsedChoice) -> Choice {
    let slot = match parsed {
        ParsedChoice::A => PairOption::A,
        ParsedChoice::B => PairOption::B,
        ParsedChoice::Invalid(_) => return Choice::Invalid,
    };
    match ctx.order().option_in_slot(slot) {
        PairOption::A => Choice::A,
        PairOption::B => Choice::B,
    }
}

fn run_one(
    backend: &dyn Backend,
    limiter: &RateLimiter,
    ctx: &Context,
    prompt: &str,
    rep: u32,
    cfg: &QueryConfig,
) -> (Trial, TrialRecord) {
    let req = Request {
        context: ctx,
        rep,
        prompt,
        temperature: cfg.temperature,
        max_tokens: cfg.max_tokens,
    };
    let started = Instant::now();
    let mut attempts = 0;
    let outcome = loop {
        attempts += 1;
        limiter.wait();
        match backend.complete(&req) {
            Ok(text) => break Ok(text),
            Err(e) if attempts > cfg.retries => break Err(e.to_string()),
            Err(_) => {}
        }
    };
    let latency_ms = started.elapsed().as_millis() as u64;
    let (raw, parsed, error) = match outcome {
        Ok(text) => {
            let p = parse_choice(&text);
            (text, p, None)
        }
        Err(e) => (e.clone(), ParsedChoice::Invalid(e.clone()), Some(e)),
    };
    let id = ctx.id();
    let trial = Trial {
        context_id: id.clone(),
        rep,
        choice: choice_from_slot(ctx, &parsed),
        raw: Some(raw.clone()),
    };
    let record = TrialRecord {
        context_id: id,
        rep,
        prompt_sha256: prompt_sha256(prompt),
        raw,
        parsed: parsed.label().to_string(),
        latency_ms,
        attempts,
        error,
    };
    (trial, record)
}

/// Queries every context `cfg.reps` times. Backend configuration errors
/// surface before any request; failed requests are retried and finally
/// recorded as invalid trials, so every (context, rep) yields one trial.
pub fn collect_responses(
    backend: &dyn Backend,
    contexts: &[Context],
    cfg: &QueryConfig,
    label: &str,
) -> Result<Collected> {
    cfg.validate()?;
    backend.validate()?;
    let prompts: Vec<String> = contexts.iter().map(render_prompt).collect();
    let limiter = RateLimiter::new(cfg.requests_per_second);
    let reps = cfg.reps as usize;
    let job = |k: usize| {
        let (c, rep) = (k / reps, (k % reps) as u32);
        run_one(backend, &limiter, &contexts[c], &prompts[c], rep, cfg)
    };
    let n = contexts.len() * reps;
    let results: Vec<(Trial, TrialRecord)> = run_jobs(n, cfg.in_flight, job)?;
    let (trials, archive) = results.into_iter().unzip();
    Ok(Collected {
        dataset: ChoiceDataset {
            meta: DatasetMeta {
                agent: backend.name(),
                label: label.to_string(),
                reps: cfg.reps,
                seed: cfg.seed,
            },
            trials,
        },
        archive,
    })
}

#[cfg(feature = "parallel")]
fn run_jobs<T: Send>(n: usize, in_flight: usize, job: impl Fn(usize) -> T + Sync) -> Result<Vec<T>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(in_flight)
        .build()
        .map_err(|e| crate::error::LlmError::Config(e.to_string()))?;
    Ok(pool.install(|| (0..n).into_par_iter().map(&job).collect()))
}

#[cfg(not(feature = "parallel"))]
fn run_jobs<T: Send>(n: usize, _in_flight: usize, job: impl Fn(usize) -> T + Sync) -> Result<Vec<T>> {
    Ok((0..n).map(job).collect())
}
