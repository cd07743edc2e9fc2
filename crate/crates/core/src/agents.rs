//! Synthetic decision-makers, response tables and choice datasets.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{pt_choice_prob, regret_choice_prob, PtParams, RegretParams};
use crate::par::{map_slice, Exec};
use crate::prospects::{max_abs_payoff, Context, Prospect};
use crate::rng::{derive_seed, rng_from_seed};

/// Anything that assigns a probability of choosing the reference option.
pub trait Agent: Send + Sync {
    fn label(&self) -> String;
    fn choice_prob(&self, ctx: &Context) -> f64;
}

/// Risk-neutral reference: picks the option with the higher expected payoff
/// (sample mean for histories); 0.5 on an exact tie.
pub fn economicus_choice(ctx: &Context) -> f64 {
    let (ea, eb) = match ctx.histories() {
        Some([a, b]) => (mean(&a.payoffs), mean(&b.payoffs)),
        None => {
            let (a, b) = ctx.prospects();
            (a.expected_value(), b.expected_value())
        }
    };
    if ea > eb {
        1.0
    } else if ea < eb {
        0.0
    } else {
        0.5
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn shown_prospects(ctx: &Context, scale: f64) -> (Prospect, Prospect) {
    let (a, b) = ctx.prospects();
    (a.rescaled(scale), b.rescaled(scale))
}

/// Prospect-theory choice probability on payoffs divided by `scale`.
pub fn pt_agent_choice(ctx: &Context, params: &PtParams, scale: f64) -> f64 {
    let (a, b) = shown_prospects(ctx, scale);
    pt_choice_prob(&a, &b, params).expect("context prospects have at most two outcomes")
}

pub fn regret_agent_choice(ctx: &Context, params: &RegretParams, scale: f64) -> f64 {
    let (a, b) = shown_prospects(ctx, scale);
    regret_choice_prob(&a, &b, params)
}

fn normalization_scale(contexts: &[Context]) -> Result<f64> {
    let s = max_abs_payoff(contexts);
    if s > 0.0 {
        Ok(s)
    } else {
        Err(Error::Data("all payoffs are zero; cannot normalize".into()))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Economicus;

impl Agent for Economicus {
    fn label(&self) -> String {
        "economicus".into()
    }
    fn choice_prob(&self, ctx: &Context) -> f64 {
        economicus_choice(ctx)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PtAgent {
    pub params: PtParams,
    pub scale: f64,
}

impl PtAgent {
    /// Normalizes by the largest payoff magnitude in `contexts`.
    pub fn new(params: PtParams, contexts: &[Context]) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            scale: normalization_scale(contexts)?,
        })
    }
}

impl Agent for PtAgent {
    fn label(&self) -> String {
        let p = &self.params;
        format!(
            "pt(sigma={},lambda={},gamma={},beta={})",
            p.sigma, p.lambda, p.gamma, p.beta
        )
    }
    fn choice_prob(&self, ctx: &Context) -> f64 {
        pt_agent_choice(ctx, &self.params, self.scale)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RegretAgent {
    pub params: RegretParams,
    pub scale: f64,
}

impl RegretAgent {
    pub fn new(params: RegretParams, contexts: &[Context]) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            scale: normalization_scale(contexts)?,
        })
    }
}

impl Agent for RegretAgent {
    fn label(&self) -> String {
        let p = &self.params;
        format!(
            "regret(lambda_reg={},kappa={},alpha={})",
            p.lambda_reg, p.kappa, p.alpha
        )
    }
    fn choice_prob(&self, ctx: &Context) -> f64 {
        regret_agent_choice(ctx, &self.params, self.scale)
    }
}

/// Delegates to one agent for explicit contexts and another for implicit ones.
pub struct ByRepresentation {
    pub explicit: Box<dyn Agent>,
    pub implicit: Box<dyn Agent>,
}

impl Agent for ByRepresentation {
    fn label(&self) -> String {
        format!(
            "split(explicit={},implicit={})",
            self.explicit.label(),
            self.implicit.label()
        )
    }
    fn choice_prob(&self, ctx: &Context) -> f64 {
        if ctx.is_implicit() {
            self.implicit.choice_prob(ctx)
        } else {
            self.explicit.choice_prob(ctx)
        }
    }
}

// ---------------------------------------------------------------------------
// Response tables

/// Observed choice rate for one context. `n_total == 0` with a rate marks an
/// exact (analytic) entry rather than an observed frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseEntry {
    pub p: Option<f64>,
    pub n_valid: u32,
    pub n_total: u32,
}

impl ResponseEntry {
    pub fn exact(p: f64) -> Self {
        Self {
            p: Some(p),
            n_valid: 0,
            n_total: 0,
        }
    }

    pub fn counted(n_reference: u32, n_valid: u32, n_total: u32) -> Self {
        Self {
            p: (n_valid > 0).then(|| n_reference as f64 / n_valid as f64),
            n_valid,
            n_total,
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.n_valid > self.n_total {
            return Err(format!(
                "n_valid {} exceeds n_total {}",
                self.n_valid, self.n_total
            ));
        }
        match self.p {
            Some(p) if !(0.0..=1.0).contains(&p) => Err(format!("p = {p} outside [0, 1]")),
            Some(_) if self.n_total > 0 && self.n_valid == 0 => {
                Err("p given but there are no valid trials".into())
            }
            None if self.n_valid > 0 || self.n_total == 0 => {
                Err("p missing although it is defined".into())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResponseTable {
    entries: BTreeMap<String, ResponseEntry>,
}

impl ResponseTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, context_id: impl Into<String>, entry: ResponseEntry) -> Result<()> {
        let id = context_id.into();
        entry
            .validate()
            .map_err(|m| Error::Data(format!("{id}: {m}")))?;
        if self.entries.contains_key(&id) {
            return Err(Error::Data(format!("duplicate context_id {id}")));
        }
        self.entries.insert(id, entry);
        Ok(())
    }

    /// Exact rates from an agent.
    pub fn from_agent(agent: &dyn Agent, contexts: &[Context]) -> Self {
        Self {
            entries: contexts
                .iter()
                .map(|c| (c.id(), ResponseEntry::exact(agent.choice_prob(c))))
                .collect(),
        }
    }

    /// Exact rates from `(context_id, p)` pairs.
    pub fn from_rates<I, S>(rates: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut t = Self::new();
        for (id, p) in rates {
            t.insert(id, ResponseEntry::exact(p))?;
        }
        Ok(t)
    }

    pub fn get(&self, context_id: &str) -> Option<&ResponseEntry> {
        self.entries.get(context_id)
    }

    /// Rate for a context, `None` when absent or undefined.
    pub fn rate(&self, context_id: &str) -> Option<f64> {
        self.entries.get(context_id).and_then(|e| e.p)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &ResponseEntry)> {
        self.entries.iter()
    }

    /// Table with every rate replaced by `1 - p`.
    pub fn complement(&self) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|(k, e)| {
                    (
                        k.clone(),
                        ResponseEntry {
                            p: e.p.map(|p| 1.0 - p),
                            ..*e
                        },
                    )
                })
                .collect(),
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["context_id", "p", "n_valid", "n_total"])?;
        for (id, e) in &self.entries {
            w.write_record([
                id.clone(),
                e.p.map(|p| p.to_string()).unwrap_or_default(),
                e.n_valid.to_string(),
                e.n_total.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reads a `context_id,p,n_valid,n_total` CSV. When `known` is given, ids
/// outside it are rejected. Row numbers in errors count the header as row 1.
pub fn load_response_table(path: &Path, known: Option<&HashSet<String>>) -> Result<ResponseTable> {
    let text = std::fs::read_to_string(path)?;
    parse_response_table(&text, known)
}

pub fn parse_response_table(text: &str, known: Option<&HashSet<String>>) -> Result<ResponseTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["context_id", "p", "n_valid", "n_total"] {
        return Err(Error::TableRow {
            row: 1,
            message: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    let mut table = ResponseTable::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let err = |message: String| Error::TableRow { row, message };
        let rec = rec.map_err(|e| err(e.to_string()))?;
        if rec.len() != 4 {
            return Err(err(format!("expected 4 fields, got {}", rec.len())));
        }
        let id = rec[0].to_string();
        if id.is_empty() {
            return Err(err("empty context_id".into()));
        }
        if let Some(known) = known {
            if !known.contains(&id) {
                return Err(err(format!("unknown context_id {id}")));
            }
        }
        let p = if rec[1].is_empty() {
            None
        } else {
            Some(
                rec[1]
                    .parse::<f64>()
                    .map_err(|_| err(format!("bad p {:?}", &rec[1])))?,
            )
        };
        let n_valid = rec[2]
            .parse::<u32>()
            .map_err(|_| err(format!("bad n_valid {:?}", &rec[2])))?;
        let n_total = rec[3]
            .parse::<u32>()
            .map_err(|_| err(format!("bad n_total {:?}", &rec[3])))?;
        let entry = ResponseEntry {
            p,
            n_valid,
            n_total,
        };
        entry.validate().map_err(err)?;
        if table.get(&id).is_some() {
            return Err(err(format!("duplicate context_id {id}")));
        }
        table.entries.insert(id, entry);
    }
    Ok(table)
}

// ---------------------------------------------------------------------------
// Choice datasets

/// Which pair option a trial chose. `A` is always the reference option,
/// whatever slot it was displayed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Choice {
    A,
    B,
    #[serde(rename = "invalid")]
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub context_id: String,
    pub rep: u32,
    pub choice: Choice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub agent: String,
    pub label: String,
    pub reps: u32,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiceDataset {
    pub meta: DatasetMeta,
    pub trials: Vec<Trial>,
}

impl ChoiceDataset {
    /// Rates over valid trials per context.
    pub fn table(&self) -> ResponseTable {
        let mut counts: BTreeMap<&str, (u32, u32, u32)> = BTreeMap::new();
        for t in &self.trials {
            let c = counts.entry(&t.context_id).or_default();
            c.2 += 1;
            match t.choice {
                Choice::A => {
                    c.0 += 1;
                    c.1 += 1
                }
                Choice::B => c.1 += 1,
                Choice::Invalid => {}
            }
        }
        ResponseTable {
            entries: counts
                .into_iter()
                .map(|(id, (a, v, n))| (id.to_string(), ResponseEntry::counted(a, v, n)))
                .collect(),
        }
    }

    /// Context ids with no valid trial.
    pub fn contexts_without_valid_trials(&self) -> Vec<String> {
        self.table()
            .iter()
            .filter(|(_, e)| e.n_valid == 0)
            .map(|(id, _)| id.clone())
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// One Bernoulli trial keyed by `(seed, context_id, rep)`: true means the
/// reference option was chosen.
pub fn trial_draw(seed: u64, context_id: &str, rep: u32, p: f64) -> bool {
    let mut rng = rng_from_seed(derive_seed(&[
        b"trial",
        &seed.to_le_bytes(),
        context_id.as_bytes(),
        &rep.to_le_bytes(),
    ]));
    let u: f64 = rng.random();
    u < p
}

/// Simulates `reps` choices per context from an agent.
pub fn simulate_choices(
    agent: &dyn Agent,
    contexts: &[Context],
    reps: u32,
    seed: u64,
    exec: Exec,
) -> Result<ChoiceDataset> {
    if reps == 0 {
        return Err(Error::Data("reps must be at least 1".into()));
    }
    let per_context = map_slice(exec, contexts, |ctx| {
        let id = ctx.id();
        let p = agent.choice_prob(ctx);
        (0..reps)
            .map(|rep| Trial {
                context_id: id.clone(),
                rep,
                choice: if trial_draw(seed, &id, rep, p) {
                    Choice::A
                } else {
                    Choice::B
                },
                raw: None,
            })
            .collect::<Vec<_>>()
    });
    Ok(ChoiceDataset {
        meta: DatasetMeta {
            agent: agent.label(),
            label: agent.label(),
            reps,
            seed,
        },
        trials: per_context.into_iter().flatten().collect(),
    })
}
