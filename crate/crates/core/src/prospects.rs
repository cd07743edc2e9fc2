//! Prospects, framing, sampled histories and the context grid.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

const PROBABILITY_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub payoff: f64,
    pub probability: f64,
}

impl Outcome {
    pub fn new(payoff: f64, probability: f64) -> Self {
        Self {
            payoff,
            probability,
        }
    }
}

/// A discrete distribution over payoffs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Outcome>", into = "Vec<Outcome>")]
pub struct Prospect {
    outcomes: Vec<Outcome>,
}

impl Prospect {
    pub fn new(outcomes: Vec<Outcome>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::InvalidProspect("no outcomes".into()));
        }
        let mut total = 0.0;
        for o in &outcomes {
            if !o.payoff.is_finite() {
                return Err(Error::InvalidProspect(format!(
                    "non-finite payoff {}",
                    o.payoff
                )));
            }
            if !(0.0..=1.0).contains(&o.probability) {
                return Err(Error::ProbabilityOutOfRange(o.probability));
            }
            total += o.probability;
        }
        if (total - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
            return Err(Error::InvalidProspect(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self { outcomes })
    }

    /// `payoff` for sure.
    pub fn certain(payoff: f64) -> Self {
        Self {
            outcomes: vec![Outcome::new(payoff, 1.0)],
        }
    }

    /// `payoff` with probability `p`, otherwise 0.
    pub fn binary(payoff: f64, p: f64) -> Result<Self> {
        Self::new(vec![Outcome::new(payoff, p), Outcome::new(0.0, 1.0 - p)])
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn expected_value(&self) -> f64 {
        self.outcomes
            .iter()
            .map(|o| o.payoff * o.probability)
            .sum()
    }

    pub fn max_abs_payoff(&self) -> f64 {
        self.outcomes
            .iter()
            .map(|o| o.payoff.abs())
            .fold(0.0, f64::max)
    }

    /// Divides every payoff by `scale`.
    pub fn rescaled(&self, scale: f64) -> Prospect {
        Prospect {
            outcomes: self
                .outcomes
                .iter()
                .map(|o| Outcome::new(o.payoff / scale, o.probability))
                .collect(),
        }
    }

    pub(crate) fn map_payoffs(&self, f: impl Fn(f64) -> f64) -> Prospect {
        Prospect {
            outcomes: self
                .outcomes
                .iter()
                .map(|o| Outcome::new(f(o.payoff), o.probability))
                .collect(),
        }
    }

    /// Distinct payoffs with merged probabilities, ordered by payoff.
    pub fn support(&self) -> Vec<Outcome> {
        let mut merged: Vec<Outcome> = Vec::with_capacity(self.outcomes.len());
        for o in &self.outcomes {
            match merged.iter_mut().find(|m| m.payoff == o.payoff) {
                Some(m) => m.probability += o.probability,
                None => merged.push(*o),
            }
        }
        merged.sort_by(|a, b| a.payoff.total_cmp(&b.payoff));
        merged
    }
}

impl TryFrom<Vec<Outcome>> for Prospect {
    type Error = Error;
    fn try_from(v: Vec<Outcome>) -> Result<Self> {
        Prospect::new(v)
    }
}

impl From<Prospect> for Vec<Outcome> {
    fn from(p: Prospect) -> Self {
        p.outcomes
    }
}

/// Which of the two options of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PairOption {
    A,
    B,
}

impl PairOption {
    pub fn other(self) -> Self {
        match self {
            PairOption::A => PairOption::B,
            PairOption::B => PairOption::A,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProspectPair {
    pub id: u8,
    pub option_a: Prospect,
    pub option_b: Prospect,
}

impl ProspectPair {
    /// The option whose selection rate `p(x)` measures.
    pub const REFERENCE: PairOption = PairOption::A;

    pub fn option(&self, which: PairOption) -> &Prospect {
        match which {
            PairOption::A => &self.option_a,
            PairOption::B => &self.option_b,
        }
    }

    pub fn reference(&self) -> &Prospect {
        self.option(Self::REFERENCE)
    }
}

/// The three base pairs, payoffs stored as positive magnitudes.
pub fn base_prospects() -> Vec<ProspectPair> {
    let bin = |x: f64, p: f64| Prospect::binary(x, p).expect("valid base prospect");
    vec![
        ProspectPair {
            id: 1,
            option_a: bin(100.0, 0.33),
            option_b: bin(96.0, 0.34),
        },
        ProspectPair {
            id: 2,
            option_a: bin(5000.0, 0.80),
            option_b: Prospect::certain(3500.0),
        },
        ProspectPair {
            id: 3,
            option_a: bin(7.0, 0.10),
            option_b: bin(4.0, 0.20),
        },
    ]
}

pub fn base_pair(id: u8) -> Option<ProspectPair> {
    base_prospects().into_iter().find(|p| p.id == id)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Gain,
    Loss,
}

impl Frame {
    pub fn as_str(self) -> &'static str {
        match self {
            Frame::Gain => "gain",
            Frame::Loss => "loss",
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Frame::Gain => Frame::Loss,
            Frame::Loss => Frame::Gain,
        }
    }

    /// Signs a magnitude for this frame. Zero stays positive zero.
    pub fn sign(self, payoff: f64) -> f64 {
        match self {
            _ if payoff == 0.0 => 0.0,
            Frame::Gain => payoff.abs(),
            Frame::Loss => -payoff.abs(),
        }
    }
}

fn frame_prospect(p: &Prospect, frame: Frame) -> Prospect {
    p.map_payoffs(|x| frame.sign(x))
}

/// Re-signs every nonzero payoff for the frame; probabilities are untouched.
pub fn apply_frame(pair: &ProspectPair, frame: Frame) -> ProspectPair {
    ProspectPair {
        id: pair.id,
        option_a: frame_prospect(&pair.option_a, frame),
        option_b: frame_prospect(&pair.option_b, frame),
    }
}

pub fn expected_value(p: &Prospect) -> f64 {
    p.expected_value()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Representation {
    Explicit,
    Implicit { sample_size: u32, seed_index: u32 },
}

impl Representation {
    pub fn is_implicit(self) -> bool {
        matches!(self, Representation::Implicit { .. })
    }

    pub fn sample_size(self) -> Option<u32> {
        match self {
            Representation::Explicit => None,
            Representation::Implicit { sample_size, .. } => Some(sample_size),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExplanationMode {
    None,
    Short,
    Math,
}

impl ExplanationMode {
    pub const ALL: [ExplanationMode; 3] = [
        ExplanationMode::None,
        ExplanationMode::Short,
        ExplanationMode::Math,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExplanationMode::None => "none",
            ExplanationMode::Short => "short",
            ExplanationMode::Math => "math",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OrderVariant {
    AB,
    BA,
}

impl OrderVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            OrderVariant::AB => "AB",
            OrderVariant::BA => "BA",
        }
    }

    /// Which pair option fills the displayed slot ("Option A" is slot A).
    pub fn option_in_slot(self, slot: PairOption) -> PairOption {
        match self {
            OrderVariant::AB => slot,
            OrderVariant::BA => slot.other(),
        }
    }
}

macro_rules! impl_from_str_via_serde {
    ($($t:ty),*) => {$(
        impl FromStr for $t {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                serde_json::from_value(serde_json::Value::String(s.to_string()))
                    .map_err(|_| Error::InvalidConfig(format!("unknown value {s:?}")))
            }
        }
    )*};
}
impl_from_str_via_serde!(Frame, ExplanationMode, OrderVariant);

/// A sampled sequence of payoffs shown in place of an explicit description.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    pub payoffs: Vec<f64>,
    pub pair_id: u8,
    pub option: PairOption,
    pub seed: u64,
}

/// `n` i.i.d. draws from `p`.
pub fn sample_history(p: &Prospect, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    let outcomes = p.outcomes();
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for o in outcomes {
                acc += o.probability;
                if u < acc {
                    return o.payoff;
                }
            }
            outcomes[outcomes.len() - 1].payoff
        })
        .collect()
}

/// Seed for the history of one option of a base pair.
///
/// Frame is not part of the key: loss histories are sign flips of the gain ones.
pub fn history_seed(pair_id: u8, sample_size: u32, seed_index: u32, option: PairOption) -> u64 {
    let opt: &[u8] = match option {
        PairOption::A => b"A",
        PairOption::B => b"B",
    };
    derive_seed(&[
        b"history",
        &[pair_id],
        &sample_size.to_le_bytes(),
        &seed_index.to_le_bytes(),
        opt,
    ])
}

/// Relative frequencies of the distinct payoffs of a history.
pub fn empirical_prospect(history: &[f64]) -> Result<Prospect> {
    if history.is_empty() {
        return Err(Error::EmptyHistory);
    }
    let mut counts: Vec<(f64, usize)> = Vec::new();
    for &x in history {
        match counts.iter_mut().find(|(v, _)| *v == x) {
            Some((_, c)) => *c += 1,
            None => counts.push((x, 1)),
        }
    }
    counts.sort_by(|a, b| b.0.abs().total_cmp(&a.0.abs()).then(a.0.total_cmp(&b.0)));
    let n = history.len() as f64;
    Prospect::new(
        counts
            .into_iter()
            .map(|(x, c)| Outcome::new(x, c as f64 / n))
            .collect(),
    )
}

/// One fully specified stimulus.
#[derive(Debug, Clone, PartialEq)]
pub struct Context {
    pair_id: u8,
    frame: Frame,
    representation: Representation,
    order: OrderVariant,
    explanation: ExplanationMode,
    histories: Option<[History; 2]>,
}

impl Context {
    pub fn explicit(
        pair_id: u8,
        frame: Frame,
        order: OrderVariant,
        explanation: ExplanationMode,
    ) -> Result<Self> {
        check_pair(pair_id)?;
        Ok(Self {
            pair_id,
            frame,
            representation: Representation::Explicit,
            order,
            explanation,
            histories: None,
        })
    }

    /// An implicit context with caller-provided, already framed histories
    /// (reference option first).
    pub fn implicit(
        pair_id: u8,
        frame: Frame,
        seed_index: u32,
        order: OrderVariant,
        explanation: ExplanationMode,
        history_a: Vec<f64>,
        history_b: Vec<f64>,
    ) -> Result<Self> {
        let pair = apply_frame(&check_pair(pair_id)?, frame);
        let n = history_a.len();
        if n == 0 || history_b.len() != n {
            return Err(Error::InvalidContext(format!(
                "histories must be non-empty and equally long (got {} and {})",
                n,
                history_b.len()
            )));
        }
        let sample_size = n as u32;
        let make = |payoffs: Vec<f64>, option: PairOption| -> Result<History> {
            let support = pair.option(option).support();
            if let Some(bad) = payoffs
                .iter()
                .find(|x| !support.iter().any(|o| o.payoff == **x))
            {
                return Err(Error::InvalidContext(format!(
                    "history payoff {bad} not in the support of option {option:?} of pair {pair_id} ({})",
                    frame.as_str()
                )));
            }
            Ok(History {
                payoffs,
                pair_id,
                option,
                seed: history_seed(pair_id, sample_size, seed_index, option),
            })
        };
        let histories = [
            make(history_a, PairOption::A)?,
            make(history_b, PairOption::B)?,
        ];
        Ok(Self {
            pair_id,
            frame,
            representation: Representation::Implicit {
                sample_size,
                seed_index,
            },
            order,
            explanation,
            histories: Some(histories),
        })
    }

    pub fn pair_id(&self) -> u8 {
        self.pair_id
    }
    pub fn frame(&self) -> Frame {
        self.frame
    }
    pub fn representation(&self) -> Representation {
        self.representation
    }
    pub fn order(&self) -> OrderVariant {
        self.order
    }
    pub fn explanation(&self) -> ExplanationMode {
        self.explanation
    }
    pub fn histories(&self) -> Option<&[History; 2]> {
        self.histories.as_ref()
    }
    pub fn is_implicit(&self) -> bool {
        self.representation.is_implicit()
    }

    /// Stable key such as `p2-loss-imp100-s1-BA-math`.
    pub fn id(&self) -> String {
        context_id(
            self.pair_id,
            self.frame,
            self.representation,
            self.order,
            self.explanation,
        )
    }

    /// Base pair in this context's frame.
    pub fn framed_pair(&self) -> ProspectPair {
        apply_frame(
            &base_pair(self.pair_id).expect("pair id validated at construction"),
            self.frame,
        )
    }

    /// The prospects the decision-maker is shown, reference option first:
    /// framed base prospects when explicit, empirical prospects of the
    /// histories when implicit.
    pub fn prospects(&self) -> (Prospect, Prospect) {
        match &self.histories {
            None => {
                let pair = self.framed_pair();
                (pair.option_a, pair.option_b)
            }
            Some([a, b]) => (
                empirical_prospect(&a.payoffs).expect("non-empty by construction"),
                empirical_prospect(&b.payoffs).expect("non-empty by construction"),
            ),
        }
    }

    /// Identity of the underlying stimulus, ignoring order and explanation.
    pub fn stimulus_key(&self) -> String {
        format!(
            "p{}-{}-{}",
            self.pair_id,
            self.frame.as_str(),
            representation_tag(self.representation)
        )
    }

    /// Id of the same context with some attributes replaced.
    pub fn sibling_id(
        &self,
        frame: Option<Frame>,
        order: Option<OrderVariant>,
        explanation: Option<ExplanationMode>,
    ) -> String {
        context_id(
            self.pair_id,
            frame.unwrap_or(self.frame),
            self.representation,
            order.unwrap_or(self.order),
            explanation.unwrap_or(self.explanation),
        )
    }
}

fn check_pair(pair_id: u8) -> Result<ProspectPair> {
    base_pair(pair_id).ok_or_else(|| Error::InvalidContext(format!("unknown pair id {pair_id}")))
}

fn representation_tag(r: Representation) -> String {
    match r {
        Representation::Explicit => "exp".to_string(),
        Representation::Implicit {
            sample_size,
            seed_index,
        } => format!("imp{sample_size}-s{seed_index}"),
    }
}

pub fn context_id(
    pair_id: u8,
    frame: Frame,
    representation: Representation,
    order: OrderVariant,
    explanation: ExplanationMode,
) -> String {
    format!(
        "p{}-{}-{}-{}-{}",
        pair_id,
        frame.as_str(),
        representation_tag(representation),
        order.as_str(),
        explanation.as_str()
    )
}

/// Selection of the context grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub pairs: Vec<u8>,
    pub frames: Vec<Frame>,
    pub explicit: bool,
    pub implicit: bool,
    pub sample_sizes: Vec<u32>,
    pub seeds: u32,
    pub orders: Vec<OrderVariant>,
    pub explanations: Vec<ExplanationMode>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            pairs: vec![1, 2, 3],
            frames: vec![Frame::Gain, Frame::Loss],
            explicit: true,
            implicit: true,
            sample_sizes: vec![20, 100],
            seeds: 4,
            orders: vec![OrderVariant::AB, OrderVariant::BA],
            explanations: ExplanationMode::ALL.to_vec(),
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        let empty = |what: &str| Err(Error::InvalidConfig(format!("empty selection: {what}")));
        if self.pairs.is_empty() {
            return empty("pairs");
        }
        if self.frames.is_empty() {
            return empty("frames");
        }
        if self.orders.is_empty() {
            return empty("orders");
        }
        if self.explanations.is_empty() {
            return empty("explanations");
        }
        if !self.explicit && !self.implicit {
            return empty("representations");
        }
        if self.implicit {
            if self.sample_sizes.is_empty() {
                return empty("sample_sizes");
            }
            if self.seeds == 0 {
                return empty("seeds");
            }
            if let Some(bad) = self.sample_sizes.iter().find(|n| **n == 0) {
                return Err(Error::InvalidConfig(format!("invalid sample size {bad}")));
            }
        }
        for id in &self.pairs {
            check_pair(*id).map_err(|_| Error::InvalidConfig(format!("unknown pair id {id}")))?;
        }
        Ok(())
    }
}

/// Enumerates the context grid in a fixed order:
/// pair, frame, representation (explicit, then size and seed), order, explanation.
pub fn enumerate_contexts(config: &GridConfig) -> Result<Vec<Context>> {
    config.validate()?;
    let mut out = Vec::new();
    for &pair_id in &config.pairs {
        let gain_pair = base_pair(pair_id).expect("validated");
        for &frame in &config.frames {
            let mut stimuli: Vec<(Representation, Option<(Vec<f64>, Vec<f64>)>)> = Vec::new();
            if config.explicit {
                stimuli.push((Representation::Explicit, None));
            }
            if config.implicit {
                for &n in &config.sample_sizes {
                    for s in 0..config.seeds {
                        let draw = |opt: PairOption| {
                            sample_history(
                                gain_pair.option(opt),
                                n as usize,
                                history_seed(pair_id, n, s, opt),
                            )
                            .into_iter()
                            .map(|x| frame.sign(x))
                            .collect::<Vec<_>>()
                        };
                        stimuli.push((
                            Representation::Implicit {
                                sample_size: n,
                                seed_index: s,
                            },
                            Some((draw(PairOption::A), draw(PairOption::B))),
                        ));
                    }
                }
            }
            for (repr, hist) in &stimuli {
                for &order in &config.orders {
                    for &explanation in &config.explanations {
                        let ctx = match (repr, hist) {
                            (Representation::Implicit { seed_index, .. }, Some((a, b))) => {
                                Context::implicit(
                                    pair_id,
                                    frame,
                                    *seed_index,
                                    order,
                                    explanation,
                                    a.clone(),
                                    b.clone(),
                                )?
                            }
                            _ => Context::explicit(pair_id, frame, order, explanation)?,
                        };
                        out.push(ctx);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Largest payoff magnitude shown anywhere in the context set.
pub fn max_abs_payoff(contexts: &[Context]) -> f64 {
    contexts
        .iter()
        .map(|c| {
            let (a, b) = c.prospects();
            a.max_abs_payoff().max(b.max_abs_payoff())
        })
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// JSON persistence

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RepresentationRecord {
    kind: String,
    sample_size: Option<u32>,
    seed_index: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ContextRecord {
    context_id: String,
    pair_id: u8,
    frame: Frame,
    representation: RepresentationRecord,
    order: OrderVariant,
    explanation: ExplanationMode,
    histories: Vec<Vec<f64>>,
}

impl From<&Context> for ContextRecord {
    fn from(c: &Context) -> Self {
        let (kind, sample_size, seed_index) = match c.representation {
            Representation::Explicit => ("explicit", None, None),
            Representation::Implicit {
                sample_size,
                seed_index,
            } => ("implicit", Some(sample_size), Some(seed_index)),
        };
        ContextRecord {
            context_id: c.id(),
            pair_id: c.pair_id,
            frame: c.frame,
            representation: RepresentationRecord {
                kind: kind.into(),
                sample_size,
                seed_index,
            },
            order: c.order,
            explanation: c.explanation,
            histories: c
                .histories
                .as_ref()
                .map(|h| h.iter().map(|x| x.payoffs.clone()).collect())
                .unwrap_or_default(),
        }
    }
}

impl TryFrom<ContextRecord> for Context {
    type Error = Error;
    fn try_from(r: ContextRecord) -> Result<Self> {
        let ctx = match r.representation.kind.as_str() {
            "explicit" => {
                if !r.histories.is_empty() {
                    return Err(Error::InvalidContext(format!(
                        "{}: explicit context carries histories",
                        r.context_id
                    )));
                }
                Context::explicit(r.pair_id, r.frame, r.order, r.explanation)?
            }
            "implicit" => {
                let n = r.representation.sample_size.ok_or_else(|| {
                    Error::InvalidContext(format!("{}: missing sample_size", r.context_id))
                })?;
                let s = r.representation.seed_index.ok_or_else(|| {
                    Error::InvalidContext(format!("{}: missing seed_index", r.context_id))
                })?;
                let mut hs = r.histories.into_iter();
                let (Some(a), Some(b), None) = (hs.next(), hs.next(), hs.next()) else {
                    return Err(Error::InvalidContext(format!(
                        "{}: implicit context needs exactly two histories",
                        r.context_id
                    )));
                };
                if a.len() != n as usize {
                    return Err(Error::InvalidContext(format!(
                        "{}: history length {} != sample_size {n}",
                        r.context_id,
                        a.len()
                    )));
                }
                Context::implicit(r.pair_id, r.frame, s, r.order, r.explanation, a, b)?
            }
            other => {
                return Err(Error::InvalidContext(format!(
                    "{}: unknown representation kind {other:?}",
                    r.context_id
                )))
            }
        };
        if ctx.id() != r.context_id {
            return Err(Error::InvalidContext(format!(
                "context_id {} does not match its fields (expected {})",
                r.context_id,
                ctx.id()
            )));
        }
        Ok(ctx)
    }
}

pub fn contexts_to_json(contexts: &[Context]) -> Result<String> {
    let records: Vec<ContextRecord> = contexts.iter().map(ContextRecord::from).collect();
    Ok(serde_json::to_string_pretty(&records)?)
}

pub fn contexts_from_json(text: &str) -> Result<Vec<Context>> {
    let records: Vec<ContextRecord> = serde_json::from_str(text)?;
    let mut seen = std::collections::HashSet::new();
    records
        .into_iter()
        .map(|r| {
            if !seen.insert(r.context_id.clone()) {
                return Err(Error::InvalidContext(format!(
                    "duplicate context_id {}",
                    r.context_id
                )));
            }
            Context::try_from(r)
        })
        .collect()
}

pub fn write_contexts(path: &Path, contexts: &[Context]) -> Result<()> {
    std::fs::write(path, contexts_to_json(contexts)?)?;
    Ok(())
}

pub fn read_contexts(path: &Path) -> Result<Vec<Context>> {
    contexts_from_json(&std::fs::read_to_string(path)?)
}

/// Index of contexts by id.
pub fn index_by_id(contexts: &[Context]) -> BTreeMap<String, &Context> {
    contexts.iter().map(|c| (c.id(), c)).collect()
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}
