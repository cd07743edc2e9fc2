//! Least-squares estimation of choice-model parameters.
//!
//! Observed choice rates are matched by minimizing the mean squared error
//! between observed and predicted rates with a bounded quasi-Newton search
//! started from several points (fixed baselines, warm starts composed from
//! restricted fits, and random draws). Uncertainty comes from a parametric
//! bootstrap over binomial choice counts.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::agents::ResponseTable;
use crate::error::{Error, Result};
use crate::metrics::{mse_values, pearson_values, Pearson};
use crate::models::{
    regret_value_over, sigmoid, value, weight_unchecked, Canonical, PtParams, RegretParams,
    PARAM_HI, PARAM_LO,
};
use crate::optim::{minimize, Bounds, LbfgsbOptions};
use crate::par::{map_range, Exec};
use crate::prospects::{Context, Outcome, Prospect, Representation};
use crate::rng::{derive_seed, rng_from_seed};

/// Distance from a bound under which a parameter is reported as at-bound.
pub const AT_BOUND_TOLERANCE: f64 = 1e-6;

/// Binomial trial count used when an entry carries no observed count.
pub const DEFAULT_BOOTSTRAP_REPS: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Risk-neutral shape; only decisiveness is fitted.
    BetaOnly,
    /// Value and weighting shape with decisiveness fixed at 1.
    ShapeOnly,
    FullPt,
    Regret,
}

impl Variant {
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Variant::BetaOnly => &["beta"],
            Variant::ShapeOnly => &["sigma", "lambda", "gamma"],
            Variant::FullPt => &["sigma", "lambda", "gamma", "beta"],
            Variant::Regret => &["lambda_reg", "kappa", "alpha"],
        }
    }

    pub fn default_bounds(self) -> Vec<(f64, f64)> {
        match self {
            Variant::Regret => vec![(PARAM_LO, PARAM_HI), (0.0, PARAM_HI), (0.0, PARAM_HI)],
            v => vec![(PARAM_LO, PARAM_HI); v.param_names().len()],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::BetaOnly => "beta-only",
            Variant::ShapeOnly => "shape-only",
            Variant::FullPt => "full-pt",
            Variant::Regret => "regret",
        }
    }

    pub fn is_prospect_theory(self) -> bool {
        self != Variant::Regret
    }

    /// Full prospect-theory parameters, filling in the values a restricted
    /// variant holds fixed.
    pub fn pt_params(self, x: &[f64]) -> Option<PtParams> {
        match self {
            Variant::BetaOnly => Some(PtParams::risk_neutral(x[0])),
            Variant::ShapeOnly => Some(PtParams {
                sigma: x[0],
                lambda: x[1],
                gamma: x[2],
                beta: 1.0,
            }),
            Variant::FullPt => Some(PtParams {
                sigma: x[0],
                lambda: x[1],
                gamma: x[2],
                beta: x[3],
            }),
            Variant::Regret => None,
        }
    }

    pub fn regret_params(self, x: &[f64]) -> Option<RegretParams> {
        (self == Variant::Regret).then(|| RegretParams {
            lambda_reg: x[0],
            kappa: x[1],
            alpha: x[2],
        })
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "beta-only" => Ok(Variant::BetaOnly),
            "shape-only" => Ok(Variant::ShapeOnly),
            "full-pt" => Ok(Variant::FullPt),
            "regret" => Ok(Variant::Regret),
            other => Err(Error::InvalidConfig(format!("unknown variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSpec {
    pub variant: Variant,
    /// Per-parameter `(lo, hi)`, in [`Variant::param_names`] order.
    pub bounds: Vec<(f64, f64)>,
    /// Total starts, fixed ones included.
    pub n_starts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// Objective-decrease tolerance of the local search.
    pub tolerance: f64,
    #[serde(default)]
    pub exec: Exec,
}

impl FitSpec {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            bounds: variant.default_bounds(),
            n_starts: 20,
            seed: 0,
            max_iterations: 500,
            tolerance: 1e-10,
            exec: Exec::Parallel,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_starts(mut self, n: usize) -> Self {
        self.n_starts = n;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_starts == 0 {
            return Err(Error::InvalidConfig("n_starts must be at least 1".into()));
        }
        if self.bounds.len() != self.variant.param_names().len() {
            return Err(Error::InvalidConfig(format!(
                "{} bounds given for {} parameters",
                self.bounds.len(),
                self.variant.param_names().len()
            )));
        }
        if let Some((i, _)) = self
            .bounds
            .iter()
            .enumerate()
            .find(|(_, (lo, hi))| !(lo < hi) || !lo.is_finite() || !hi.is_finite())
        {
            return Err(Error::InvalidConfig(format!(
                "bad bound for {}",
                self.variant.param_names()[i]
            )));
        }
        Ok(())
    }

    fn restricted(&self, variant: Variant) -> FitSpec {
        let bounds = match variant {
            Variant::BetaOnly => vec![self.bounds[3]],
            Variant::ShapeOnly => self.bounds[..3].to_vec(),
            _ => unreachable!("only restricted prospect-theory variants"),
        };
        FitSpec {
            variant,
            bounds,
            ..self.clone()
        }
    }
}

// ---------------------------------------------------------------------------
// Datasets

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stimulus {
    pub key: String,
    /// Reference option.
    pub a: Prospect,
    pub b: Prospect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitEntry {
    pub context_id: String,
    /// Holdout stratum: pair, frame and representation kind with sample size.
    pub stratum: String,
    pub stimulus: usize,
    pub p_obs: f64,
    pub reps: u32,
}

/// Observed rates paired with the prospects each context showed.
///
/// Contexts differing only in order or explanation share one stimulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDataset {
    entries: Vec<FitEntry>,
    stimuli: Vec<Stimulus>,
    scale: f64,
    excluded: usize,
}

impl FitDataset {
    /// Builds an unnormalized dataset (scale 1). Contexts whose rate is
    /// undefined are skipped and counted in [`FitDataset::excluded`].
    pub fn from_table(contexts: &[Context], table: &ResponseTable) -> Result<Self> {
        let mut stimuli: Vec<Stimulus> = Vec::new();
        let mut by_key: HashMap<String, usize> = HashMap::new();
        let mut entries = Vec::new();
        let mut excluded = 0;
        for c in contexts {
            let id = c.id();
            let entry = table
                .get(&id)
                .ok_or_else(|| Error::MissingContext(id.clone()))?;
            let Some(p_obs) = entry.p else {
                excluded += 1;
                continue;
            };
            let key = c.stimulus_key();
            let stimulus = *by_key.entry(key.clone()).or_insert_with(|| {
                let (a, b) = c.prospects();
                stimuli.push(Stimulus { key, a, b });
                stimuli.len() - 1
            });
            let kind = match c.representation() {
                Representation::Explicit => "exp".to_string(),
                Representation::Implicit { sample_size, .. } => format!("imp{sample_size}"),
            };
            entries.push(FitEntry {
                context_id: id,
                stratum: format!("p{}-{}-{}", c.pair_id(), c.frame().as_str(), kind),
                stimulus,
                p_obs,
                reps: entry.n_valid,
            });
        }
        if entries.is_empty() {
            return Err(Error::Data("no context with a defined choice rate".into()));
        }
        Ok(Self {
            entries,
            stimuli,
            scale: 1.0,
            excluded,
        })
    }

    /// Builds a dataset from explicit prospect pairs and rates.
    pub fn from_pairs(rows: Vec<(String, Prospect, Prospect, f64, u32)>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Data("empty dataset".into()));
        }
        let mut entries = Vec::new();
        let mut stimuli = Vec::new();
        for (i, (id, a, b, p, reps)) in rows.into_iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::ProbabilityOutOfRange(p));
            }
            stimuli.push(Stimulus {
                key: id.clone(),
                a,
                b,
            });
            entries.push(FitEntry {
                context_id: id.clone(),
                stratum: id,
                stimulus: i,
                p_obs: p,
                reps,
            });
        }
        Ok(Self {
            entries,
            stimuli,
            scale: 1.0,
            excluded: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[FitEntry] {
        &self.entries
    }

    pub fn stimuli(&self) -> &[Stimulus] {
        &self.stimuli
    }

    /// Total factor payoffs have been divided by.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Contexts skipped for lack of valid trials.
    pub fn excluded(&self) -> usize {
        self.excluded
    }

    pub fn observed(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.p_obs).collect()
    }

    pub fn max_abs_payoff(&self) -> f64 {
        self.stimuli
            .iter()
            .map(|s| s.a.max_abs_payoff().max(s.b.max_abs_payoff()))
            .fold(0.0, f64::max)
    }

    /// Same stimuli with new observed rates.
    pub fn with_observed(&self, p_obs: &[f64]) -> Result<Self> {
        if p_obs.len() != self.entries.len() {
            return Err(Error::Data(format!(
                "{} rates for {} entries",
                p_obs.len(),
                self.entries.len()
            )));
        }
        let mut out = self.clone();
        for (e, p) in out.entries.iter_mut().zip(p_obs) {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::ProbabilityOutOfRange(*p));
            }
            e.p_obs = *p;
        }
        Ok(out)
    }

    /// Divides payoffs by `factor` and records it in the scale.
    pub fn rescaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for s in &mut out.stimuli {
            s.a = s.a.rescaled(factor);
            s.b = s.b.rescaled(factor);
        }
        out.scale *= factor;
        out
    }

    /// Multiplies payoffs by `factor` (scale is unchanged).
    pub fn with_payoffs_multiplied(&self, factor: f64) -> Self {
        let mut out = self.clone();
        let mul = |p: &Prospect| {
            Prospect::new(
                p.outcomes()
                    .iter()
                    .map(|o| Outcome::new(o.payoff * factor, o.probability))
                    .collect(),
            )
            .expect("scaling keeps probabilities")
        };
        for s in &mut out.stimuli {
            s.a = mul(&s.a);
            s.b = mul(&s.b);
        }
        out
    }

    fn subset(&self, idx: &[usize]) -> Self {
        Self {
            entries: idx.iter().map(|i| self.entries[*i].clone()).collect(),
            stimuli: self.stimuli.clone(),
            scale: self.scale,
            excluded: 0,
        }
    }
}

/// Divides every payoff by the largest magnitude in the dataset.
pub fn normalize_payoffs(ds: &FitDataset) -> Result<(FitDataset, f64)> {
    let m = ds.max_abs_payoff();
    if m == 0.0 {
        return Err(Error::Data("all payoffs are zero; cannot normalize".into()));
    }
    Ok((ds.rescaled(m), m))
}

/// Divides payoffs so the dataset ends up on `target_scale` (e.g. a
/// training set's normalization).
pub fn normalize_with(ds: &FitDataset, target_scale: f64) -> FitDataset {
    ds.rescaled(target_scale / ds.scale)
}

/// Stratified 50/50 split: within each stratum the entries are shuffled
/// with `seed` and the first half (rounded up) goes to training.
pub fn holdout_split(ds: &FitDataset, seed: u64) -> (FitDataset, FitDataset) {
    let mut strata: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, e) in ds.entries.iter().enumerate() {
        strata.entry(&e.stratum).or_default().push(i);
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (name, mut idx) in strata {
        let mut rng = rng_from_seed(derive_seed(&[b"holdout", &seed.to_le_bytes(), name.as_bytes()]));
        idx.shuffle(&mut rng);
        let cut = idx.len().div_ceil(2);
        train.extend_from_slice(&idx[..cut]);
        test.extend_from_slice(&idx[cut..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (ds.subset(&train), ds.subset(&test))
}

// ---------------------------------------------------------------------------
// Prediction and objective

/// Prospect utility in terms of shared value and weight tables.
#[derive(Clone, Copy)]
enum TableUtility {
    Certain(usize),
    SameSign { extreme: usize, p: usize, other: usize },
    Mixed { loss: usize, p_loss: usize, gain: usize, p_gain: usize },
}

/// Distinct payoffs and probabilities across all stimuli, so each
/// objective call evaluates every transcendental once.
#[derive(Default)]
struct PtTables {
    payoffs: Vec<f64>,
    probs: Vec<f64>,
    payoff_idx: HashMap<u64, usize>,
    prob_idx: HashMap<u64, usize>,
}

impl PtTables {
    fn payoff(&mut self, x: f64) -> usize {
        let n = self.payoffs.len();
        *self.payoff_idx.entry(x.to_bits()).or_insert_with(|| {
            self.payoffs.push(x);
            n
        })
    }

    fn prob(&mut self, p: f64) -> usize {
        let n = self.probs.len();
        *self.prob_idx.entry(p.to_bits()).or_insert_with(|| {
            self.probs.push(p);
            n
        })
    }

    fn add(&mut self, c: Canonical) -> TableUtility {
        match c {
            Canonical::Certain(x) => TableUtility::Certain(self.payoff(x)),
            Canonical::SameSign {
                extreme,
                p_extreme,
                other,
            } => TableUtility::SameSign {
                extreme: self.payoff(extreme),
                p: self.prob(p_extreme),
                other: self.payoff(other),
            },
            Canonical::Mixed {
                loss,
                p_loss,
                gain,
                p_gain,
            } => TableUtility::Mixed {
                loss: self.payoff(loss),
                p_loss: self.prob(p_loss),
                gain: self.payoff(gain),
                p_gain: self.prob(p_gain),
            },
        }
    }
}

/// Stimuli preprocessed for repeated evaluation.
struct Compiled<'a> {
    tables: PtTables,
    utilities: Vec<(TableUtility, TableUtility)>,
    ev_gap: Vec<f64>,
    outcomes: Vec<(&'a [Outcome], &'a [Outcome])>,
    entries: &'a [FitEntry],
}

impl<'a> Compiled<'a> {
    fn new(ds: &'a FitDataset, variant: Variant) -> Result<Self> {
        let mut tables = PtTables::default();
        let mut utilities = Vec::new();
        if variant.is_prospect_theory() {
            for s in &ds.stimuli {
                let a = tables.add(Canonical::from_prospect(&s.a)?);
                let b = tables.add(Canonical::from_prospect(&s.b)?);
                utilities.push((a, b));
            }
        }
        let mut out = Self {
            tables,
            utilities,
            ev_gap: Vec::new(),
            outcomes: ds
                .stimuli
                .iter()
                .map(|s| (s.a.outcomes(), s.b.outcomes()))
                .collect(),
            entries: &ds.entries,
        };
        if variant.is_prospect_theory() {
            out.ev_gap = out.utility_gaps(1.0, 1.0, 1.0);
        }
        Ok(out)
    }

    /// `u(a) - u(b)` per stimulus; matches [`Canonical::utility`] bit for bit.
    fn utility_gaps(&self, sigma: f64, lambda: f64, gamma: f64) -> Vec<f64> {
        let v: Vec<f64> = self
            .tables
            .payoffs
            .iter()
            .map(|x| value(*x, sigma, lambda))
            .collect();
        let w: Vec<f64> = self
            .tables
            .probs
            .iter()
            .map(|p| weight_unchecked(*p, gamma))
            .collect();
        let u = |t: TableUtility| match t {
            TableUtility::Certain(x) => v[x],
            TableUtility::SameSign { extreme, p, other } => {
                v[other] + w[p] * (v[extreme] - v[other])
            }
            TableUtility::Mixed {
                loss,
                p_loss,
                gain,
                p_gain,
            } => w[p_loss] * v[loss] + w[p_gain] * v[gain],
        };
        self.utilities.iter().map(|(a, b)| u(*a) - u(*b)).collect()
    }

    fn stimulus_predictions(&self, variant: Variant, x: &[f64]) -> Vec<f64> {
        match variant {
            Variant::BetaOnly => self.ev_gap.iter().map(|g| sigmoid(x[0] * g)).collect(),
            Variant::ShapeOnly | Variant::FullPt => {
                let beta = if variant == Variant::FullPt { x[3] } else { 1.0 };
                self.utility_gaps(x[0], x[1], x[2])
                    .into_iter()
                    .map(|g| sigmoid(beta * g))
                    .collect()
            }
            Variant::Regret => {
                let (lr, k, al) = (x[0], x[1], x[2]);
                self.outcomes
                    .iter()
                    .map(|(a, b)| {
                        let ra = regret_value_over(a, b, k, al);
                        let rb = regret_value_over(b, a, k, al);
                        sigmoid(lr * (ra - rb))
                    })
                    .collect()
            }
        }
    }

    fn predictions(&self, variant: Variant, x: &[f64]) -> Vec<f64> {
        let per = self.stimulus_predictions(variant, x);
        self.entries.iter().map(|e| per[e.stimulus]).collect()
    }

    fn objective(&self, variant: Variant, x: &[f64]) -> f64 {
        let per = self.stimulus_predictions(variant, x);
        self.entries
            .iter()
            .map(|e| (e.p_obs - per[e.stimulus]).powi(2))
            .sum::<f64>()
            / self.entries.len() as f64
    }
}

fn check_params(variant: Variant, x: &[f64]) -> Result<()> {
    if x.len() != variant.param_names().len() {
        return Err(Error::InvalidConfig(format!(
            "{} parameters given for {variant}",
            x.len()
        )));
    }
    Ok(())
}

/// Predicted choice rate of the reference option for every entry.
pub fn predict(params: &[f64], variant: Variant, ds: &FitDataset) -> Result<Vec<f64>> {
    check_params(variant, params)?;
    Ok(Compiled::new(ds, variant)?.predictions(variant, params))
}

/// Mean squared error between observed and predicted rates.
pub fn objective(params: &[f64], variant: Variant, ds: &FitDataset) -> Result<f64> {
    check_params(variant, params)?;
    Ok(Compiled::new(ds, variant)?.objective(variant, params))
}

// ---------------------------------------------------------------------------
// Fitting

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartRecord {
    pub start: Vec<f64>,
    pub final_params: Vec<f64>,
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
    pub message: String,
}

/// Best solutions of the restricted fits used to seed a full fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarmStart {
    pub beta_only: Vec<f64>,
    pub beta_only_objective: f64,
    pub shape_only: Vec<f64>,
    pub shape_only_objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub variant: Variant,
    pub param_names: Vec<String>,
    pub best_params: Vec<f64>,
    pub best_objective: f64,
    pub best_start: usize,
    pub starts: Vec<StartRecord>,
    /// Payoff normalization of the data the fit saw.
    pub scale: f64,
    /// Parameters within [`AT_BOUND_TOLERANCE`] of a bound.
    pub at_bound: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warm_start: Option<WarmStart>,
}

impl FitResult {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.param_names
            .iter()
            .position(|n| n == name)
            .map(|i| self.best_params[i])
    }

    pub fn pt_params(&self) -> Option<PtParams> {
        self.variant.pt_params(&self.best_params)
    }

    pub fn regret_params(&self) -> Option<RegretParams> {
        self.variant.regret_params(&self.best_params)
    }

    pub fn is_at_bound(&self, name: &str) -> bool {
        self.at_bound.iter().any(|n| n == name)
    }
}

fn uniform(rng: &mut crate::rng::Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

fn start_points(ds: &FitDataset, spec: &FitSpec) -> Result<(Vec<Vec<f64>>, Option<WarmStart>)> {
    let mut rng = rng_from_seed(derive_seed(&[
        b"starts",
        spec.variant.as_str().as_bytes(),
        &spec.seed.to_le_bytes(),
    ]));
    let mut warm = None;
    let (fixed, random): (Vec<Vec<f64>>, Box<dyn FnMut(&mut crate::rng::Rng) -> Vec<f64>>) =
        match spec.variant {
            Variant::BetaOnly => (
                vec![vec![1.0], vec![1000.0]],
                Box::new(|r| vec![uniform(r, 0.01, 100.0)]),
            ),
            Variant::ShapeOnly => (
                vec![vec![1.0, 1.0, 1.0]],
                Box::new(|r| (0..3).map(|_| uniform(r, 0.01, 3.0)).collect()),
            ),
            Variant::FullPt => {
                let m1 = fit(ds, &spec.restricted(Variant::BetaOnly))?;
                let m2 = fit(ds, &spec.restricted(Variant::ShapeOnly))?;
                let b1 = m1.best_params[0];
                let (s2, l2, g2) = (m2.best_params[0], m2.best_params[1], m2.best_params[2]);
                warm = Some(WarmStart {
                    beta_only: m1.best_params.clone(),
                    beta_only_objective: m1.best_objective,
                    shape_only: m2.best_params.clone(),
                    shape_only_objective: m2.best_objective,
                });
                (
                    vec![
                        vec![1.0, 1.0, 1.0, 1.0],
                        vec![1.0, 1.0, 1.0, 1000.0],
                        vec![s2, l2, g2, b1],
                        // The restricted optima embedded in the full space.
                        vec![1.0, 1.0, 1.0, b1],
                        vec![s2, l2, g2, 1.0],
                    ],
                    Box::new(|r| {
                        let mut v: Vec<f64> = (0..3).map(|_| uniform(r, 0.01, 3.0)).collect();
                        v.push(uniform(r, 0.01, 100.0));
                        v
                    }),
                )
            }
            Variant::Regret => (
                vec![vec![1.0, 1.0, 1.5]],
                Box::new(|r| {
                    vec![
                        uniform(r, 0.01, 1000.0),
                        uniform(r, 0.0, 1000.0),
                        uniform(r, 0.0, 1000.0),
                    ]
                }),
            ),
        };
    let mut random = random;
    let mut starts: Vec<Vec<f64>> = fixed.into_iter().take(spec.n_starts).collect();
    while starts.len() < spec.n_starts {
        starts.push(random(&mut rng));
    }
    let bounds = Bounds::new(&spec.bounds);
    for s in &mut starts {
        bounds.project(s);
    }
    Ok((starts, warm))
}

/// Multi-start bounded least-squares fit.
pub fn fit(ds: &FitDataset, spec: &FitSpec) -> Result<FitResult> {
    spec.validate()?;
    if ds.is_empty() {
        return Err(Error::Data("empty dataset".into()));
    }
    let variant = spec.variant;
    let compiled = Compiled::new(ds, variant)?;
    let (starts, warm_start) = start_points(ds, spec)?;
    let bounds = Bounds::new(&spec.bounds);
    let opts = LbfgsbOptions {
        max_iterations: spec.max_iterations,
        ftol: spec.tolerance,
        ..LbfgsbOptions::default()
    };
    let runs = map_range(spec.exec, starts.len(), |i| {
        minimize(|x| compiled.objective(variant, x), &starts[i], &bounds, &opts)
    });

    let mut records = Vec::with_capacity(runs.len());
    let mut failures = Vec::new();
    let mut best: Option<usize> = None;
    for (i, run) in runs.into_iter().enumerate() {
        match run {
            Ok(m) => {
                let mut x = m.x;
                bounds.project(&mut x);
                let objective = compiled.objective(variant, &x);
                if objective.is_finite()
                    && best.is_none_or(|b: usize| objective < records_objective(&records, b))
                {
                    best = Some(i);
                }
                records.push(StartRecord {
                    start: starts[i].clone(),
                    final_params: x,
                    objective,
                    converged: m.converged,
                    iterations: m.iterations,
                    message: m.message,
                });
            }
            Err(e) => {
                failures.push(format!("start {i}: {e}"));
                records.push(StartRecord {
                    start: starts[i].clone(),
                    final_params: starts[i].clone(),
                    objective: f64::NAN,
                    converged: false,
                    iterations: 0,
                    message: e.to_string(),
                });
            }
        }
    }
    let Some(best_start) = best else {
        return Err(Error::FitFailed(failures));
    };
    let best_params = records[best_start].final_params.clone();
    let at_bound = variant
        .param_names()
        .iter()
        .zip(&best_params)
        .zip(&spec.bounds)
        .filter(|((_, x), (lo, hi))| {
            (**x - lo).abs() <= AT_BOUND_TOLERANCE || (hi - **x).abs() <= AT_BOUND_TOLERANCE
        })
        .map(|((n, _), _)| n.to_string())
        .collect();
    Ok(FitResult {
        variant,
        param_names: variant.param_names().iter().map(|s| s.to_string()).collect(),
        best_objective: records[best_start].objective,
        best_params,
        best_start,
        starts: records,
        scale: ds.scale,
        at_bound,
        warm_start,
    })
}

fn records_objective(records: &[StartRecord], i: usize) -> f64 {
    records[i].objective
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodnessOfFit {
    pub corr: Pearson,
    pub mse: f64,
}

/// Correlation and MSE of the fitted model's predictions against `test`.
pub fn goodness_of_fit(result: &FitResult, test: &FitDataset) -> Result<GoodnessOfFit> {
    if test.scale != result.scale {
        return Err(Error::Data(format!(
            "test data normalized by {} but the fit used {}",
            test.scale, result.scale
        )));
    }
    let pred = predict(&result.best_params, result.variant, test)?;
    let obs = test.observed();
    Ok(GoodnessOfFit {
        corr: if obs.len() < 2 {
            Pearson::Undefined
        } else {
            pearson_values(&pred, &obs)
        },
        mse: mse_values(&pred, &obs),
    })
}

// ---------------------------------------------------------------------------
// Bootstrap

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub replicates: usize,
    pub dropped: usize,
    pub param_names: Vec<String>,
    pub point: Vec<f64>,
    /// `(2.5th, 97.5th)` percentile per parameter.
    pub ci: Vec<(f64, f64)>,
    /// One row of refitted parameters per kept replicate.
    pub estimates: Vec<Vec<f64>>,
    /// Binomial trial count used for each entry.
    pub reps_per_context: Vec<u32>,
}

/// Linear-interpolation percentile of sorted data, `q` in [0, 1].
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Parametric bootstrap: counts per context are redrawn from
/// `Binomial(reps, p̂)` with `p̂` the point fit's predictions, and the model
/// is refitted to each synthetic dataset.
pub fn bootstrap_ci(ds: &FitDataset, spec: &FitSpec, replicates: usize) -> Result<BootstrapResult> {
    if replicates < 2 {
        return Err(Error::InvalidConfig("need at least 2 bootstrap replicates".into()));
    }
    let point = fit(ds, spec)?;
    let p_hat = predict(&point.best_params, spec.variant, ds)?;
    let reps: Vec<u32> = ds
        .entries
        .iter()
        .map(|e| if e.reps == 0 { DEFAULT_BOOTSTRAP_REPS } else { e.reps })
        .collect();
    let results = map_range(spec.exec, replicates, |r| {
        let mut rng = rng_from_seed(derive_seed(&[
            b"bootstrap",
            &spec.seed.to_le_bytes(),
            &(r as u64).to_le_bytes(),
        ]));
        let obs: Vec<f64> = p_hat
            .iter()
            .zip(&reps)
            .map(|(p, n)| {
                let k = Binomial::new(*n as u64, *p)
                    .expect("prediction is a probability")
                    .sample(&mut rng);
                k as f64 / *n as f64
            })
            .collect();
        let synthetic = ds.with_observed(&obs)?;
        fit(&synthetic, spec).map(|f| f.best_params)
    });
    let estimates: Vec<Vec<f64>> = results.into_iter().filter_map(|r| r.ok()).collect();
    let dropped = replicates - estimates.len();
    if dropped * 10 > replicates {
        return Err(Error::BootstrapDrops {
            dropped,
            total: replicates,
        });
    }
    let k = point.best_params.len();
    let ci = (0..k)
        .map(|j| {
            let mut col: Vec<f64> = estimates.iter().map(|row| row[j]).collect();
            col.sort_by(f64::total_cmp);
            (percentile(&col, 0.025), percentile(&col, 0.975))
        })
        .collect();
    Ok(BootstrapResult {
        replicates,
        dropped,
        param_names: point.param_names.clone(),
        point: point.best_params,
        ci,
        estimates,
        reps_per_context: reps,
    })
}
