use std::path::PathBuf;

use clap::Args;
use prospect_core::fitting::{
    bootstrap_ci, fit, goodness_of_fit, holdout_split, normalize_payoffs, BootstrapResult,
    FitDataset, FitResult, FitSpec, GoodnessOfFit, Variant,
};
use prospect_core::reports::{parameter_table, FitSummary};
use serde::{Deserialize, Serialize};

use crate::failure::{CmdResult, Failure};
use crate::inputs::{load_contexts, load_table, stem_label};
use crate::output::{read_input, OutDir};
use crate::OutArgs;

pub const FIT: &str = "fit.json";
pub const PARAMS: &str = "params.csv";

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    #[arg(long)]
    pub contexts: PathBuf,
    /// Dataset JSON from `run`, or a `context_id,p,n_valid,n_total` CSV.
    #[arg(long)]
    pub dataset: PathBuf,
    /// beta-only, shape-only, full-pt or regret.
    #[arg(long)]
    pub variant: String,
    /// Fit on a stratified half and report metrics on the other half.
    #[arg(long)]
    pub holdout: Option<u64>,
    /// Parametric bootstrap replicates for percentile intervals.
    #[arg(long)]
    pub bootstrap: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub starts: usize,
    /// Row label (defaults to the dataset file stem).
    #[arg(long)]
    pub label: Option<String>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Holdout {
    pub seed: u64,
    pub train_entries: usize,
    pub test_entries: usize,
    pub test: GoodnessOfFit,
}

/// Contents of `fit.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub label: String,
    pub spec: FitSpec,
    pub entries: usize,
    pub excluded: usize,
    pub fit: FitResult,
    /// Agreement on the rows the fit was estimated from.
    pub train: GoodnessOfFit,
    pub holdout: Option<Holdout>,
    pub bootstrap: Option<BootstrapResult>,
}

impl FitReport {
    pub fn load(path: &std::path::Path) -> CmdResult<Self> {
        serde_json::from_str(&read_input(path)?)
            .map_err(|e| Failure::data(format!("{}: {e}", path.display())))
    }

    /// Held-out metrics when available, training metrics otherwise.
    pub fn summary(&self, label: Option<String>) -> FitSummary {
        FitSummary {
            label: label.unwrap_or_else(|| self.label.clone()),
            fit: self.fit.clone(),
            gof: self.holdout.as_ref().map_or(self.train, |h| h.test),
            bootstrap: self.bootstrap.clone(),
        }
    }
}

pub fn run(args: &FitArgs) -> CmdResult {
    let variant: Variant = args.variant.parse()?;
    let spec = FitSpec::new(variant)
        .with_seed(args.seed)
        .with_starts(args.starts);
    spec.validate()?;
    if args.bootstrap.is_some_and(|b| b < 2) {
        return Err(Failure::usage("--bootstrap needs at least 2 replicates"));
    }
    let mut out = OutDir::prepare(&args.out.out, args.out.force, "fit")?;
    let contexts = load_contexts(&mut out, &args.contexts)?;
    let table = load_table(&mut out, &args.dataset, &contexts)?;
    let (ds, _) = normalize_payoffs(&FitDataset::from_table(&contexts, &table)?)?;
    if ds.is_empty() {
        return Err(Failure::data("no context has a defined choice rate"));
    }

    let (train, test) = match args.holdout {
        Some(seed) => {
            let (train, test) = holdout_split(&ds, seed);
            (train, Some((seed, test)))
        }
        None => (ds.clone(), None),
    };
    let result = fit(&train, &spec)?;
    let holdout = match &test {
        Some((seed, test)) => Some(Holdout {
            seed: *seed,
            train_entries: train.len(),
            test_entries: test.len(),
            test: goodness_of_fit(&result, test)?,
        }),
        None => None,
    };
    let bootstrap = match args.bootstrap {
        Some(b) => Some(bootstrap_ci(&train, &spec, b)?),
        None => None,
    };
    let report = FitReport {
        label: args.label.clone().unwrap_or_else(|| stem_label(&args.dataset)),
        spec: spec.clone(),
        entries: ds.len(),
        excluded: ds.excluded(),
        train: goodness_of_fit(&result, &train)?,
        fit: result,
        holdout,
        bootstrap,
    };
    out.write_json(FIT, &report)?;
    let table = parameter_table(&[report.summary(None)])?;
    out.write(PARAMS, table.to_csv_string()?)?;
    let mut seeds = vec![("fit", args.seed)];
    if let Some(h) = args.holdout {
        seeds.push(("holdout", h));
    }
    out.finish(serde_json::json!({ "args": args, "spec": spec }), &seeds)
}
