use std::path::PathBuf;

use clap::Args;
use prospect_core::reports::{
    consistency_table, correlation_matrix, dh_gap_report, he_points, parameter_table,
    subset_file_name, write_consistency_csv, write_dh_gap_csv, write_he_csv, ConsistencyRow,
    CorrelationMatrix, DhGapRow, HeRow, ParameterTable, StudyBundle, Subset,
};
use serde::Serialize;

use crate::failure::{CmdResult, Failure};
use crate::fit::FitReport;
use crate::inputs::{labeled_path, load_contexts, load_table, stem_label};
use crate::output::OutDir;
use crate::OutArgs;

pub const METRICS: &str = "metrics.json";
pub const CONSISTENCY: &str = "consistency.csv";
pub const DH_GAP: &str = "dh_gap.csv";
pub const PARAMETERS: &str = "parameters.csv";

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    #[arg(long)]
    pub contexts: PathBuf,
    /// Model responses as `label=path` (dataset JSON or table CSV); repeatable.
    #[arg(long = "model", required = true)]
    pub models: Vec<String>,
    /// Human reference rates (table CSV).
    #[arg(long)]
    pub human: Option<PathBuf>,
    /// `fit.json` files, optionally as `label=path`; repeatable.
    #[arg(long = "fit")]
    pub fits: Vec<String>,
    /// Report one subset only (all, explicit, implicit, n20, n100).
    #[arg(long)]
    pub subset: Option<String>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Serialize)]
struct SubsetReport {
    subset: Subset,
    contexts: usize,
    correlation: CorrelationMatrix,
    he: Vec<HeRow>,
}

#[derive(Serialize)]
struct Metrics {
    subsets: Vec<SubsetReport>,
    consistency: Vec<ConsistencyRow>,
    dh_gap: Option<Vec<DhGapRow>>,
    parameters: Option<ParameterTable>,
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> prospect_core::Result<()>) -> CmdResult<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

pub fn run(args: &ReportArgs) -> CmdResult {
    let requested: Option<Subset> = args.subset.as_deref().map(str::parse).transpose()?;
    let mut out = OutDir::prepare(&args.out.out, args.out.force, "report")?;
    let contexts = load_contexts(&mut out, &args.contexts)?;
    let mut bundle = StudyBundle::new(contexts);
    for spec in &args.models {
        let (label, path) = labeled_path(spec);
        let table = load_table(&mut out, path, bundle.contexts())?;
        bundle.add_model(label.unwrap_or_else(|| stem_label(path)), table)?;
    }
    if let Some(path) = &args.human {
        let table = load_table(&mut out, path, bundle.contexts())?;
        bundle.set_human(table);
    }

    let subsets: Vec<Subset> = match requested {
        Some(s) => vec![s],
        None => [Subset::All, Subset::Explicit, Subset::Implicit]
            .into_iter()
            .filter(|s| !s.select(bundle.contexts()).is_empty())
            .collect(),
    };
    let mut reports = Vec::new();
    for subset in subsets {
        let sub = bundle
            .restrict(subset)
            .map_err(|e| Failure::from(e).context(format!("subset {subset}")))?;
        let correlation = correlation_matrix(&sub)?;
        let he = he_points(&sub);
        out.write(
            &subset_file_name("correlation", subset, "csv"),
            csv_bytes(|b| correlation.write_csv(b))?,
        )?;
        out.write(&subset_file_name("he", subset, "csv"), csv_bytes(|b| write_he_csv(&he, b))?)?;
        reports.push(SubsetReport {
            subset,
            contexts: sub.contexts().len(),
            correlation,
            he,
        });
    }

    let base = match requested {
        Some(s) => bundle.restrict(s)?,
        None => bundle.restrict(Subset::All)?,
    };
    let consistency = consistency_table(&base)?;
    out.write(CONSISTENCY, csv_bytes(|b| write_consistency_csv(&consistency, b))?)?;
    let both = [Subset::Explicit, Subset::Implicit]
        .iter()
        .all(|s| !s.select(base.contexts()).is_empty());
    let dh_gap = if both {
        let rows = dh_gap_report(&base)?;
        out.write(DH_GAP, csv_bytes(|b| write_dh_gap_csv(&rows, b))?)?;
        Some(rows)
    } else {
        None
    };

    let parameters = if args.fits.is_empty() {
        None
    } else {
        let mut summaries = Vec::new();
        for spec in &args.fits {
            let (label, path) = labeled_path(spec);
            out.input(path)?;
            summaries.push(FitReport::load(path)?.summary(label));
        }
        let table = parameter_table(&summaries)?;
        out.write(PARAMETERS, table.to_csv_string()?)?;
        Some(table)
    };

    out.write_json(
        METRICS,
        &Metrics {
            subsets: reports,
            consistency,
            dh_gap,
            parameters,
        },
    )?;
    out.finish(serde_json::json!({ "args": args }), &[])
}
