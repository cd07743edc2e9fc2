//! Analysis tables built from a set of response tables and fits.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agents::{Economicus, ResponseTable};
use crate::error::{Error, Result};
use crate::fitting::{BootstrapResult, FitResult, GoodnessOfFit, Variant};
use crate::metrics::{
    decisiveness, frame_consistency, pearson, variation_consistency, Grouping, HePoint, Measured,
    Pearson,
};
use crate::prospects::{Context, Representation};

pub const ECONOMICUS: &str = "economicus";
pub const HUMAN: &str = "human";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subset {
    All,
    Explicit,
    Implicit,
    N20,
    N100,
}

impl Subset {
    pub const ALL: [Subset; 5] = [
        Subset::All,
        Subset::Explicit,
        Subset::Implicit,
        Subset::N20,
        Subset::N100,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Subset::All => "all",
            Subset::Explicit => "explicit",
            Subset::Implicit => "implicit",
            Subset::N20 => "n20",
            Subset::N100 => "n100",
        }
    }

    pub fn contains(self, c: &Context) -> bool {
        match (self, c.representation()) {
            (Subset::All, _) => true,
            (Subset::Explicit, r) => !r.is_implicit(),
            (Subset::Implicit, r) => r.is_implicit(),
            (Subset::N20, Representation::Implicit { sample_size, .. }) => sample_size == 20,
            (Subset::N100, Representation::Implicit { sample_size, .. }) => sample_size == 100,
            _ => false,
        }
    }

    pub fn select(self, contexts: &[Context]) -> Vec<Context> {
        contexts.iter().filter(|c| self.contains(c)).cloned().collect()
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Subset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Subset::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown subset {s:?}")))
    }
}

/// Model tables plus the references they are compared against.
#[derive(Debug, Clone)]
pub struct StudyBundle {
    contexts: Vec<Context>,
    models: Vec<(String, ResponseTable)>,
    human: Option<ResponseTable>,
    economicus: ResponseTable,
}

impl StudyBundle {
    /// Starts a bundle over `contexts` with the economicus table computed.
    pub fn new(contexts: Vec<Context>) -> Self {
        let economicus = ResponseTable::from_agent(&Economicus, &contexts);
        Self {
            contexts,
            models: Vec::new(),
            human: None,
            economicus,
        }
    }

    pub fn add_model(&mut self, label: impl Into<String>, table: ResponseTable) -> Result<()> {
        let label = label.into();
        if label.is_empty() || label == ECONOMICUS || label == HUMAN {
            return Err(Error::InvalidConfig(format!("reserved or empty label {label:?}")));
        }
        if self.models.iter().any(|(l, _)| *l == label) {
            return Err(Error::InvalidConfig(format!("duplicate label {label:?}")));
        }
        self.models.push((label, table));
        Ok(())
    }

    pub fn set_human(&mut self, table: ResponseTable) {
        self.human = Some(table);
    }

    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }

    pub fn models(&self) -> &[(String, ResponseTable)] {
        &self.models
    }

    pub fn human(&self) -> Option<&ResponseTable> {
        self.human.as_ref()
    }

    pub fn economicus(&self) -> &ResponseTable {
        &self.economicus
    }

    /// Models first, then economicus, then human when present.
    pub fn tables(&self) -> Vec<(&str, &ResponseTable)> {
        let mut out: Vec<(&str, &ResponseTable)> =
            self.models.iter().map(|(l, t)| (l.as_str(), t)).collect();
        out.push((ECONOMICUS, &self.economicus));
        if let Some(h) = &self.human {
            out.push((HUMAN, h));
        }
        out
    }

    /// Contexts some table lacks, as `label:context_id`.
    pub fn missing(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (label, t) in self.tables() {
            for c in &self.contexts {
                let id = c.id();
                if t.get(&id).is_none() {
                    out.push(format!("{label}:{id}"));
                }
            }
        }
        out
    }

    /// Same bundle restricted to a subset. Fails if the subset is empty or
    /// any table lacks one of its contexts.
    pub fn restrict(&self, subset: Subset) -> Result<StudyBundle> {
        let contexts = subset.select(&self.contexts);
        if contexts.is_empty() {
            return Err(Error::Data(format!("no {subset} contexts in the bundle")));
        }
        let out = StudyBundle {
            economicus: ResponseTable::from_agent(&Economicus, &contexts),
            contexts,
            models: self.models.clone(),
            human: self.human.clone(),
        };
        let missing = out.missing();
        if !missing.is_empty() {
            return Err(Error::MissingContext(missing.join(", ")));
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Correlation matrix

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<Pearson>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<Pearson> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        Some(self.values[i][j])
    }

    /// Square CSV; undefined cells read `undefined`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["label".to_string()];
        header.extend(self.labels.iter().cloned());
        w.write_record(&header)?;
        for (label, row) in self.labels.iter().zip(&self.values) {
            let mut rec = vec![label.clone()];
            rec.extend(row.iter().map(|p| match p {
                Pearson::Defined(r) => r.to_string(),
                Pearson::Undefined => "undefined".to_string(),
            }));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Pairwise Pearson correlation over the contexts both tables define.
pub fn correlation_matrix(bundle: &StudyBundle) -> Result<CorrelationMatrix> {
    let tables = bundle.tables();
    if tables.len() < 2 {
        return Err(Error::TooFewContexts {
            needed: 2,
            got: tables.len(),
        });
    }
    let n = tables.len();
    let mut values = vec![vec![Pearson::Defined(1.0); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let r = pearson(tables[i].1, tables[j].1, &bundle.contexts)
                .map_err(|e| Error::Data(format!("{} vs {}: {e}", tables[i].0, tables[j].0)))?
                .value;
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix {
        labels: tables.iter().map(|(l, _)| l.to_string()).collect(),
        values,
    })
}

// ---------------------------------------------------------------------------
// HE coordinates and the description-history gap

fn corr_or_undefined(a: &ResponseTable, b: Option<&ResponseTable>, contexts: &[Context]) -> Pearson {
    b.and_then(|b| pearson(a, b, contexts).ok())
        .map(|m| m.value)
        .unwrap_or(Pearson::Undefined)
}

fn he_point(bundle: &StudyBundle, table: &ResponseTable, contexts: &[Context]) -> HePoint {
    let econ = ResponseTable::from_agent(&Economicus, contexts);
    HePoint {
        human: corr_or_undefined(table, bundle.human.as_ref(), contexts),
        economicus: corr_or_undefined(table, Some(&econ), contexts),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeRow {
    pub model: String,
    pub point: HePoint,
}

/// HE coordinates of every model table over the bundle's contexts.
pub fn he_points(bundle: &StudyBundle) -> Vec<HeRow> {
    bundle
        .models
        .iter()
        .map(|(l, t)| HeRow {
            model: l.clone(),
            point: he_point(bundle, t, &bundle.contexts),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DhGapRow {
    pub model: String,
    pub explicit: HePoint,
    pub implicit: HePoint,
    /// `implicit - explicit` per axis; `None` where either side is undefined.
    pub delta_human: Option<f64>,
    pub delta_economicus: Option<f64>,
}

impl DhGapRow {
    pub fn flagged(&self) -> bool {
        self.delta_human.is_none() || self.delta_economicus.is_none()
    }
}

pub fn dh_gap_report(bundle: &StudyBundle) -> Result<Vec<DhGapRow>> {
    let explicit = Subset::Explicit.select(&bundle.contexts);
    let implicit = Subset::Implicit.select(&bundle.contexts);
    if explicit.is_empty() || implicit.is_empty() {
        return Err(Error::Data(
            "gap report needs both explicit and implicit contexts".into(),
        ));
    }
    let delta = |a: Pearson, b: Pearson| Some(b.value()? - a.value()?);
    Ok(bundle
        .models
        .iter()
        .map(|(l, t)| {
            let e = he_point(bundle, t, &explicit);
            let i = he_point(bundle, t, &implicit);
            DhGapRow {
                model: l.clone(),
                delta_human: delta(e.human, i.human),
                delta_economicus: delta(e.economicus, i.economicus),
                explicit: e,
                implicit: i,
            }
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Consistency and decisiveness

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRow {
    pub model: String,
    pub subset: Subset,
    pub decisiveness: f64,
    pub order: f64,
    pub prompt: f64,
    pub frame: f64,
}

/// Rows for every table (models, economicus, human) over the all,
/// explicit and implicit subsets that have contexts.
pub fn consistency_table(bundle: &StudyBundle) -> Result<Vec<ConsistencyRow>> {
    let mut rows = Vec::new();
    for subset in [Subset::All, Subset::Explicit, Subset::Implicit] {
        let contexts = subset.select(&bundle.contexts);
        if contexts.is_empty() {
            continue;
        }
        let econ = ResponseTable::from_agent(&Economicus, &contexts);
        let mut tables: Vec<(&str, &ResponseTable)> =
            bundle.models.iter().map(|(l, t)| (l.as_str(), t)).collect();
        tables.push((ECONOMICUS, &econ));
        if let Some(h) = &bundle.human {
            tables.push((HUMAN, h));
        }
        for (label, t) in tables {
            let tag = |e: Error| Error::Data(format!("{label} ({subset}): {e}"));
            let v = |r: Result<Measured<f64>>| r.map(|m| m.value).map_err(tag);
            rows.push(ConsistencyRow {
                model: label.to_string(),
                subset,
                decisiveness: v(decisiveness(t, &contexts))?,
                order: v(variation_consistency(t, &contexts, Grouping::Order))?,
                prompt: v(variation_consistency(t, &contexts, Grouping::Prompt))?,
                frame: v(frame_consistency(t, &contexts))?,
            });
        }
    }
    Ok(rows)
}

pub fn write_consistency_csv<W: Write>(rows: &[ConsistencyRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["model", "subset", "decisiveness", "order", "prompt", "frame"])?;
    for r in rows {
        w.write_record([
            r.model.clone(),
            r.subset.to_string(),
            r.decisiveness.to_string(),
            r.order.to_string(),
            r.prompt.to_string(),
            r.frame.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_he_csv<W: Write>(rows: &[HeRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["model", "human", "economicus"])?;
    let cell = |p: Pearson| p.value().map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([r.model.clone(), cell(r.point.human), cell(r.point.economicus)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_dh_gap_csv<W: Write>(rows: &[DhGapRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "model",
        "explicit_human",
        "explicit_economicus",
        "implicit_human",
        "implicit_economicus",
        "delta_human",
        "delta_economicus",
    ])?;
    let p = |p: Pearson| p.value().map(|x| x.to_string()).unwrap_or_default();
    let o = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.model.clone(),
            p(r.explicit.human),
            p(r.explicit.economicus),
            p(r.implicit.human),
            p(r.implicit.economicus),
            o(r.delta_human),
            o(r.delta_economicus),
        ])?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Parameter tables

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Pt,
    Regret,
}

impl Family {
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Family::Pt => &["σ", "λ", "γ", "β"],
            Family::Regret => &["λ_reg", "κ", "α"],
        }
    }

    fn of(v: Variant) -> Family {
        if v.is_prospect_theory() {
            Family::Pt
        } else {
            Family::Regret
        }
    }
}

/// One fitted model with its evaluation and optional bootstrap.
#[derive(Debug, Clone)]
pub struct FitSummary {
    pub label: String,
    pub fit: FitResult,
    pub gof: GoodnessOfFit,
    pub bootstrap: Option<BootstrapResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterRow {
    pub model: String,
    /// Every column of the family; restricted variants carry their fixed values.
    pub values: Vec<f64>,
    pub corr: Option<f64>,
    pub mse: f64,
    /// Column names of parameters that ended at a bound.
    pub at_bound: Vec<String>,
    /// Per column; `None` for columns the variant does not fit.
    pub ci: Option<Vec<Option<(f64, f64)>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterTable {
    pub variant: Variant,
    pub rows: Vec<ParameterRow>,
}

fn column_of(name: &str) -> &'static str {
    match name {
        "sigma" => "σ",
        "lambda" => "λ",
        "gamma" => "γ",
        "beta" => "β",
        "lambda_reg" => "λ_reg",
        "kappa" => "κ",
        _ => "α",
    }
}

pub fn parameter_table(fits: &[FitSummary]) -> Result<ParameterTable> {
    let Some(first) = fits.first() else {
        return Err(Error::Data("no fits for the parameter table".into()));
    };
    let variant = first.fit.variant;
    if let Some(f) = fits.iter().find(|f| f.fit.variant != variant) {
        return Err(Error::Data(format!(
            "mixed variants: {} is {} but {} is {}",
            first.label, variant, f.label, f.fit.variant
        )));
    }
    let family = Family::of(variant);
    let rows = fits
        .iter()
        .map(|f| {
            let values = match family {
                Family::Pt => {
                    let p = f.fit.pt_params().expect("prospect-theory variant");
                    vec![p.sigma, p.lambda, p.gamma, p.beta]
                }
                Family::Regret => f.fit.best_params.clone(),
            };
            let ci = f.bootstrap.as_ref().map(|b| {
                family
                    .columns()
                    .iter()
                    .map(|col| {
                        b.param_names
                            .iter()
                            .position(|n| column_of(n) == *col)
                            .map(|i| b.ci[i])
                    })
                    .collect()
            });
            ParameterRow {
                model: f.label.clone(),
                values,
                corr: f.gof.corr.value(),
                mse: f.gof.mse,
                at_bound: f.fit.at_bound.iter().map(|n| column_of(n).to_string()).collect(),
                ci,
            }
        })
        .collect();
    Ok(ParameterTable { variant, rows })
}

impl ParameterTable {
    pub fn has_ci(&self) -> bool {
        self.rows.iter().any(|r| r.ci.is_some())
    }

    pub fn header(&self) -> Vec<String> {
        let cols = Family::of(self.variant).columns();
        let mut h = vec!["model".to_string()];
        h.extend(cols.iter().map(|c| c.to_string()));
        h.extend(["corr", "mse", "at_bound", "variant"].map(String::from));
        if self.has_ci() {
            for c in cols {
                h.push(format!("{c}_lo"));
                h.push(format!("{c}_hi"));
            }
        }
        h
    }

    /// `model,<params>,corr,mse,at_bound,variant[,<param>_lo,<param>_hi...]`.
    /// Empty cells are undefined values; `at_bound` is `;`-separated.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header())?;
        let with_ci = self.has_ci();
        let ncol = Family::of(self.variant).columns().len();
        for r in &self.rows {
            let mut rec = vec![r.model.clone()];
            rec.extend(r.values.iter().map(f64::to_string));
            rec.push(r.corr.map(|c| c.to_string()).unwrap_or_default());
            rec.push(r.mse.to_string());
            rec.push(r.at_bound.join(";"));
            rec.push(self.variant.to_string());
            if with_ci {
                for k in 0..ncol {
                    match r.ci.as_ref().and_then(|c| c[k]) {
                        Some((lo, hi)) => {
                            rec.push(lo.to_string());
                            rec.push(hi.to_string());
                        }
                        None => rec.extend([String::new(), String::new()]),
                    }
                }
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Data(e.to_string()))
    }

    pub fn from_csv(text: &str) -> Result<ParameterTable> {
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let header: Vec<String> = rd.headers()?.iter().map(String::from).collect();
        let family = if header.get(1).map(String::as_str) == Some("σ") {
            Family::Pt
        } else {
            Family::Regret
        };
        let ncol = family.columns().len();
        let with_ci = header.len() > ncol + 5;
        let bad = |row: usize, m: &str| Error::TableRow {
            row,
            message: m.to_string(),
        };
        let num = |row: usize, s: &str| s.parse::<f64>().map_err(|_| bad(row, s));
        let mut variant = None;
        let mut rows = Vec::new();
        for (i, rec) in rd.records().enumerate() {
            let rec = rec?;
            let row = i + 2;
            let cell = |k: usize| rec.get(k).ok_or_else(|| bad(row, "short row"));
            let values = (1..=ncol)
                .map(|k| num(row, cell(k)?))
                .collect::<Result<Vec<f64>>>()?;
            let corr = match cell(ncol + 1)? {
                "" => None,
                s => Some(num(row, s)?),
            };
            let mse = num(row, cell(ncol + 2)?)?;
            let at_bound = match cell(ncol + 3)? {
                "" => Vec::new(),
                s => s.split(';').map(String::from).collect(),
            };
            let v: Variant = cell(ncol + 4)?.parse()?;
            if variant.is_some_and(|x| x != v) {
                return Err(bad(row, "mixed variants"));
            }
            variant = Some(v);
            let ci = if with_ci {
                let mut cis = Vec::with_capacity(ncol);
                for k in 0..ncol {
                    let (lo, hi) = (cell(ncol + 5 + 2 * k)?, cell(ncol + 6 + 2 * k)?);
                    cis.push(if lo.is_empty() && hi.is_empty() {
                        None
                    } else {
                        Some((num(row, lo)?, num(row, hi)?))
                    });
                }
                // A row without any interval had no bootstrap.
                if cis.iter().all(Option::is_none) {
                    None
                } else {
                    Some(cis)
                }
            } else {
                None
            };
            rows.push(ParameterRow {
                model: cell(0)?.to_string(),
                values,
                corr,
                mse,
                at_bound,
                ci,
            });
        }
        let variant = variant.ok_or_else(|| Error::Data("empty parameter table".into()))?;
        Ok(ParameterTable { variant, rows })
    }
}

/// `stem_subset.ext`.
pub fn subset_file_name(stem: &str, subset: Subset, ext: &str) -> String {
    format!("{stem}_{subset}.{ext}")
}

/// Distinct sample sizes among implicit contexts.
pub fn sample_sizes(contexts: &[Context]) -> BTreeSet<u32> {
    contexts
        .iter()
        .filter_map(|c| c.representation().sample_size())
        .collect()
}
