//! Behavior statistics over response tables.
//!
//! Every table-level metric aligns the tables on the given contexts. A
//! context missing from a table is an error; a context present but with no
//! valid trials is skipped and reported in [`Measured::excluded`].

use std::collections::{BTreeMap, HashSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::agents::ResponseTable;
use crate::error::{Error, Result};
use crate::prospects::{Context, ExplanationMode, Frame, OrderVariant};

/// A value plus how many contexts (or groups) were skipped for lack of valid trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measured<T> {
    pub value: T,
    pub excluded: usize,
}

/// Pearson correlation, which does not exist when either side is constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pearson {
    Defined(f64),
    Undefined,
}

impl Pearson {
    pub fn value(self) -> Option<f64> {
        match self {
            Pearson::Defined(r) => Some(r),
            Pearson::Undefined => None,
        }
    }
}

/// Sample Pearson correlation of two equally long vectors.
pub fn pearson_values(x: &[f64], y: &[f64]) -> Pearson {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    let constant = |v: &[f64]| v.iter().all(|e| *e == v[0]);
    if sxx == 0.0 || syy == 0.0 || constant(x) || constant(y) {
        return Pearson::Undefined;
    }
    Pearson::Defined((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

pub fn mse_values(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / x.len() as f64
}

fn lookup(table: &ResponseTable, id: &str) -> Result<Option<f64>> {
    table
        .get(id)
        .map(|e| e.p)
        .ok_or_else(|| Error::MissingContext(id.to_string()))
}

fn aligned(
    p: &ResponseTable,
    q: &ResponseTable,
    contexts: &[Context],
) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let (mut xs, mut ys, mut excluded) = (Vec::new(), Vec::new(), 0);
    for c in contexts {
        let id = c.id();
        match (lookup(p, &id)?, lookup(q, &id)?) {
            (Some(a), Some(b)) => {
                xs.push(a);
                ys.push(b);
            }
            _ => excluded += 1,
        }
    }
    Ok((xs, ys, excluded))
}

fn single(p: &ResponseTable, contexts: &[Context]) -> Result<(Vec<f64>, usize)> {
    let (mut xs, mut excluded) = (Vec::new(), 0);
    for c in contexts {
        match lookup(p, &c.id())? {
            Some(a) => xs.push(a),
            None => excluded += 1,
        }
    }
    Ok((xs, excluded))
}

pub fn mse(p: &ResponseTable, q: &ResponseTable, contexts: &[Context]) -> Result<Measured<f64>> {
    let (xs, ys, excluded) = aligned(p, q, contexts)?;
    if xs.is_empty() {
        return Err(Error::TooFewContexts { needed: 1, got: 0 });
    }
    Ok(Measured {
        value: mse_values(&xs, &ys),
        excluded,
    })
}

pub fn pearson(
    p: &ResponseTable,
    q: &ResponseTable,
    contexts: &[Context],
) -> Result<Measured<Pearson>> {
    if contexts.len() < 2 {
        return Err(Error::TooFewContexts {
            needed: 2,
            got: contexts.len(),
        });
    }
    let (xs, ys, excluded) = aligned(p, q, contexts)?;
    if xs.len() < 2 {
        return Err(Error::TooFewContexts {
            needed: 2,
            got: xs.len(),
        });
    }
    Ok(Measured {
        value: pearson_values(&xs, &ys),
        excluded,
    })
}

/// Mean of `max(p, 1 - p)`.
pub fn decisiveness(p: &ResponseTable, contexts: &[Context]) -> Result<Measured<f64>> {
    let (xs, excluded) = single(p, contexts)?;
    if xs.is_empty() {
        return Err(Error::TooFewContexts { needed: 1, got: 0 });
    }
    Ok(Measured {
        value: xs.iter().map(|x| x.max(1.0 - x)).sum::<f64>() / xs.len() as f64,
        excluded,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grouping {
    /// AB/BA presentation order.
    Order,
    /// The three explanation instructions.
    Prompt,
}

impl Grouping {
    fn members(self, c: &Context) -> Vec<String> {
        match self {
            Grouping::Order => [OrderVariant::AB, OrderVariant::BA]
                .iter()
                .map(|o| c.sibling_id(None, Some(*o), None))
                .collect(),
            Grouping::Prompt => ExplanationMode::ALL
                .iter()
                .map(|e| c.sibling_id(None, None, Some(*e)))
                .collect(),
        }
    }
}

/// `1 - mean over groups of (max p - min p)` within each variation group.
pub fn variation_consistency(
    p: &ResponseTable,
    contexts: &[Context],
    grouping: Grouping,
) -> Result<Measured<f64>> {
    let present: HashSet<String> = contexts.iter().map(|c| c.id()).collect();
    let mut groups: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut missing: Vec<String> = Vec::new();
    for c in contexts {
        let members = grouping.members(c);
        for m in &members {
            if !present.contains(m) && !missing.contains(m) {
                missing.push(m.clone());
            }
        }
        groups.entry(members[0].clone()).or_insert(members);
    }
    if !missing.is_empty() {
        missing.sort();
        return Err(Error::IncompleteGroup(missing));
    }
    let (mut spread_sum, mut used, mut excluded) = (0.0, 0usize, 0usize);
    for members in groups.values() {
        let mut vals = Vec::with_capacity(members.len());
        for m in members {
            if let Some(v) = lookup(p, m)? {
                vals.push(v);
            }
        }
        if vals.len() < members.len() {
            excluded += 1;
            continue;
        }
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        spread_sum += hi - lo;
        used += 1;
    }
    if used == 0 {
        return Err(Error::TooFewContexts { needed: 1, got: 0 });
    }
    Ok(Measured {
        value: 1.0 - spread_sum / used as f64,
        excluded,
    })
}

/// `1 - mean over gain contexts of |p(gain) - (1 - p(loss))|`.
pub fn frame_consistency(p: &ResponseTable, contexts: &[Context]) -> Result<Measured<f64>> {
    let present: HashSet<String> = contexts.iter().map(|c| c.id()).collect();
    let mut missing: Vec<String> = contexts
        .iter()
        .map(|c| c.sibling_id(Some(c.frame().flipped()), None, None))
        .filter(|s| !present.contains(s))
        .collect();
    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        return Err(Error::IncompleteGroup(missing));
    }
    let (mut sum, mut used, mut excluded) = (0.0, 0usize, 0usize);
    for c in contexts.iter().filter(|c| c.frame() == Frame::Gain) {
        let gain = lookup(p, &c.id())?;
        let loss = lookup(p, &c.sibling_id(Some(Frame::Loss), None, None))?;
        match (gain, loss) {
            (Some(g), Some(l)) => {
                sum += (g - (1.0 - l)).abs();
                used += 1;
            }
            _ => excluded += 1,
        }
    }
    if used == 0 {
        return Err(Error::TooFewContexts { needed: 1, got: 0 });
    }
    Ok(Measured {
        value: 1.0 - sum / used as f64,
        excluded,
    })
}

/// Correlation of a model to the human and the economicus references.
pub fn he_representation(
    p_m: &ResponseTable,
    p_h: &ResponseTable,
    p_e: &ResponseTable,
    contexts: &[Context],
) -> Result<(f64, f64)> {
    let human = pearson(p_m, p_h, contexts)?
        .value
        .value()
        .ok_or_else(|| Error::UndefinedCorrelation("human".into()))?;
    let econ = pearson(p_m, p_e, contexts)?
        .value
        .value()
        .ok_or_else(|| Error::UndefinedCorrelation("economicus".into()))?;
    Ok((human, econ))
}

// ---------------------------------------------------------------------------
// Report

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TableMetrics {
    pub decisiveness: Option<f64>,
    pub order_consistency: Option<f64>,
    pub prompt_consistency: Option<f64>,
    pub frame_consistency: Option<f64>,
    /// Errors that left a metric empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl TableMetrics {
    pub fn compute(p: &ResponseTable, contexts: &[Context]) -> Self {
        let mut notes = Vec::new();
        let mut keep = |name: &str, r: Result<Measured<f64>>| match r {
            Ok(m) => Some(m.value),
            Err(e) => {
                notes.push(format!("{name}: {e}"));
                None
            }
        };
        let decisiveness = keep("decisiveness", decisiveness(p, contexts));
        let order_consistency = keep(
            "order_consistency",
            variation_consistency(p, contexts, Grouping::Order),
        );
        let prompt_consistency = keep(
            "prompt_consistency",
            variation_consistency(p, contexts, Grouping::Prompt),
        );
        let frame_consistency = keep("frame_consistency", frame_consistency(p, contexts));
        Self {
            decisiveness,
            order_consistency,
            prompt_consistency,
            frame_consistency,
            notes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMetrics {
    pub a: String,
    pub b: String,
    pub mse: Option<f64>,
    pub pearson: Option<Pearson>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HePoint {
    pub human: Pearson,
    pub economicus: Pearson,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub tables: BTreeMap<String, TableMetrics>,
    pub pairs: Vec<PairMetrics>,
    pub he_points: BTreeMap<String, HePoint>,
}

impl MetricReport {
    /// Metrics for every table, every unordered pair of tables, and HE
    /// points for every table other than the references when both
    /// `human` and `economicus` labels are present.
    pub fn compute(
        tables: &[(String, ResponseTable)],
        contexts: &[Context],
        human: Option<&str>,
        economicus: Option<&str>,
    ) -> Self {
        let mut report = MetricReport::default();
        for (label, t) in tables {
            report
                .tables
                .insert(label.clone(), TableMetrics::compute(t, contexts));
        }
        for (i, (la, ta)) in tables.iter().enumerate() {
            for (lb, tb) in &tables[i + 1..] {
                report.pairs.push(PairMetrics {
                    a: la.clone(),
                    b: lb.clone(),
                    mse: mse(ta, tb, contexts).ok().map(|m| m.value),
                    pearson: pearson(ta, tb, contexts).ok().map(|m| m.value),
                });
            }
        }
        let find = |l: &str| tables.iter().find(|(x, _)| x == l).map(|(_, t)| t);
        let href = human.and_then(find);
        let eref = economicus.and_then(find);
        for (label, t) in tables {
            if Some(label.as_str()) == human || Some(label.as_str()) == economicus {
                continue;
            }
            let corr = |r: Option<&ResponseTable>| {
                r.and_then(|r| pearson(t, r, contexts).ok())
                    .map(|m| m.value)
                    .unwrap_or(Pearson::Undefined)
            };
            report.he_points.insert(
                label.clone(),
                HePoint {
                    human: corr(href),
                    economicus: corr(eref),
                },
            );
        }
        report
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One metric per row: `subject,metric,value` (empty value when undefined).
    pub fn write_flat_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["subject", "metric", "value"])?;
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for (label, m) in &self.tables {
            for (name, v) in [
                ("decisiveness", m.decisiveness),
                ("order_consistency", m.order_consistency),
                ("prompt_consistency", m.prompt_consistency),
                ("frame_consistency", m.frame_consistency),
            ] {
                w.write_record([label.as_str(), name, &cell(v)])?;
            }
        }
        for pm in &self.pairs {
            let subject = format!("{}|{}", pm.a, pm.b);
            w.write_record([subject.as_str(), "mse", &cell(pm.mse)])?;
            w.write_record([
                subject.as_str(),
                "pearson",
                &cell(pm.pearson.and_then(Pearson::value)),
            ])?;
        }
        for (label, he) in &self.he_points {
            w.write_record([label.as_str(), "he_human", &cell(he.human.value())])?;
            w.write_record([label.as_str(), "he_economicus", &cell(he.economicus.value())])?;
        }
        w.flush()?;
        Ok(())
    }
}
