//! Loading contexts and response tables from disk.

use std::collections::HashSet;
use std::path::Path;

use prospect_core::agents::{parse_response_table, ChoiceDataset, ResponseTable};
use prospect_core::prospects::{contexts_from_json, Context};

use crate::failure::{CmdResult, Failure};
use crate::output::{read_input, OutDir};

pub fn load_contexts(out: &mut OutDir, path: &Path) -> CmdResult<Vec<Context>> {
    out.input(path)?;
    let contexts =
        contexts_from_json(&read_input(path)?).map_err(|e| Failure::from(e).context(path.display()))?;
    if contexts.is_empty() {
        return Err(Failure::data(format!("{}: no contexts", path.display())));
    }
    Ok(contexts)
}

/// Reads a response table from a `.csv` table or a dataset JSON file and
/// rejects ids outside `contexts`.
pub fn load_table(out: &mut OutDir, path: &Path, contexts: &[Context]) -> CmdResult<ResponseTable> {
    out.input(path)?;
    let known: HashSet<String> = contexts.iter().map(Context::id).collect();
    let text = read_input(path)?;
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let table = if is_csv {
        parse_response_table(&text, Some(&known))
    } else {
        ChoiceDataset::from_json(&text).map(|d| d.table())
    }
    .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    let mut unknown: Vec<&str> = table
        .iter()
        .map(|(id, _)| id.as_str())
        .filter(|id| !known.contains(*id))
        .collect();
    if !unknown.is_empty() {
        unknown.truncate(5);
        return Err(Failure::data(format!(
            "{}: context ids not in the context set: {}",
            path.display(),
            unknown.join(", ")
        )));
    }
    Ok(table)
}

/// Splits `label=path`; a bare path takes its label from the file stem.
pub fn labeled_path(spec: &str) -> (Option<String>, &Path) {
    match spec.split_once('=') {
        Some((label, path)) if !label.is_empty() => (Some(label.to_string()), Path::new(path)),
        _ => (None, Path::new(spec)),
    }
}

pub fn stem_label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}
