use std::path::PathBuf;

use clap::Args;
use prospect_core::prospects::{contexts_to_json, enumerate_contexts, GridConfig};
use serde::{Deserialize, Serialize};

use crate::failure::{CmdResult, Failure};
use crate::output::{read_input, OutDir};
use crate::OutArgs;

pub const CONTEXTS: &str = "contexts.json";

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    /// TOML file with a `[grid]` table (an experiment config works too).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the grid's base pairs, e.g. `1,2,3`.
    #[arg(long, value_delimiter = ',')]
    pub pairs: Option<Vec<u8>>,
    /// Overrides the implicit sample sizes, e.g. `20,100`.
    #[arg(long, value_delimiter = ',')]
    pub sample_sizes: Option<Vec<u32>>,
    /// Overrides the number of history seeds per sample size.
    #[arg(long)]
    pub seeds: Option<u32>,
    #[arg(long)]
    pub explicit_only: bool,
    #[arg(long, conflicts_with = "explicit_only")]
    pub implicit_only: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Deserialize)]
struct GridFile {
    #[serde(default)]
    grid: GridConfig,
}

pub fn run(args: &GenArgs) -> CmdResult {
    let mut out = OutDir::prepare(&args.out.out, args.out.force, "gen")?;
    let mut grid = match &args.config {
        Some(path) => {
            out.input(path)?;
            let file: GridFile = toml::from_str(&read_input(path)?)
                .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            file.grid
        }
        None => GridConfig::default(),
    };
    if let Some(p) = &args.pairs {
        grid.pairs = p.clone();
    }
    if let Some(s) = &args.sample_sizes {
        grid.sample_sizes = s.clone();
    }
    if let Some(s) = args.seeds {
        grid.seeds = s;
    }
    if args.explicit_only {
        grid.implicit = false;
    }
    if args.implicit_only {
        grid.explicit = false;
    }
    let contexts = enumerate_contexts(&grid)?;
    out.write(CONTEXTS, contexts_to_json(&contexts)? + "\n")?;
    eprintln!("wrote {} contexts to {}", contexts.len(), out.path(CONTEXTS).display());
    out.finish(serde_json::json!({ "args": args, "grid": grid }), &[])
}
