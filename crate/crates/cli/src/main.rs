//! `prospect`: generate risky-choice contexts, collect or simulate
//! choices, fit choice models and write comparison reports.

mod failure;
mod fit;
mod gen;
mod inputs;
mod output;
mod report;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use failure::{CmdResult, Failure};

#[derive(Debug, Parser)]
#[command(name = "prospect", version, about = "Risky-choice experiment pipeline")]
struct Cli {
    /// Worker thread cap.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Enumerate the context grid.
    Gen(gen::GenArgs),
    /// Simulate an agent or query a backend over a context set.
    Run(run::RunArgs),
    /// Fit a choice model to a dataset.
    Fit(fit::FitArgs),
    /// Correlations, HE coordinates, consistency and parameter tables.
    Report(report::ReportArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct OutArgs {
    /// Output directory; must be new or empty.
    #[arg(long)]
    pub out: PathBuf,
    /// Write into a non-empty output directory.
    #[arg(long)]
    pub force: bool,
}

fn set_jobs(jobs: Option<usize>) -> CmdResult {
    let Some(n) = jobs else { return Ok(()) };
    if n == 0 {
        return Err(Failure::usage("--jobs must be at least 1"));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(e))?;
    Ok(())
}

fn dispatch(cli: &Cli) -> CmdResult {
    set_jobs(cli.jobs)?;
    match &cli.command {
        Command::Gen(a) => gen::run(a),
        Command::Run(a) => run::run(a, cli.jobs),
        Command::Fit(a) => fit::run(a),
        Command::Report(a) => report::run(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
