//! `lab`: command-line driver for the transport-lab experiments.
//!
//! Exit codes: 0 when every asserted invariant held, 1 on errors (unknown
//! scenario, invalid parameters, I/O), 2 on command-line usage errors, 3
//! when a run or `check` found an invariant violation.

mod check;
mod config;
mod harness;

use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;
use transport_lab::scenarios::catalog;

use config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "lab", version, about = "Transport-equation numerical laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one harness and write CSVs plus `manifest.json` into --out.
    Run(ExperimentConfig),
    /// Print the scenario catalog as JSON.
    Catalog,
    /// Run the invariant suite.
    Check {
        /// Points per axis for the solver checks.
        #[arg(long, default_value_t = 128)]
        grid: usize,
    },
}

const VIOLATION_EXIT: u8 = 3;

fn run(cfg: ExperimentConfig) -> Result<ExitCode> {
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let outcome = harness::run(&cfg)?;
    record(&cfg, outcome)
}

/// Writes `manifest.json` (and `violation.json` when needed) and picks the
/// exit code.
fn record(cfg: &ExperimentConfig, outcome: harness::Outcome) -> Result<ExitCode> {
    let manifest = json!({
        "tool": "lab",
        "version": env!("CARGO_PKG_VERSION"),
        "library_version": transport_lab::VERSION,
        "suite_version": transport_lab::logineq::SUITE_VERSION,
        "seed": cfg.seed,
        "config": cfg,
        "results": outcome.results,
        "files": outcome.files,
        "violations": outcome.violations,
    });
    fs::write(cfg.out.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    if outcome.violations.is_empty() {
        println!("{}: ok ({})", cfg.harness.as_str(), cfg.out.display());
        return Ok(ExitCode::SUCCESS);
    }
    fs::write(
        cfg.out.join("violation.json"),
        serde_json::to_string_pretty(&outcome.violations)? + "\n",
    )?;
    for v in &outcome.violations {
        eprintln!("violation: {}: {}", v.invariant, v.detail);
    }
    Ok(ExitCode::from(VIOLATION_EXIT))
}

fn print_catalog() -> Result<()> {
    let text = serde_json::to_string_pretty(&catalog())?;
    match writeln!(io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Run(cfg) => run(cfg),
        Command::Catalog => print_catalog().map(|()| ExitCode::SUCCESS),
        Command::Check { grid } => check::run(grid).map(|ok| {
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(VIOLATION_EXIT)
            }
        }),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
