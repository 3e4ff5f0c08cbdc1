//! The `ftl-arena` command line: `run` and `sweep` execute experiment
//! configs, `verify` runs the numerical self-checks.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime error, 3 a
//! verification check failed.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use ftl_arena::table::Table;
use ftl_arena::verify::{run_suite, Suite};
use thiserror::Error;

pub mod config;
pub mod experiment;
pub mod svg;

use config::ExperimentConfig;

/// Seed of `verify` when `--seed` is not given.
pub const VERIFY_SEED: u64 = 2718;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 1,
            Self::Runtime(_) => 2,
            Self::VerifyFailed(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ftl-arena", version, about = "Online linear prediction experiments over convex sets")]
pub struct Cli {
    /// Overrides the config's master seed (or the verify seed).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory; defaults to the config's `outputs.csv_dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Skip the SVG plots.
    #[arg(long, global = true)]
    pub no_svg: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Play every learner against the adversary and write summary, traces
    /// and plots.
    Run { config: PathBuf },
    /// Monte-Carlo regret over `n_grid` plus the ln-versus-sqrt fit report.
    Sweep { config: PathBuf },
    /// Run a self-check suite.
    Verify {
        #[arg(default_value = "all", value_parser = clap::builder::PossibleValuesParser::new(Suite::NAMES))]
        suite: String,
    },
}

fn verify(suite: Suite, seed: u64, out: Option<PathBuf>) -> Result<(), CliError> {
    let outcomes = run_suite(suite, seed);
    let width = outcomes.iter().map(|o| o.name.len()).max().unwrap_or(0);
    for o in &outcomes {
        println!("{}  {:width$}  {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} of {} checks passed", outcomes.len() - failed, outcomes.len());
    if let Some(dir) = out {
        std::fs::create_dir_all(&dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
        let mut t = Table::new(["check", "passed", "detail"]);
        for o in &outcomes {
            t.push(vec![o.name.clone(), o.passed.to_string(), o.detail.clone()]);
        }
        let path = dir.join(format!("verify_{}.csv", suite.as_str()));
        let f = std::fs::File::create(&path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        t.write(f).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    match outcomes.iter().find(|o| !o.passed) {
        Some(first) => Err(CliError::VerifyFailed(format!("{} ({})", first.name, first.detail))),
        None => Ok(()),
    }
}

pub fn execute(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    match cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = cli.out.unwrap_or_else(|| cfg.outputs.csv_dir.clone());
            experiment::run(&cfg, cli.seed.unwrap_or(cfg.master_seed), &dir, !cli.no_svg)
        }
        Command::Sweep { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = cli.out.unwrap_or_else(|| cfg.outputs.csv_dir.clone());
            experiment::sweep(&cfg, cli.seed.unwrap_or(cfg.master_seed), &dir, !cli.no_svg)
        }
        Command::Verify { suite } => {
            let suite: Suite = suite.parse().map_err(|e: ftl_arena::Error| CliError::Config(e.to_string()))?;
            verify(suite, cli.seed.unwrap_or(VERIFY_SEED), cli.out).map(|_| Vec::new())
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
