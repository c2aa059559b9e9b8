mod bench;
mod generate;
mod record;
mod report;
mod solve;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pcp_core::config::SolverConfig;
use pcp_core::pricing::Backend;

/// Exit codes.
const EXIT_USAGE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, unreadable inputs or bad configuration.
    Usage(anyhow::Error),
    /// The instance admits no schedule.
    Infeasible,
    Internal(anyhow::Error),
}

impl CliError {
    pub fn usage(e: impl Into<anyhow::Error>) -> Self {
        CliError::Usage(e.into())
    }

    pub fn internal(e: impl Into<anyhow::Error>) -> Self {
        CliError::Internal(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "pcp", version, about = "Branch-and-price scheduler for EV charging piles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write random instances, one file per seed.
    Generate(generate::GenerateArgs),
    /// Solve one instance.
    Solve(solve::SolveArgs),
    /// Run every (instance, backend, seed) line of a manifest.
    Bench(bench::BenchArgs),
    /// Turn a run CSV into gap and runtime series per backend.
    Report(report::ReportArgs),
}

/// Solver settings shared by `solve` and `bench`.
#[derive(Args, Debug, Clone, Default)]
pub struct SolverArgs {
    /// Wall-clock limit in seconds.
    #[arg(long, value_name = "SECS")]
    time_limit: Option<f64>,
    /// Flat `key = value` settings file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Extra settings as `key=value`, applied after the config file.
    #[arg(value_name = "KEY=VALUE")]
    settings: Vec<String>,
}

impl SolverArgs {
    /// Defaults, then the config file, then `key=value` settings, then flags.
    pub fn build(&self, backend: Option<Backend>, seed: Option<u64>) -> CliResult<SolverConfig> {
        let mut cfg = SolverConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::usage(anyhow::anyhow!("reading {}: {e}", path.display())))?;
            cfg.apply_text(&text)
                .map_err(|e| CliError::usage(anyhow::anyhow!("{}: {e}", path.display())))?;
        }
        for kv in &self.settings {
            let (key, value) = kv
                .split_once('=')
                .ok_or_else(|| CliError::usage(anyhow::anyhow!("expected KEY=VALUE, got {kv:?}")))?;
            cfg.set(key, value).map_err(CliError::usage)?;
        }
        if let Some(secs) = self.time_limit {
            cfg.set("bnp.time_limit", &secs.to_string()).map_err(CliError::usage)?;
        }
        if let Some(b) = backend {
            cfg.pricing.backend = b;
        }
        if let Some(s) = seed {
            cfg.qaia.seed = s;
        }
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Generate(args) => generate::run(&args),
        Command::Solve(args) => solve::run(&args),
        Command::Bench(args) => bench::run(&args),
        Command::Report(args) => report::run(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(CliError::Infeasible) => ExitCode::from(EXIT_INFEASIBLE),
        Err(CliError::Internal(e)) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}
