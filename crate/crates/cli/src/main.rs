mod config;
mod plot;
mod report;
mod run;
mod selfcheck;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("`{key}`: {message}")]
    Config { key: String, message: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0}")]
    Precondition(String),
    #[error("numerical blow-up: non-finite value at node {node}, level {level}")]
    BlowUp { node: usize, level: usize },
    #[error("{0}")]
    Numerics(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::BlowUp { .. } => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "quench", version, about = "Penalized free-boundary experiments: solve, measure, report")]
struct Cli {
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for the data-parallel kernels.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized checks (overrides `experiment.seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for every ε in the config and run the estimator battery.
    Run { config: PathBuf },
    /// Like `run`, plus the ε-sweep table and drift checks.
    Sweep { config: PathBuf },
    /// Aggregate report.json files under a directory.
    Report { dir: PathBuf },
    /// Operator and penalization property suites.
    Selfcheck,
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Run { ref config } | Command::Sweep { ref config } => {
            let sweep = matches!(cli.command, Command::Sweep { .. });
            let mut loaded = config::load(config)?;
            if let Some(seed) = cli.seed {
                loaded.config.experiment.seed = seed;
            }
            let outcome = run::execute(&loaded, sweep, cli.out.as_deref())?;
            run::print_summary(&outcome.report);
            println!("wrote {}", outcome.out_dir.display());
            Ok(outcome.report.passed)
        }
        Command::Report { dir } => {
            let entries = report::collect(&dir)?;
            report::print(&entries);
            Ok(entries.iter().all(|e| e.passed))
        }
        Command::Selfcheck => {
            let lines = selfcheck::run(cli.seed.unwrap_or(0))?;
            for l in &lines {
                println!("{}  {}: {}", if l.passed { "PASS" } else { "FAIL" }, l.name, l.detail);
            }
            let passed = lines.iter().filter(|l| l.passed).count();
            println!("{passed}/{} pass", lines.len());
            Ok(passed == lines.len())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: `--threads` must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
