//! Config-driven command line for penalized GLM fitting and experiments.
//!
//! Each subcommand reads one JSON manifest, runs it, and emits one
//! schema-versioned JSON report to `--out`, the manifest's `output`, or
//! stdout. Failures print a machine-readable error record to stderr and
//! exit nonzero so scripts can branch on `kind` without scraping messages.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use penglm::cli::{self, CommandKind, ErrorRecord, Overrides};
use penglm::Error;

#[derive(Parser)]
#[command(name = "penglm", version, about = "Penalized GLM fitting, tuning, and experiment driver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one penalized model to a CSV dataset.
    Fit(CommonArgs),
    /// Fit a lambda grid and select the criterion minimizer.
    Path(CommonArgs),
    /// Run a simulation experiment (sparsity, selection, or normality).
    Simulate(CommonArgs),
    /// Compare the criterion's bias correction to a held-out-likelihood oracle.
    VerifyBias(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Manifest describing the run.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,

    /// Override the manifest's lambda (for `path`, collapses the grid to it).
    #[arg(long, value_name = "REAL")]
    lambda: Option<f64>,

    /// Override the solver, Monte-Carlo, and replication-harness seeds.
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,

    /// Override the report destination.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Override the replication count for simulation commands.
    #[arg(long, value_name = "INT")]
    reps: Option<usize>,
}

impl Command {
    fn kind(&self) -> CommandKind {
        match self {
            Command::Fit(_) => CommandKind::Fit,
            Command::Path(_) => CommandKind::Path,
            Command::Simulate(_) => CommandKind::Simulate,
            Command::VerifyBias(_) => CommandKind::VerifyBias,
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Fit(a) | Command::Path(a) | Command::Simulate(a) | Command::VerifyBias(a) => a,
        }
    }
}

fn execute(command: &Command) -> penglm::Result<()> {
    let args = command.args();
    let config = cli::load_config(&args.config)?;
    if config.command != command.kind() {
        return Err(Error::Config(format!(
            "manifest {} declares command `{}` but the `{}` subcommand was invoked",
            args.config.display(),
            config.command.name(),
            command.kind().name(),
        )));
    }
    let overrides = Overrides {
        lambda: args.lambda,
        seed: args.seed,
        out: args.out.clone(),
        reps: args.reps,
    };
    let report = cli::run(config, &overrides)?;
    match &report.output {
        Some(path) => std::fs::write(path, &report.json)?,
        None => print!("{}", report.json),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = ErrorRecord::from_error(&e);
            let line = serde_json::to_string(&record).unwrap_or_else(|_| e.to_string());
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}
