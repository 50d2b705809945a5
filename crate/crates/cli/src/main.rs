use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use netobs::config::ExperimentKind;
use netobs::output::catalog;
use netobs::{parse_config, run, Overrides};
use netobs_core::methods::presets;
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(
    name = "netobs",
    version,
    about = "Observer-effect experiments for network measurement methods"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and report per-flow and overhead accounting.
    Simulate(RunArgs),
    /// Impact vs uncertainty over a period or sampling-ratio grid.
    Sweep(RunArgs),
    /// Failure detection latency.
    Detect(RunArgs),
    /// Aggregate impact over flow counts or data rates.
    Scale(RunArgs),
    /// Loss of an in-band-monitored flow against its unmonitored twin.
    Ovu(RunArgs),
    /// List built-in method presets.
    Presets,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Evaluate sweep points with the fluid model only.
    #[arg(long)]
    fluid: bool,
    /// Relative tolerance for relation checks.
    #[arg(long)]
    tolerance: Option<f64>,
}

fn execute(kind: ExperimentKind, args: RunArgs) -> anyhow::Result<bool> {
    let text = std::fs::read_to_string(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    let config = parse_config(&text).with_context(|| format!("in {}", args.config.display()))?;
    if config.experiment.kind() != kind {
        bail!(
            "{} describes a `{}` experiment, not `{}`",
            args.config.display(),
            config.experiment.kind(),
            kind
        );
    }
    let overrides = Overrides {
        out: args.out,
        seed: args.seed,
        fluid: args.fluid,
        tolerance: args.tolerance,
    };
    let outcome = run(&config, &overrides)?;
    if outcome.written.is_none() {
        print!("{}", outcome.csv);
    }
    for f in &outcome.failures {
        eprintln!("FAIL: {f}");
    }
    Ok(outcome.success())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();

    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Presets => {
            print!("{}", catalog(&presets()));
            return ExitCode::SUCCESS;
        }
        Command::Simulate(a) => (ExperimentKind::Simulate, a),
        Command::Sweep(a) => (ExperimentKind::Sweep, a),
        Command::Detect(a) => (ExperimentKind::Detect, a),
        Command::Scale(a) => (ExperimentKind::Scale, a),
        Command::Ovu(a) => (ExperimentKind::Ovu, a),
    };
    match execute(kind, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
