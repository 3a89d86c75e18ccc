//! Command-line front end: file-driven experiments and the validation suite.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use freehop::config::{ExperimentConfig, OutputFormat};
use freehop::error::{Error, Result};
use freehop::experiment::{emit_precoders, render_csv, render_json, run_experiment, RunMode};
use freehop::validation::{run_validation_suite, ValidationLevel};

#[derive(Parser)]
#[command(
    name = "freehop",
    version,
    about = "Asymptotic mutual information of multi-hop precoded MIMO relay chains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Asymptotic mutual information across the configured SNR grid.
    Asymptotic(RunArgs),
    /// Asymptotic curve plus seeded Monte Carlo estimates per grid point.
    Sweep(RunArgs),
    /// Aligned-precoder construction report (optimal_directions configs).
    Precoders(RunArgs),
    /// Numerical self-check suite; exits 5 if any check fails.
    Validate {
        /// Suite size: quick or full.
        #[arg(long, default_value = "quick")]
        level: ValidationLevel,
        /// Master seed for the checks' random draws.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Experiment description (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Write here instead of the config's `output` (stdout if neither).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Override the config's output format (csv or json).
    #[arg(long)]
    format: Option<String>,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl RunArgs {
    fn load(&self) -> Result<(ExperimentConfig, u64)> {
        let config = ExperimentConfig::from_file(&self.config)?;
        let seed = self.seed.unwrap_or(config.master_seed);
        Ok((config, seed))
    }

    fn resolve_format(&self, config: &ExperimentConfig) -> Result<OutputFormat> {
        match self.format.as_deref() {
            None => Ok(config.format),
            Some("csv") => Ok(OutputFormat::Csv),
            Some("json") => Ok(OutputFormat::Json),
            Some(other) => Err(Error::Config(format!(
                "unknown format {other:?}; expected csv or json"
            ))),
        }
    }

    fn target<'a>(&'a self, config: &'a ExperimentConfig) -> Option<&'a Path> {
        self.output.as_deref().or(config.output.as_deref())
    }
}

fn deliver(text: &str, target: Option<&Path>) -> Result<()> {
    match target {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => Ok(std::fs::write(path, text)?),
    }
}

fn run_mode(args: &RunArgs, mode: RunMode) -> Result<i32> {
    let (config, seed) = args.load()?;
    let format = args.resolve_format(&config)?;
    let output = run_experiment(&config, seed, mode)?;
    let text = match format {
        OutputFormat::Csv => render_csv(&output.records),
        OutputFormat::Json => render_json(&output)?,
    };
    deliver(&text, args.target(&config))?;
    Ok(0)
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Asymptotic(args) => run_mode(&args, RunMode::AsymptoticOnly),
        Command::Sweep(args) => run_mode(&args, RunMode::Sweep),
        Command::Precoders(args) => {
            if matches!(args.format.as_deref(), Some(f) if f != "json") {
                return Err(Error::Config(
                    "precoder reports are JSON only".to_string(),
                ));
            }
            let (config, seed) = args.load()?;
            let text = emit_precoders(&config, seed)?;
            deliver(&text, args.target(&config))?;
            Ok(0)
        }
        Command::Validate { level, seed } => {
            let report = run_validation_suite(level, seed);
            print!("{}", report.render());
            Ok(if report.all_passed() { 0 } else { 5 })
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            std::process::exit(i32::from(e.exit_code()));
        }
    }
}
