//! Command line front end.
//!
//! Every command reads one JSON config (from a file or a built-in preset),
//! runs it, and writes flat result rows as CSV or a JSON report. Exit
//! codes: 0 on success, 2 for configuration errors, 3 for runtime contract
//! violations. Outputs are reproducible: the same config and seed give the
//! same bytes regardless of `--threads` (the JSON `timing` field aside).

mod config;
mod output;
mod presets;
mod runner;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use geoperc_core::Error;

use config::{CommandName, ExperimentConfig, OutputFormat};

#[derive(Parser)]
#[command(
    name = "geoperc",
    version,
    about = "Monte Carlo lab for Boolean disc models with spatially correlated radii"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate coverage, crossing or dependence-proxy quantities.
    Estimate(RunArgs),
    /// Sweep the hard-box crossing probability along an intensity grid.
    ScanLambda(RunArgs),
    /// Bracket the pseudo-critical intensity by bisection.
    LambdaC(RunArgs),
    /// Run matched geostatistical and iid models on paired seeds.
    Compare(RunArgs),
    /// Bracket thresholds across a mosaic-field parameter grid.
    VoronoiScan(RunArgs),
    /// Test the crossing-failure contraction inequality at one scale.
    CheckContraction(RunArgs),
    /// List the built-in presets.
    Presets,
}

impl Command {
    fn name(&self) -> CommandName {
        match self {
            Command::Estimate(_) => CommandName::Estimate,
            Command::ScanLambda(_) => CommandName::ScanLambda,
            Command::LambdaC(_) => CommandName::LambdaC,
            Command::Compare(_) => CommandName::Compare,
            Command::VoronoiScan(_) => CommandName::VoronoiScan,
            Command::CheckContraction(_) => CommandName::CheckContraction,
            Command::Presets => unreachable!("has no config"),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Path to a JSON experiment config.
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Name of a built-in config (see `geoperc presets`).
    #[arg(long)]
    preset: Option<String>,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker thread count; results never depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Override the config's output format.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Write here instead of the config's output path (stdout by default).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn config_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("config error: {msg}");
    ExitCode::from(2)
}

fn load_config(args: &RunArgs, expected: CommandName) -> Result<ExperimentConfig, ExitCode> {
    let mut config: ExperimentConfig = if let Some(path) = &args.config {
        let text = fs::read_to_string(path)
            .map_err(|e| config_error(format_args!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| config_error(format_args!("cannot parse {}: {e}", path.display())))?
    } else {
        let name = args.preset.as_deref().expect("clap enforces config xor preset");
        let preset = presets::lookup(name).ok_or_else(|| {
            config_error(format_args!(
                "unknown preset {name:?}; `geoperc presets` lists the available ones"
            ))
        })?;
        preset.parse().map_err(|e| config_error(format_args!("preset {name}: {e}")))?
    };
    if config.command != expected {
        return Err(config_error(format_args!(
            "config is for `{}`, not `{}`",
            config.command.as_str(),
            expected.as_str()
        )));
    }
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(format) = args.format {
        config.format = format;
    }
    if let Some(out) = &args.out {
        config.output = Some(out.display().to_string());
    }
    config.validate().map_err(config_error)?;
    Ok(config)
}

fn write_results(
    config: &ExperimentConfig,
    rows: &[output::ResultRow],
    wall_seconds: f64,
) -> std::io::Result<()> {
    let mut sink: Box<dyn Write> = match &config.output {
        Some(path) => Box::new(fs::File::create(path)?),
        None => Box::new(std::io::stdout().lock()),
    };
    match config.format {
        OutputFormat::Csv => output::write_csv(&mut sink, rows)?,
        OutputFormat::Json => output::write_json(&mut sink, config, rows, wall_seconds)?,
    }
    sink.flush()
}

fn run_command(args: &RunArgs, expected: CommandName) -> ExitCode {
    let config = match load_config(args, expected) {
        Ok(config) => config,
        Err(code) => return code,
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads.unwrap_or(0))
        .build()
    {
        Ok(pool) => pool,
        Err(e) => return config_error(format_args!("cannot build thread pool: {e}")),
    };
    let start = Instant::now();
    let rows = match pool.install(|| runner::run(&config)) {
        Ok(rows) => rows,
        Err(Error::Parameter(msg)) => return config_error(msg),
        Err(Error::Contract(msg)) => {
            eprintln!("runtime error: {msg}");
            return ExitCode::from(3);
        }
    };
    let wall = start.elapsed().as_secs_f64();
    if let Err(e) = write_results(&config, &rows, wall) {
        eprintln!("cannot write results: {e}");
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Presets => {
            for preset in presets::PRESETS {
                println!("{:32} {}", preset.name, preset.summary);
            }
            ExitCode::SUCCESS
        }
        command => {
            let args = match &cli.command {
                Command::Estimate(a)
                | Command::ScanLambda(a)
                | Command::LambdaC(a)
                | Command::Compare(a)
                | Command::VoronoiScan(a)
                | Command::CheckContraction(a) => a,
                Command::Presets => unreachable!(),
            };
            run_command(args, command.name())
        }
    }
}
