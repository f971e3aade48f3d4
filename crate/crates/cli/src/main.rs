mod commands;
mod config;
mod error;
mod output;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mems_liquid::FluidMedium;

use crate::commands::Context;
use crate::config::{load_config, parse_config, Format, DEFAULT_CONFIG};
use crate::error::{CliError, Result};
use crate::output::Sink;

/// Electrostatic parallel-plate actuators in air and liquids.
#[derive(Debug, Parser)]
#[command(name = "mems-liquid", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration (defaults to the reference cantilever).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output file, or the output directory for reproduce-paper.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// csv or json.
    #[arg(long, global = true, value_name = "FORMAT")]
    format: Option<Format>,

    /// Fluid preset overriding the config: vacuum, air, ipa, tap-water.
    #[arg(long, global = true, value_name = "NAME")]
    fluid: Option<String>,

    /// Add squeeze-film damping.
    #[arg(long, global = true)]
    squeeze_film: bool,

    /// Sweep resolution, overriding the config.
    #[arg(long, global = true, value_name = "N")]
    points: Option<usize>,

    /// Suppress summaries and warnings.
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Whether the plate can travel the whole gap without pull-in.
    CheckStability,
    /// Displacement against DC voltage.
    StaticSweep,
    /// Pull-in displacement and voltage.
    PullIn,
    /// Resonance, effective mass, damping and Q in the configured fluid.
    Dynamics,
    /// Steady-state amplitude and phase against frequency.
    FreqResponse,
    /// Time-domain response to the configured drive.
    Transient,
    /// Recompute the reference table and figure data and check them.
    ReproducePaper,
    /// Potential-energy grid scan for cross-checking the static solver.
    #[command(hide = true)]
    Oracle {
        #[arg(long)]
        voltage: Option<f64>,
    },
}

fn run(cli: Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(path) => load_config(path)?,
        None => parse_config(DEFAULT_CONFIG)?,
    };
    if let Some(name) = &cli.fluid {
        config.fluid = FluidMedium::preset(name)?;
    }
    if cli.squeeze_film {
        config.solver.squeeze.enabled = true;
    }
    if cli.points == Some(0) {
        return Err(CliError::Usage("--points must be positive".into()));
    }

    let out = cli.out.clone().or_else(|| config.output.path.clone());
    let format = cli
        .format
        .or(config.output.format)
        .or_else(|| match out.as_ref()?.extension()?.to_str()? {
            "json" => Some(Format::Json),
            _ => None,
        })
        .unwrap_or_default();
    let reproduce_dir = matches!(cli.command, Command::ReproducePaper)
        .then(|| out.clone().unwrap_or_else(|| PathBuf::from("paper-output")));
    let ctx = Context {
        config,
        format,
        sink: out.map_or(Sink::Stdout, Sink::File),
        quiet: cli.quiet,
        points: cli.points,
    };

    match cli.command {
        Command::CheckStability => commands::check_stability(&ctx),
        Command::StaticSweep => commands::static_sweep_cmd(&ctx),
        Command::PullIn => commands::pull_in(&ctx),
        Command::Dynamics => commands::dynamics(&ctx),
        Command::FreqResponse => commands::freq_response(&ctx),
        Command::Transient => commands::transient(&ctx),
        Command::ReproducePaper => commands::reproduce(&ctx, reproduce_dir.expect("set above")),
        Command::Oracle { voltage } => commands::oracle(&ctx, voltage),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
