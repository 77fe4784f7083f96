mod config;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use stages::Settings;

/// Calibrate a synthetic grid case, synthesize hourly profiles, run the
/// rolling-horizon dispatch, upgrade congested lines and compare energy.
#[derive(Debug, Parser)]
#[command(name = "gridsynth", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Run config (TOML)
    #[arg(long, global = true, env = "GRIDSYNTH_CONFIG")]
    config: Option<PathBuf>,
    /// Seed for stochastic imputation
    #[arg(long, global = true, env = "GRIDSYNTH_SEED")]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true, env = "GRIDSYNTH_OUT")]
    out: Option<PathBuf>,
    /// Simulate only the first K windows
    #[arg(long, value_name = "K", global = true, env = "GRIDSYNTH_WINDOWS")]
    windows: Option<usize>,
    /// Hours per dispatch window
    #[arg(long, value_name = "W", global = true, env = "GRIDSYNTH_WINDOW_HOURS")]
    window_hours: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Scale and re-price the raw case to capacity and price targets
    Build,
    /// Clean zonal demand and convert weather series to unit availability
    Profiles,
    /// Run the rolling-horizon dispatch over the synthesized profiles
    Simulate {
        /// Case directory to simulate (default: <out>/case)
        #[arg(long)]
        case: Option<PathBuf>,
    },
    /// Raise line capacities until congestion targets hold
    Upgrade {
        /// Case directory to upgrade (default: <out>/case)
        #[arg(long)]
        case: Option<PathBuf>,
    },
    /// Compare simulated with historical energy and revise costs
    Report,
}

impl Command {
    fn stage(&self) -> &'static str {
        match self {
            Command::Build => "build",
            Command::Profiles => "profiles",
            Command::Simulate { .. } => "simulate",
            Command::Upgrade { .. } => "upgrade",
            Command::Report => "report",
        }
    }
}

fn settings(args: &GlobalArgs) -> Result<Settings> {
    let config = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    config.check_paths()?;
    let out = args
        .out
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok(Settings {
        seed: args.seed.or(config.seed).unwrap_or(0),
        windows: args.windows.or(config.simulate.windows),
        window_hours: stages::window_hours(&config, args.window_hours),
        out,
        config,
    })
}

fn run(cli: &Cli) -> Result<()> {
    let s = settings(&cli.global).context("config")?;
    match &cli.command {
        Command::Build => stages::build(&s),
        Command::Profiles => stages::profiles(&s),
        Command::Simulate { case } => stages::simulate(&s, case.as_deref()),
        Command::Upgrade { case } => stages::upgrade(&s, case.as_deref()),
        Command::Report => stages::report(&s),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error in {}: {e:#}", cli.command.stage());
            ExitCode::FAILURE
        }
    }
}
