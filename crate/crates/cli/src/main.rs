//! `greyvar`: experiment runner for grey-value surface-area estimators.

mod commands;
mod config;
mod failure;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use greyvar_core::variance::with_workers;

use crate::commands::Parts;
use crate::config::{assign, parse_into, ExperimentConfig, RawConfig};
use crate::failure::Failure;
use crate::output::Outputs;

const CONFIG_HELP: &str = "\
Configuration is flat `key = value` text with dotted keys, read from --config
and then overridden by --set, GREYVAR_SEED, --seed and --replicates, in that
order. Keys and defaults:

  dim = 2                           2 or 3
  phantom.kind = ball               ball | half_space
  phantom.radius = 1
  phantom.normal = 1,0              half_space only
  phantom.offset = 0                half_space only: {x : x·normal <= offset}
  psf.kind = gaussian               gaussian | compact_bump | ball_indicator
  psf.sigma = 1                     gaussian
  psf.radius = 1                    compact_bump, ball_indicator
  weight.kind = indicator           indicator | smooth_plateau
  weight.lower = 0.3                grey interval [lower, upper]
  weight.upper = 0.7
  weight.rise_end = 0.3             smooth_plateau only
  weight.fall_start = 0.7           smooth_plateau only
  weight.amplitude = 1
  a = 0.05                          list `0.1,0.05` or `geometric(0.1,0.025,3)`
  b = a                             `a`, `a^2`, or a grid paired with every a
  lattice.matrix = 1,0,0,1          row-major basis, columns are basis vectors
  window.lo, window.hi              summation box; required for half_space
  radius_density.lower/.upper       randomly scale the ball by s on [lower, upper]
  replicates = 10000
  seed = 0
  output = greyvar-out              output directory
  fourier.xi = geometric(1,64,61)   dual-lattice norms for `fourier`
  fourier.regime = equal            equal | fine_lattice | coarse_lattice
  shells.cutoff = 5
  profile.points = 4097

Exit codes: 0 success, 1 I/O failure, 2 invalid configuration, 3 numerical
failure. Failures print one JSON record to stderr.";

/// Grey-value surface-area estimators on random lattices: estimates,
/// Fourier transforms and variance studies.
#[derive(Debug, Parser)]
#[command(name = "greyvar", version, after_long_help = CONFIG_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Configuration file of `key = value` lines.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Set one configuration key (repeatable), e.g. `--set psf.kind=compact_bump`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,

    /// Output directory; overrides the `output` key.
    #[arg(long, global = true, value_name = "DIR")]
    output: Option<PathBuf>,

    /// Random seed; overrides the `seed` key and GREYVAR_SEED.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte Carlo replicates; overrides the `replicates` key.
    #[arg(long, global = true)]
    replicates: Option<usize>,

    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Tabulate the half-space profile: profile.csv with t,theta_h,dtheta_h.
    Profile,
    /// Shells of the dual lattice up to shells.cutoff: shells.csv with norm,multiplicity.
    Shells,
    /// Monte Carlo surface estimate at one (a, b): estimate.json with mean, sd, n.
    Estimate,
    /// Ball transform of the weighted image against its leading-order model: fourier.csv.
    Fourier,
    /// Empirical variance over the (a, b) grid: mc-variance.csv and .json.
    McVariance,
    /// Exact lattice-sum and asymptotic variance over the grid: theory-variance.csv and .json.
    TheoryVariance,
    /// Empirical, exact and asymptotic variance with fitted slopes: scaling-study.csv and .json.
    ScalingStudy,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Profile => "profile",
            Command::Shells => "shells",
            Command::Estimate => "estimate",
            Command::Fourier => "fourier",
            Command::McVariance => "mc-variance",
            Command::TheoryVariance => "theory-variance",
            Command::ScalingStudy => "scaling-study",
        }
    }
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let mut raw = RawConfig::new();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::usage("config", format!("{}: {e}", path.display())))?;
        parse_into(&mut raw, &text)?;
    }
    for item in &cli.set {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Failure::usage("set", format!("expected KEY=VALUE, got `{item}`")))?;
        assign(&mut raw, k.trim(), v.trim())?;
    }
    if let Ok(seed) = std::env::var("GREYVAR_SEED") {
        assign(&mut raw, "seed", seed.trim())?;
    }
    if let Some(seed) = cli.seed {
        assign(&mut raw, "seed", &seed.to_string())?;
    }
    if let Some(n) = cli.replicates {
        assign(&mut raw, "replicates", &n.to_string())?;
    }
    if let Some(dir) = &cli.output {
        assign(&mut raw, "output", &dir.display().to_string())?;
    }
    ExperimentConfig::from_raw(&raw)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if cli.workers == 0 {
        return Err(Failure::usage("workers", "need at least one worker"));
    }
    let config = resolve(cli)?;
    if cli.print_config {
        print!("{}", config.to_text());
        return Ok(());
    }
    let started = Instant::now();
    let mut out = Outputs::create(&config.output)?;
    let command = cli.command;
    log::info!(
        "{} with {} worker(s), writing to {}",
        command.name(),
        cli.workers,
        config.output.display()
    );
    let summary = with_workers(cli.workers, || match command {
        Command::Profile => commands::profile(&config, &mut out),
        Command::Shells => commands::shells(&config, &mut out),
        Command::Estimate => commands::estimate(&config, &mut out),
        Command::Fourier => commands::fourier(&config, &mut out),
        Command::McVariance => commands::variance(
            &config,
            &mut out,
            "mc-variance",
            Parts {
                empirical: true,
                theory: false,
            },
        ),
        Command::TheoryVariance => commands::variance(
            &config,
            &mut out,
            "theory-variance",
            Parts {
                empirical: false,
                theory: true,
            },
        ),
        Command::ScalingStudy => commands::variance(
            &config,
            &mut out,
            "scaling-study",
            Parts {
                empirical: true,
                theory: true,
            },
        ),
    })??;
    let manifest = json!({
        "tool": "greyvar",
        "version": greyvar_core::VERSION,
        "subcommand": command.name(),
        "seed": config.seed,
        "workers": cli.workers,
        "wall_time_seconds": started.elapsed().as_secs_f64(),
        "config": config.to_raw(),
        "outputs": out.files(),
        "summary": summary,
    });
    log::info!("done in {:.3} s", started.elapsed().as_secs_f64());
    out.json("manifest.json", &manifest)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(f.code)
        }
    }
}
