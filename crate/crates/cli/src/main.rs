//! `dfs-sim`: batch front-end for simulations, sweeps, noise budgets,
//! pulse benchmarks and curve fits. Outputs are CSV/JSON files carrying
//! the resolved config and seed.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use dfs_core::analysis::DecayModel;

use commands::{Context, FitRequest};
use config::RunConfig;
use error::{CliError, CliResult};
use output::{Format, OutputDir};

#[derive(Parser)]
#[command(name = "dfs-sim", version, about = "Two-ion DFS clock-qubit memory simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration; defaults apply to absent keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, env = "DFS_SIM_OUT", default_value = "dfs-out")]
    out: PathBuf,

    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    format: Format,

    /// Monte Carlo trajectories per point (overrides the config).
    #[arg(long, global = true)]
    trajectories: Option<usize>,

    /// Shots per pulse-benchmark point (overrides the config).
    #[arg(long, global = true)]
    shots: Option<usize>,

    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parity and single-ion contrast curves plus a coherence fit.
    Simulate,
    /// Hopping-only coherence times over a (γ, T_φ, τ) grid.
    Sweep,
    /// Ranked coherence limits per noise mechanism.
    Budget,
    /// Accumulated population error of π-pulse trains.
    BenchPulses,
    /// Fit a decay model to a CSV curve.
    Fit(FitArgs),
    /// Print a complete configuration with every default filled in.
    ExampleConfig,
}

#[derive(clap::Args)]
struct FitArgs {
    /// CSV with `t` in the first column.
    #[arg(long)]
    input: PathBuf,

    #[arg(long, value_enum, default_value_t = ModelArg::Exponential)]
    model: ModelArg,

    /// Initial parameters, comma separated, in model order.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    guess: Vec<f64>,

    /// Parameters held at their guess, e.g. `A,c`; `none` frees all.
    #[arg(long, value_delimiter = ',')]
    fix: Vec<String>,

    /// Column holding the data (default: second).
    #[arg(long)]
    y_column: Option<String>,

    /// Column holding 1σ errors (default: third, if present).
    #[arg(long)]
    sigma_column: Option<String>,

    /// Weight every point by the RMS of the σ column.
    #[arg(long)]
    pooled_sigma: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Exponential,
    Gaussian,
    Cosine,
}

impl From<ModelArg> for DecayModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Exponential => DecayModel::Exponential,
            ModelArg::Gaussian => DecayModel::GaussianDecay,
            ModelArg::Cosine => DecayModel::Cosine,
        }
    }
}

fn resolve_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = Some(s);
    }
    if let Some(n) = cli.trajectories {
        cfg.trajectories = n;
    }
    if let Some(n) = cli.shots {
        cfg.bench.pulses.shots = n;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<()> {
    if let Command::ExampleConfig = cli.command {
        let cfg = RunConfig {
            seed: Some(1),
            ..RunConfig::default()
        };
        let text = serde_json::to_string_pretty(&cfg).map_err(|e| CliError::Other(e.to_string()))?;
        println!("{text}");
        return Ok(());
    }
    let out = OutputDir::create(&cli.out, cli.quiet)?;
    if let Command::Fit(args) = &cli.command {
        let req = FitRequest {
            input: args.input.clone(),
            model: args.model.into(),
            guess: args.guess.clone(),
            fix: args.fix.clone(),
            y_column: args.y_column.clone(),
            sigma_column: args.sigma_column.clone(),
            pooled_sigma: args.pooled_sigma,
        };
        let result = commands::fit(&req, &out)?;
        if !cli.quiet {
            for (i, name) in req.model.param_names().iter().enumerate() {
                eprintln!("{name} = {} ± {}", result.params[i], result.sigmas[i]);
            }
        }
        return Ok(());
    }
    let ctx = Context {
        cfg: resolve_config(&cli)?,
        out,
        format: cli.format,
        quiet: cli.quiet,
    };
    match cli.command {
        Command::Simulate => commands::simulate(&ctx),
        Command::Sweep => commands::sweep(&ctx),
        Command::Budget => commands::budget(&ctx),
        Command::BenchPulses => commands::bench_pulses(&ctx),
        Command::Fit(_) | Command::ExampleConfig => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dfs-sim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
