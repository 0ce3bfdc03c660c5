//! `roysim`: equilibria, phase portraits, basins, policy experiments, sweeps,
//! the agent oracle and identified sets from one JSON config.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use roysim_core::Error;

use config::{Command, Preset, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "roysim", version, about = "Roy-model equilibria with composition preferences")]
#[command(after_help = "Exit codes: 0 ok, 2 bad input, 3 I/O failure, 4 model/data inconsistency.\n\
Flags override the config file, which overrides the preset. Set RUST_LOG=info for progress messages.")]
struct Cli {
    /// Subcommand; defaults to the config's `command` field.
    #[command(subcommand)]
    command: Option<Command>,

    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Bundled configuration, applied before --config.
    #[arg(long, global = true, value_enum)]
    preset: Option<Preset>,

    /// Output file (solve, enumerate, policy, sweep, oracle; default stdout) or
    /// directory (phase, basins, identify; default current directory).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Worker threads [default: all cores]. Results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Random seed for the oracle and simulated data [default: 0].
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Grid resolution [default: 64 for enumeration, 25 for phase, 50 for basins].
    #[arg(long, global = true, value_name = "N")]
    resolution: Option<usize>,

    /// Solver tolerance [default: 1e-10].
    #[arg(long, global = true, value_name = "X", allow_negative_numbers = true)]
    tol: Option<f64>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 3,
        Error::Inconsistent(_) | Error::InconsistentCorner(_) | Error::Convergence { .. } | Error::Integration { .. } => 4,
        _ => 2,
    }
}

fn merged(cli: &Cli) -> Result<(Command, RunConfig), Error> {
    let mut cfg = match (cli.preset, &cli.config) {
        (_, Some(path)) => {
            let file = RunConfig::load(path)?;
            match cli.preset {
                Some(p) => overlay(RunConfig::preset(p), file),
                None => file,
            }
        }
        (Some(p), None) => RunConfig::preset(p),
        (None, None) => RunConfig::default(),
    };
    cfg.command = cli.command.or(cfg.command);
    cfg.out = cli.out.clone().or(cfg.out);
    cfg.threads = cli.threads.or(cfg.threads);
    cfg.seed = cli.seed.or(cfg.seed);
    cfg.resolution = cli.resolution.or(cfg.resolution);
    cfg.tol = cli.tol.or(cfg.tol);
    let command = cfg.command.ok_or_else(|| Error::Argument("no subcommand given and the config has no command".into()))?;
    Ok((command, cfg))
}

/// Fields set in `top` replace those of `base`.
fn overlay(base: RunConfig, top: RunConfig) -> RunConfig {
    RunConfig {
        command: top.command.or(base.command),
        params: top.params.or(base.params),
        resolution: top.resolution.or(base.resolution),
        tol: top.tol.or(base.tol),
        seed: top.seed.or(base.seed),
        threads: top.threads.or(base.threads),
        out: top.out.or(base.out),
        policy: top.policy.or(base.policy),
        observed: top.observed.or(base.observed),
        sweep: top.sweep.or(base.sweep),
        oracle: top.oracle.or(base.oracle),
        identify: top.identify.or(base.identify),
        base_dir: top.base_dir,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = merged(&cli).and_then(|(command, cfg)| {
        if let Some(n) = cfg.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Error::Argument(format!("cannot start {n} threads: {e}")))?;
        }
        commands::run(command, &cfg)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("roysim: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
