//! `nonrecip` — scenario driver for non-reciprocal bosonic mode networks.
//!
//! One subcommand per scenario; every physical parameter comes from a JSON
//! config (strict: unknown keys are rejected) with working defaults, so each
//! command also runs bare. Artifacts land in `--out` as CSV or JSON with a
//! full config + seed echo, written atomically. Exit codes: 0 success,
//! 2 invalid configuration, 3 numerical failure — with a machine-readable
//! JSON error on stderr.

mod artifact;
mod commands;
mod config;
mod error;
mod opexpr;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::{de::DeserializeOwned, Serialize};

use crate::artifact::{Ctx, Format};
use crate::config::CommonCfg;
use crate::error::CliError;

/// Seed used when neither `--seed` nor the config provides one.
const DEFAULT_SEED: u64 = 7;
/// Output directory used when neither `--out` nor the config provides one.
const DEFAULT_OUT: &str = "out";

#[derive(Parser)]
#[command(
    name = "nonrecip",
    version,
    about = "Non-reciprocal bosonic networks: ring spectra, directional scattering, \
             one-way master equations, feedforward equivalence, entanglement diagnostics"
)]
struct Cli {
    /// JSON config file (defaults apply when omitted).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory for artifacts [default: out].
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for randomized checks and trajectory ensembles [default: 7].
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Format of tabular artifacts (reports are always JSON).
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Also emit companion gnuplot scripts next to CSV tables.
    #[arg(long, global = true)]
    gnuplot: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Band energies of the flux-threaded three-site ring over a flux grid.
    Spectrum,
    /// S-matrix / Green's-function sweep with randomized identity and
    /// reciprocity checks.
    Scatter,
    /// Solve the directionality condition at probe frequencies and verify
    /// the blocked and open responses there.
    Tune,
    /// The tuned three-port circulator at ω = 0 (κ = 2t, Φ = π/2).
    RingDemo,
    /// Validate a modulated drive scheme against its rotating-wave
    /// description.
    Rwa,
    /// Compare the damped three-mode ring against the reduced two-mode
    /// model with the lossy mode adiabatically eliminated.
    Eliminate,
    /// Evolve a non-reciprocal master equation built from operator
    /// expressions.
    Meq,
    /// Measurement + feedforward protocol: unconditional generator, its
    /// directional equivalent, and a trajectory ensemble.
    Feedforward,
    /// LOCC negativity suite and the driven cascaded scenario.
    Entangle,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(written) => {
            for path in written {
                println!("wrote {}", path.display());
            }
        }
        Err(err) => {
            eprintln!("{}", err.to_json());
            std::process::exit(err.code);
        }
    }
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    init_threads()?;
    if cli.gnuplot && cli.format == Format::Json {
        return Err(CliError::config(
            "--gnuplot requires --format csv (the scripts plot the CSV artifacts)",
        ));
    }
    match cli.command {
        Command::Spectrum => dispatch(&cli, "spectrum", commands::spectrum::run),
        Command::Scatter => dispatch(&cli, "scatter", commands::scatter::run),
        Command::Tune => dispatch(&cli, "tune", commands::tune::run),
        Command::RingDemo => dispatch(&cli, "ring-demo", commands::ring_demo::run),
        Command::Rwa => dispatch(&cli, "rwa", commands::rwa::run),
        Command::Eliminate => dispatch(&cli, "eliminate", commands::eliminate::run),
        Command::Meq => dispatch(&cli, "meq", commands::meq::run),
        Command::Feedforward => dispatch(&cli, "feedforward", commands::feedforward::run),
        Command::Entangle => dispatch(&cli, "entangle", commands::entangle::run),
    }
}

/// Load the command's config, resolve out/seed (flag > config > default),
/// and run the command against a fresh artifact context.
fn dispatch<T, F>(cli: &Cli, name: &str, command: F) -> Result<Vec<PathBuf>, CliError>
where
    T: DeserializeOwned + Default + CommonCfg + Serialize,
    F: FnOnce(&mut Ctx, &T) -> Result<(), CliError>,
{
    let cfg: T = config::load(cli.config.as_deref(), name)?;
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.out().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let seed = cli.seed.or_else(|| cfg.seed()).unwrap_or(DEFAULT_SEED);
    let mut ctx = Ctx::new(name, &cfg, out, seed, cli.format, cli.gnuplot)?;
    command(&mut ctx, &cfg)?;
    Ok(ctx.written().to_vec())
}

/// Honor NONRECIP_THREADS by capping the global thread pool. Internal
/// parallelism (frequency sweeps, trajectory ensembles) runs on this pool.
fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("NONRECIP_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            CliError::config(format!(
                "NONRECIP_THREADS must be a positive integer, got {raw:?}"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::config(format!("initializing the thread pool: {e}")))
}
