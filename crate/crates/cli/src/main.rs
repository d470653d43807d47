//! `trust-regions`: config-driven runner for the trust-region solvers.

mod artifacts;
mod config;
mod runner;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use runner::{load_config, run_task, subcommand_accepts, CheckFailed, RunContext};

const CSV_HELP: &str = "\
CSV schemas (columns are stable across versions; '.' decimal, ',' separator, LF):
  binary_trust.csv    alpha,lo,hi,cutoff
  sweep.csv           alpha,lo,hi,cutoff        (binary-trust sweeps)
  sweep.csv           alpha,r_star,residual     (spherical sweeps)

Config tasks per subcommand:
  solve    binary-trust | binary-action | mva | spherical
  sweep    sweep (binary-trust with `alphas`, or spherical with `spherical`)
  oracle   oracle (requires `game_file`)
  verify   verify-tre (fresh end-to-end check) | verify-bundle (re-check artifacts)

Exit status: 0 success, 1 verification check failed, 2 validation error,
3 solver error. Logging via TRUST_REGION_LOG={error,info,debug}.";

#[derive(Parser)]
#[command(
    name = "trust-regions",
    version,
    about = "Robust advice-taking: trust intervals, certifying adversaries, alignment thresholds, and a saddle oracle",
    after_long_help = CSV_HELP
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve a single instance described by a config document.
    Solve(CommonArgs),
    /// Solve an alignment grid and emit a CSV table.
    Sweep(CommonArgs),
    /// Verify a solution: fresh end-to-end (verify-tre) or a bundle re-check.
    Verify(CommonArgs),
    /// Solve a finite advice game from a game JSON document.
    Oracle(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Directory for emitted artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Concurrent sweep workers.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Seed for randomized audits (config `seed` wins if both are set).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Verification tolerance override (defaults differ per check).
    #[arg(long)]
    tolerance: Option<f64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TRUST_REGION_LOG", "error"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let (name, args) = match &cli.cmd {
        Cmd::Solve(a) => ("solve", a),
        Cmd::Sweep(a) => ("sweep", a),
        Cmd::Verify(a) => ("verify", a),
        Cmd::Oracle(a) => ("oracle", a),
    };
    match run(name, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err))
        }
    }
}

fn run(subcommand: &str, args: &CommonArgs) -> anyhow::Result<()> {
    let cfg = load_config(&args.config)?;
    if !subcommand_accepts(cfg.task, subcommand) {
        anyhow::bail!(
            "config field `task`: {} is not runnable under `{subcommand}` (see --help)",
            cfg.task
        );
    }
    let ctx = RunContext {
        out: args.out.clone(),
        jobs: args.jobs,
        seed: args.seed,
        tolerance: args.tolerance,
    };
    run_task(&cfg, &ctx)
}

/// Exit status taxonomy: failed verification checks are 1, solver
/// breakdowns are 3, everything else (bad config, bad files, bad inputs)
/// is a validation error 2.
fn classify(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<CheckFailed>().is_some() {
            return 1;
        }
        if let Some(core) = cause.downcast_ref::<trust_core::Error>() {
            return match core {
                trust_core::Error::NoConvergence { .. } | trust_core::Error::Internal(_) => 3,
                _ => 2,
            };
        }
    }
    2
}
