//! Task dispatch and artifact emission.

use std::fmt;
use std::path::{Path, PathBuf};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use trust_core::binary_action::{rationalizing_adversary, solve_binary_action};
use trust_core::binary_trust::solve_trust_interval;
use trust_core::bregman::{worst_case_report, TrustRegion};
use trust_core::game::{solve_saddle, verify_trs_structure};
use trust_core::mva::solve_mva;
use trust_core::spherical::solve_radius;
use trust_core::transport::{build_tre_map, verify_posterior_consistency, Regime};
use trust_core::{FiniteGame, UtilityCurve};

use crate::artifacts::{
    self, fmt_real, map_artifact, write_csv, write_json, BinaryActionArtifact, BinaryTrustArtifact,
    MvaArtifact, OracleArtifact, SideAudit, SphericalArtifact, SweepArtifact, SweepRow,
    TreArtifact,
};
use crate::config::{default_schema_version, ExperimentConfig, Task};

/// A verification check that ran and failed: maps to exit status 1 rather
/// than a validation or solver error.
#[derive(Debug)]
pub struct CheckFailed(pub String);

impl fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "verification failed: {}", self.0)
    }
}

impl std::error::Error for CheckFailed {}

pub struct RunContext {
    pub out: PathBuf,
    pub jobs: usize,
    pub seed: u64,
    pub tolerance: Option<f64>,
}

fn need<'a, T>(opt: &'a Option<T>, field: &str, task: Task) -> anyhow::Result<&'a T> {
    opt.as_ref()
        .ok_or_else(|| anyhow::anyhow!("task {task} requires the `{field}` field"))
}

pub fn run_task(cfg: &ExperimentConfig, ctx: &RunContext) -> anyhow::Result<()> {
    log::info!("dispatching task {}", cfg.task);
    match cfg.task {
        Task::BinaryTrust => binary_trust(cfg, ctx),
        Task::Sweep => sweep(cfg, ctx),
        Task::BinaryAction => binary_action(cfg, ctx),
        Task::Mva => mva(cfg, ctx),
        Task::Spherical => spherical(cfg, ctx),
        Task::Oracle => oracle(cfg, ctx),
        Task::VerifyTre => verify_tre(cfg, ctx),
        Task::VerifyBundle => {
            let dir = need(&cfg.bundle, "bundle", cfg.task)?;
            crate::verify::run_bundle(dir, ctx.tolerance)
        }
    }
}

fn binary_trust(cfg: &ExperimentConfig, ctx: &RunContext) -> anyhow::Result<()> {
    let utility = need(&cfg.utility, "utility", cfg.task)?;
    let tau_spec = need(&cfg.tau, "tau", cfg.task)?;
    let alpha = need(&cfg.alpha, "alpha", cfg.task)?.0;
    let u = utility.build()?;
    let tau = tau_spec.build()?;
    let interval = solve_trust_interval(&u, &tau, alpha)?;
    println!(
        "binary-trust alpha={} -> [{}, {}] cutoff={} residuals=({:.2e}, {:.2e})",
        fmt_real(alpha),
        fmt_real(interval.lo),
        fmt_real(interval.hi),
        fmt_real(interval.cutoff),
        interval.residuals.0,
        interval.residuals.1
    );
    write_csv(
        &ctx.out,
        "binary_trust.csv",
        "alpha,lo,hi,cutoff",
        &[vec![alpha, interval.lo, interval.hi, interval.cutoff]],
    )?;
    write_json(
        &ctx.out,
        "binary_trust.json",
        &BinaryTrustArtifact {
            schema_version: default_schema_version(),
            task: cfg.task.to_string(),
            utility: utility.clone(),
            tau: tau_spec.clone(),
            alpha,
            interval,
        },
    )?;
    Ok(())
}

/// Runs `f` over the items on up to `jobs` threads, preserving order.
fn parallel_map<T, R, F>(items: Vec<T>, jobs: usize, f: F) -> anyhow::Result<Vec<R>>
where
    T: Send,
    R: Send,
    F: Fn(T) -> anyhow::Result<R> + Sync,
{
    let jobs = jobs.max(1);
    if jobs == 1 || items.len() <= 1 {
        return items.into_iter().map(f).collect();
    }
    let chunk_size = items.len().div_ceil(jobs);
    let chunks: Vec<Vec<T>> = {
        let mut chunks = Vec::new();
        let mut it = items.into_iter();
        loop {
            let chunk: Vec<T> = it.by_ref().take(chunk_size).collect();
            if chunk.is_empty() {
                break;
            }
            chunks.push(chunk);
        }
        chunks
    };
    let results: Vec<anyhow::Result<Vec<R>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|chunk| scope.spawn(|| chunk.into_iter().map(&f).collect()))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

fn sweep(cfg: &ExperimentConfig, ctx: &RunContext) -> anyhow::Result<()> {
    let alphas: Vec<f64> = need(&cfg.alphas, "alphas", cfg.task)?
        .iter()
        .map(|r| r.0)
        .collect();
    if alphas.is_empty() {
        anyhow::bail!("sweep needs a nonempty `alphas` grid");
    }
    if let Some(spec) = &cfg.spherical {
        let inst = spec.build()?;
        let rows = parallel_map(alphas, ctx.jobs, |alpha| {
            let r = solve_radius(&inst, alpha)?;
            let residual = if alpha > 0.5 {
                inst.balance_residual(alpha, r)?
            } else {
                0.0
            };
            Ok(vec![alpha, r, residual])
        })?;
        let path = write_csv(&ctx.out, "sweep.csv", "alpha,r_star,residual", &rows)?;
        println!(
            "sweep spherical: {} alphas -> {}",
            rows.len(),
            path.display()
        );
        write_json(
            &ctx.out,
            "sweep.json",
            &SweepArtifact {
                schema_version: default_schema_version(),
                task: cfg.task.to_string(),
                utility: None,
                tau: None,
                spherical: Some(spec.clone()),
                rows: rows
                    .iter()
                    .map(|r| SweepRow::Radius {
                        alpha: r[0],
                        r_star: r[1],
                        residual: r[2],
                    })
                    .collect(),
            },
        )?;
        return Ok(());
    }
    let utility = need(&cfg.utility, "utility", cfg.task)?;
    let tau_spec = need(&cfg.tau, "tau", cfg.task)?;
    let u = utility.build()?;
    let tau = tau_spec.build()?;
    let rows = parallel_map(alphas, ctx.jobs, |alpha| {
        let t = solve_trust_interval(&u, &tau, alpha)?;
        Ok(vec![alpha, t.lo, t.hi, t.cutoff])
    })?;
    let path = write_csv(&ctx.out, "sweep.csv", "alpha,lo,hi,cutoff", &rows)?;
    println!(
        "sweep binary-trust: {} alphas -> {}",
        rows.len(),
        path.display()
    );
    write_json(
        &ctx.out,
        "sweep.json",
        &SweepArtifact {
            schema_version: default_schema_version(),
            task: cfg.task.to_string(),
            utility: Some(utility.clone()),
            tau: Some(tau_spec.clone()),
            spherical: None,
            rows: rows
                .iter()
                .map(|r| SweepRow::Interval {
                    alpha: r[0],
                    lo: r[1],
                    hi: r[2],
                    cutoff: r[3],
                })
                .collect(),
        },
    )?;
    Ok(())
}

fn binary_action(cfg: &ExperimentConfig, ctx: &RunContext) -> anyhow::Result<()> {
    let vdist_spec = need(&cfg.vdist, "vdist", cfg.task)?;
    let alpha = need(&cfg.alpha, "alpha", cfg.task)?.0;
    let dist = vdist_spec.build()?;
    let solution = solve_binary_action(&dist, alpha)?;
    let kernels = if alpha > 0.0 {
        rationalizing_adversary(&dist, alpha)?
    } else {
        Vec::new()
    };
    println!(
        "binary-action alpha={} L={} G={} alpha_hat={} regime={:?} value={}",
        fmt_real(alpha),
        fmt_real(solution.l),
        fmt_real(solution.g),
        fmt_real(solution.alpha_hat),
        solution.regime,
        fmt_real(solution.value)
    );
    write_json(
        &ctx.out,
        "binary_action.json",
        &BinaryActionArtifact {
            schema_version: default_schema_version(),
            task: cfg.task.to_string(),
            vdist: vdist_spec.clone(),
            alpha,
            solution,
            kernels,
        },
    )?;
    Ok(())
}

fn mva(cfg: &ExperimentConfig, ctx: &RunContext) -> anyhow::Result<()> {
    let pi = cfg.signal_matrix()?;
    let solution = solve_mva(&pi)?;
    println!(
        "mva {}x{} rank={} -> alpha_star={}",
        pi.n_states(),
        pi.n_signals(),
        solution.rank,
        fmt_real(solution.alpha_star)
    );
    write_json(
        &ctx.out,
        "mva.json",
        &MvaArtifact {
            schema_version: default_schema_version(),
            task: cfg.task.to_string(),
            matrix: pi.rows().to_vec(),
            solution,
        },
    )?;
    Ok(())
}

fn spherical(cfg: &ExperimentConfig, ctx: &RunContext) -> anyhow::Result<()> {
    let spec = need(&cfg.spherical, "spherical", cfg.task)?;
    let alpha = need(&cfg.alpha, "alpha", cfg.task)?.0;
    let inst = spec.build()?;
    let r_star = solve_radius(&inst, alpha)?;
    let residual = if alpha > 0.5 {
        inst.balance_residual(alpha, r_star)?
    } else {
        0.0
    };
    println!(
        "spherical alpha={} -> r_star={} (residual {:.2e})",
        fmt_real(alpha),
        fmt_real(r_star),
        residual
    );
    write_json(
        &ctx.out,
        "spherical.json",
        &SphericalArtifact {
            schema_version: default_schema_version(),
            task: cfg.task.to_string(),
            spherical: spec.clone(),
            alpha,
            r_star,
            residual,
        },
    )?;
    Ok(())
}

fn oracle(cfg: &ExperimentConfig, ctx: &RunContext) -> anyhow::Result<()> {
    let path = need(&cfg.game_file, "game_file", cfg.task)?;
    let game: FiniteGame = artifacts::read_json(path)?;
    let solution = solve_saddle(&game)?;
    let curve: Option<UtilityCurve> = match &cfg.utility {
        Some(spec) if game.n_states() == 2 => Some(spec.build()?),
        _ => None,
    };
    let structure = verify_trs_structure(&game, &solution, curve.as_ref())?;
    println!(
        "oracle {} messages, {} actions: value={} exploitability=({:.2e}, {:.2e}) structure={}",
        game.n_messages(),
        game.n_actions(),
        fmt_real(solution.value),
        solution.exploitability.0,
        solution.exploitability.1,
        if structure.all_pass { "pass" } else { "FAIL" }
    );
    let all_pass = structure.all_pass;
    write_json(
        &ctx.out,
        "oracle.json",
        &OracleArtifact {
            schema_version: default_schema_version(),
            task: cfg.task.to_string(),
            game: game.clone().into(),
            solution,
            structure,
        },
    )?;
    if !all_pass {
        return Err(CheckFailed("oracle structure verification failed".into()).into());
    }
    Ok(())
}

fn verify_tre(cfg: &ExperimentConfig, ctx: &RunContext) -> anyhow::Result<()> {
    let utility = need(&cfg.utility, "utility", cfg.task)?;
    let tau_spec = need(&cfg.tau, "tau", cfg.task)?;
    let alpha = need(&cfg.alpha, "alpha", cfg.task)?.0;
    let n_cells = cfg.n_cells.unwrap_or(200);
    let n_samples = cfg.n_samples.unwrap_or(64);
    let u = utility.build()?;
    let tau = tau_spec.build()?;
    let interval = solve_trust_interval(&u, &tau, alpha)?;
    let map = build_tre_map(&u, &tau, alpha, &interval)?;
    let report = verify_posterior_consistency(&map, &tau, alpha, &interval, n_cells)?;

    // Seeded audit: sampled beliefs must emit messages on the same side as
    // the worst-case report (only meaningful for a nondegenerate interval).
    let seed = cfg.seed.unwrap_or(ctx.seed);
    let mut mismatches = 0usize;
    let mut samples = 0usize;
    if matches!(map.regime, Regime::HighAlpha { .. }) {
        let region = TrustRegion::interval(interval.lo, interval.hi)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while samples < n_samples {
            let mu: f64 = rng.random();
            if (mu - interval.cutoff).abs() < 1e-9 {
                continue;
            }
            samples += 1;
            let msg = map.report(mu)?;
            let induced = if msg >= interval.hi {
                interval.hi
            } else {
                interval.lo
            };
            if induced != worst_case_report(&u, &region, mu)? {
                mismatches += 1;
            }
        }
    }

    let tol = ctx.tolerance.unwrap_or(1e-6);
    println!(
        "verify-tre alpha={} cells={} max_deviation={:.3e} (tolerance {:.1e}) side_audit={}/{}",
        fmt_real(alpha),
        report.cells.len(),
        report.max_deviation,
        tol,
        samples - mismatches,
        samples
    );
    let max_deviation = report.max_deviation;
    write_json(
        &ctx.out,
        "tre_verification.json",
        &TreArtifact {
            schema_version: default_schema_version(),
            task: cfg.task.to_string(),
            utility: utility.clone(),
            tau: tau_spec.clone(),
            alpha,
            interval,
            map: map_artifact(&map, 33),
            report,
            side_audit: SideAudit {
                seed,
                samples,
                mismatches,
            },
        },
    )?;
    if max_deviation > tol {
        return Err(CheckFailed(format!(
            "posterior-consistency deviation {max_deviation:.3e} exceeds {tol:.1e}"
        ))
        .into());
    }
    if mismatches > 0 {
        return Err(CheckFailed(format!(
            "{mismatches} sampled beliefs sent messages on the wrong side"
        ))
        .into());
    }
    Ok(())
}

pub fn subcommand_accepts(task: Task, subcommand: &str) -> bool {
    matches!(
        (subcommand, task),
        ("solve", Task::BinaryTrust)
            | ("solve", Task::BinaryAction)
            | ("solve", Task::Mva)
            | ("solve", Task::Spherical)
            | ("sweep", Task::Sweep)
            | ("oracle", Task::Oracle)
            | ("verify", Task::VerifyTre)
            | ("verify", Task::VerifyBundle)
    )
}

pub fn load_config(path: &Path) -> anyhow::Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("reading config {}: {e}", path.display()))?;
    let cfg = crate::config::parse_config(&text)?;
    if cfg.schema_version != default_schema_version() {
        anyhow::bail!(
            "config schema_version {} unsupported (expected {})",
            cfg.schema_version,
            default_schema_version()
        );
    }
    if let Some(alpha) = &cfg.alpha {
        if !(0.0..=1.0).contains(&alpha.0) {
            anyhow::bail!("config field `alpha`: {} outside [0, 1]", alpha.0);
        }
    }
    if let Some(alphas) = &cfg.alphas {
        if let Some(bad) = alphas.iter().find(|a| !(0.0..=1.0).contains(&a.0)) {
            anyhow::bail!("config field `alphas`: {} outside [0, 1]", bad.0);
        }
    }
    for (field, path) in [
        ("matrix_csv", &cfg.matrix_csv),
        ("game_file", &cfg.game_file),
    ] {
        if let Some(p) = path {
            if !p.exists() {
                anyhow::bail!("config field `{field}`: {} does not exist", p.display());
            }
        }
    }
    Ok(cfg)
}
