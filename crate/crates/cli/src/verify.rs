//! Bundle verification: re-load emitted artifacts and re-run every
//! certificate check against freshly recomputed ground truth.

use std::path::Path;

use trust_core::binary_action::{posterior_relative_payoffs, solve_binary_action, TrustVerdict};
use trust_core::binary_trust::{psi_residuals, solve_trust_interval};
use trust_core::game::{certify_pair, verify_trs_structure};
use trust_core::transport::{build_tre_map, verify_posterior_consistency};
use trust_core::{FiniteGame, SignalMatrix};

use crate::artifacts::{
    read_json, BinaryActionArtifact, BinaryTrustArtifact, MvaArtifact, OracleArtifact,
    SphericalArtifact, TreArtifact,
};
use crate::runner::CheckFailed;

struct Report {
    lines: Vec<(String, f64, bool)>,
}

impl Report {
    fn new() -> Self {
        Report { lines: Vec::new() }
    }

    fn check(&mut self, name: impl Into<String>, margin: f64, bound: f64) {
        let name = name.into();
        self.lines.push((name, margin, margin.abs() <= bound));
    }

    fn check_flag(&mut self, name: impl Into<String>, pass: bool) {
        self.lines
            .push((name.into(), if pass { 0.0 } else { 1.0 }, pass));
    }
}

/// Verifies every artifact found in `dir`. Missing artifacts entirely is a
/// validation error (exit 2); failed checks map to exit 1.
pub fn run_bundle(dir: &Path, tolerance: Option<f64>) -> anyhow::Result<()> {
    if !dir.is_dir() {
        anyhow::bail!("bundle {} is not a directory", dir.display());
    }
    let tol = tolerance.unwrap_or(1e-9);
    let mut report = Report::new();
    let mut found = 0usize;

    let bt = dir.join("binary_trust.json");
    if bt.exists() {
        found += 1;
        verify_binary_trust(&read_json(&bt)?, tol, &mut report)?;
    }
    let tre = dir.join("tre_verification.json");
    if tre.exists() {
        found += 1;
        verify_tre_artifact(&read_json(&tre)?, &mut report)?;
    }
    let mva = dir.join("mva.json");
    if mva.exists() {
        found += 1;
        verify_mva(&read_json(&mva)?, &mut report)?;
    }
    let ba = dir.join("binary_action.json");
    if ba.exists() {
        found += 1;
        verify_binary_action(&read_json(&ba)?, &mut report)?;
    }
    let sph = dir.join("spherical.json");
    if sph.exists() {
        found += 1;
        verify_spherical(&read_json(&sph)?, &mut report)?;
    }
    let orc = dir.join("oracle.json");
    if orc.exists() {
        found += 1;
        verify_oracle(&read_json(&orc)?, &mut report)?;
    }
    let sweep = dir.join("sweep.csv");
    if sweep.exists() {
        found += 1;
        verify_sweep_csv(&sweep, &mut report)?;
    }

    if found == 0 {
        anyhow::bail!("bundle {} contains no recognized artifacts", dir.display());
    }
    let mut failures = 0usize;
    for (name, margin, pass) in &report.lines {
        println!(
            "verify {name}: margin {margin:.3e} {}",
            if *pass { "pass" } else { "FAIL" }
        );
        if !pass {
            failures += 1;
        }
    }
    println!(
        "verify: {found} artifact(s), {} check(s), {failures} failure(s)",
        report.lines.len()
    );
    if failures > 0 {
        return Err(CheckFailed(format!("{failures} bundle check(s) failed")).into());
    }
    Ok(())
}

fn verify_binary_trust(
    art: &BinaryTrustArtifact,
    tol: f64,
    report: &mut Report,
) -> anyhow::Result<()> {
    let u = art.utility.build()?;
    let tau = art.tau.build()?;
    let t = &art.interval;
    let order_violation = [
        -t.lo,
        t.lo - t.prior,
        t.prior - t.hi,
        t.hi - 1.0,
        t.lo - t.cutoff,
        t.cutoff - t.hi,
    ]
    .into_iter()
    .fold(f64::NEG_INFINITY, f64::max)
    .max(0.0);
    report.check("binary_trust interval-order", order_violation, 1e-12);
    if art.alpha > 0.5 {
        let (p1, p2) = psi_residuals(&u, &tau, art.alpha, t.lo, t.hi)?;
        report.check("binary_trust residual-psi1", p1, tol.max(1e-9));
        report.check("binary_trust residual-psi2", p2, tol.max(1e-9));
    } else {
        report.check(
            "binary_trust degenerate-at-prior",
            (t.lo - t.prior).abs().max((t.hi - t.prior).abs()),
            1e-12,
        );
    }
    // Pushforward check: a map certified for the true interval must agree
    // with the artifact's claimed interval.
    if art.alpha > 0.0 && art.alpha < 1.0 {
        let fresh = solve_trust_interval(&u, &tau, art.alpha)?;
        let map = build_tre_map(&u, &tau, art.alpha, &fresh)?;
        let consistency = verify_posterior_consistency(&map, &tau, art.alpha, t, 200)?;
        report.check("binary_trust pushforward", consistency.max_deviation, 1e-6);
    }
    Ok(())
}

fn verify_tre_artifact(art: &TreArtifact, report: &mut Report) -> anyhow::Result<()> {
    let u = art.utility.build()?;
    let tau = art.tau.build()?;
    report.check("tre stored-max-deviation", art.report.max_deviation, 1e-6);
    let map = build_tre_map(&u, &tau, art.alpha, &art.interval)?;
    let fresh = verify_posterior_consistency(&map, &tau, art.alpha, &art.interval, 200)?;
    report.check("tre recomputed-deviation", fresh.max_deviation, 1e-6);
    report.check_flag("tre side-audit", art.side_audit.mismatches == 0);
    Ok(())
}

fn verify_mva(art: &MvaArtifact, report: &mut Report) -> anyhow::Result<()> {
    let pi = SignalMatrix::new(art.matrix.clone())?;
    let sol = &art.solution;
    let k = pi.n_signals();
    let mut violation = 0.0_f64;
    for (i, row) in sol.garbling.iter().enumerate() {
        let sum: f64 = row.iter().sum();
        violation = violation.max((sum - 1.0).abs());
        violation = violation.max(-row.iter().cloned().fold(f64::INFINITY, f64::min));
        violation = violation.max(sol.alpha_star - row[i]);
    }
    for drow in &sol.row_difference {
        for j in 0..k {
            let v: f64 = (0..k).map(|l| drow[l] * sol.garbling[l][j]).sum();
            violation = violation.max(v.abs());
        }
    }
    report.check("mva garbling-constraints", violation.max(0.0), 1e-8);
    // Blackwell uninformativeness: all rows of Pi G equal.
    let pg: Vec<Vec<f64>> = pi
        .rows()
        .iter()
        .map(|row| {
            (0..k)
                .map(|j| (0..k).map(|l| row[l] * sol.garbling[l][j]).sum())
                .collect()
        })
        .collect();
    let mut spread = 0.0_f64;
    for row in &pg[1..] {
        for j in 0..k {
            spread = spread.max((row[j] - pg[0][j]).abs());
        }
    }
    report.check("mva uninformative-rows", spread, 1e-8);
    if sol.rank >= 2 {
        let lower = 1.0 / sol.rank as f64 - 1e-9;
        report.check_flag(
            "mva bound-sandwich",
            sol.alpha_star >= lower && sol.alpha_star <= 0.5 + 1e-9,
        );
    }
    Ok(())
}

fn verify_binary_action(art: &BinaryActionArtifact, report: &mut Report) -> anyhow::Result<()> {
    let dist = art.vdist.build()?;
    let fresh = solve_binary_action(&dist, art.alpha)?;
    report.check(
        "binary_action threshold",
        fresh.alpha_hat - art.solution.alpha_hat,
        1e-12,
    );
    report.check(
        "binary_action value",
        fresh.value - art.solution.value,
        1e-12,
    );
    report.check_flag("binary_action regime", fresh.regime == art.solution.regime);
    for kernel in &art.kernels {
        if kernel.transition.is_none() {
            continue;
        }
        let payoffs = posterior_relative_payoffs(&dist, art.alpha, kernel)?;
        let ok = match (art.solution.regime, kernel.kind) {
            (TrustVerdict::FullTrust, _)
            | (TrustVerdict::BoundaryBoth, trust_core::binary_action::KernelKind::FullTrust) => {
                payoffs
                    .iter()
                    .all(|&(v, p)| if v > 0.0 { p > -1e-12 } else { p < 1e-12 })
            }
            _ => {
                // No-trust kernel: the light side is exactly zeroed, the
                // heavy side keeps the sign of G - L.
                let heavy_gain = fresh.g >= fresh.l;
                payoffs.iter().all(|&(v, p)| {
                    if (v < 0.0) == heavy_gain {
                        p.abs() <= 1e-10
                    } else if heavy_gain {
                        p >= -1e-12
                    } else {
                        p <= 1e-12
                    }
                })
            }
        };
        report.check_flag(format!("binary_action kernel-{:?}-signs", kernel.kind), ok);
    }
    Ok(())
}

fn verify_spherical(art: &SphericalArtifact, report: &mut Report) -> anyhow::Result<()> {
    let inst = art.spherical.build()?;
    report.check_flag(
        "spherical radius-in-range",
        (0.0..=inst.r0()).contains(&art.r_star),
    );
    if art.alpha > 0.5 && art.alpha < 1.0 {
        let residual = inst.balance_residual(art.alpha, art.r_star)?;
        report.check("spherical balance-residual", residual, 1e-10);
    } else {
        let expected = if art.alpha <= 0.5 { 0.0 } else { inst.r0() };
        report.check("spherical boundary-radius", art.r_star - expected, 1e-12);
    }
    Ok(())
}

fn verify_oracle(art: &OracleArtifact, report: &mut Report) -> anyhow::Result<()> {
    let game: FiniteGame = art.game.clone().try_into()?;
    let recertified = certify_pair(
        &game,
        art.solution.agent_strategy.clone(),
        art.solution.adversary_strategy.clone(),
    )?;
    report.check(
        "oracle exploitability-agent",
        recertified.exploitability.0,
        1e-8,
    );
    report.check(
        "oracle exploitability-adversary",
        recertified.exploitability.1,
        1e-8,
    );
    report.check("oracle value", recertified.value - art.solution.value, 1e-9);
    let structure = verify_trs_structure(&game, &recertified, None)?;
    report.check_flag("oracle robust-rationalizability", structure.all_pass);
    Ok(())
}

fn verify_sweep_csv(path: &Path, report: &mut Report) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    let rows: Vec<Vec<f64>> = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .map_err(|_| anyhow::anyhow!("sweep.csv: bad field {f:?}"))
                })
                .collect()
        })
        .collect::<anyhow::Result<_>>()?;
    match header {
        "alpha,lo,hi,cutoff" => {
            let mut worst = 0.0_f64;
            for w in rows.windows(2) {
                if w[1][0] > w[0][0] && w[0][0] >= 0.5 {
                    worst = worst.max(w[1][1] - w[0][1]); // lo must fall
                    worst = worst.max(w[0][2] - w[1][2]); // hi must rise
                }
            }
            report.check("sweep interval-monotonicity", worst, 1e-12);
        }
        "alpha,r_star,residual" => {
            let mut worst = 0.0_f64;
            for w in rows.windows(2) {
                if w[1][0] > w[0][0] {
                    worst = worst.max(w[0][1] - w[1][1]); // radius must rise
                }
            }
            report.check("sweep radius-monotonicity", worst, 1e-12);
        }
        other => anyhow::bail!("sweep.csv: unrecognized header {other:?}"),
    }
    Ok(())
}
