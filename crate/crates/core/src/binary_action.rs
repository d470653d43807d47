//! The all-or-nothing solution for binary-action problems.
//!
//! With two actions and no private type, everything reduces to the
//! distribution of the relative payoff `v = E_mu[u(a2)] - E_mu[u(a1)]` of
//! the second action. Writing `L` and `G` for the expected one-sided losses
//! and gains,
//!
//! ```text
//! L = ∫_{v<0} (-v) dtau,   G = ∫_{v>0} v dtau,
//! alpha_hat = max(L, G) / (L + G),
//! ```
//!
//! the worst-case payoff of acting with probabilities `sigma_low` on
//! negative-`v` messages and `sigma_high` on positive ones is
//!
//! ```text
//! sigma_low ((1-alpha) G - alpha L) + sigma_high (alpha G - (1-alpha) L),
//! ```
//!
//! a linear program over the triangle `0 <= sigma_low <= sigma_high <= 1`
//! whose optimum is a vertex: full trust `(0, 1)` above `alpha_hat`, the
//! prior-optimal constant action below it, both at the threshold.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::piecewise::PiecewiseLinear;

/// Distribution of the relative payoff of action 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RelativePayoffDist {
    /// Finitely many `(v, probability)` atoms.
    Atoms { atoms: Vec<(f64, f64)> },
    /// A piecewise-linear density over a bounded `v` range.
    Density { density: PiecewiseLinear },
}

impl RelativePayoffDist {
    pub fn atoms(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::input("relative payoff needs at least one atom"));
        }
        if pairs.iter().any(|(v, p)| !v.is_finite() || !(*p >= 0.0)) {
            return Err(Error::input("atoms must be finite with nonnegative mass"));
        }
        let total: f64 = pairs.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::input(format!(
                "atom probabilities sum to {total}, expected 1"
            )));
        }
        Ok(RelativePayoffDist::Atoms { atoms: pairs })
    }

    pub fn density(density: PiecewiseLinear) -> Result<Self> {
        let mass = density.total_mass();
        if (mass - 1.0).abs() > 1e-10 {
            return Err(Error::input(format!(
                "relative payoff density integrates to {mass}, expected 1"
            )));
        }
        Ok(RelativePayoffDist::Density { density })
    }

    /// Expected relative payoff at the prior: `E[v] = G - L`.
    pub fn prior_v(&self) -> f64 {
        match self {
            RelativePayoffDist::Atoms { atoms } => atoms.iter().map(|(v, p)| v * p).sum(),
            RelativePayoffDist::Density { density } => {
                let (a, b) = density.domain();
                let (_, m1) = density.partial_moments(a, b).expect("valid domain");
                m1
            }
        }
    }

    /// `(L, G)` with the genericity checks: both strictly positive, no mass
    /// at `v = 0`.
    pub fn losses_gains(&self) -> Result<(f64, f64)> {
        let (l, g, zero_mass) = match self {
            RelativePayoffDist::Atoms { atoms } => {
                let mut l = 0.0;
                let mut g = 0.0;
                let mut z = 0.0;
                for &(v, p) in atoms {
                    if v < 0.0 {
                        l += -v * p;
                    } else if v > 0.0 {
                        g += v * p;
                    } else {
                        z += p;
                    }
                }
                (l, g, z)
            }
            RelativePayoffDist::Density { density } => {
                let (a, b) = density.domain();
                let (m0n, m1n) = density.partial_moments(a, 0.0_f64.min(b))?;
                let (_, m1p) = density.partial_moments(0.0_f64.max(a), b)?;
                let _ = m0n;
                (-m1n, m1p, 0.0)
            }
        };
        if zero_mass > 0.0 {
            return Err(Error::Genericity(format!(
                "an atom of mass {zero_mass} sits exactly at v = 0; the sign split is undefined"
            )));
        }
        if !(l > 0.0) || !(g > 0.0) {
            return Err(Error::Genericity(format!(
                "one-sided losses and gains must both be strictly positive, got L = {l}, G = {g}"
            )));
        }
        Ok((l, g))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrustVerdict {
    FullTrust,
    NoTrust,
    BoundaryBoth,
}

/// Solution of the binary-action problem at a given alignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryActionSolution {
    pub l: f64,
    pub g: f64,
    pub alpha_hat: f64,
    pub alpha: f64,
    pub regime: TrustVerdict,
    /// Probability of action 2 on negative-`v` messages.
    pub sigma_low: f64,
    /// Probability of action 2 on positive-`v` messages.
    pub sigma_high: f64,
    /// The other optimal vertex at the regime boundary (the no-trust pair;
    /// `sigma_low`/`sigma_high` then carry the full-trust pair).
    pub alternate: Option<(f64, f64)>,
    /// Worst-case expected payoff relative to always playing action 1.
    pub value: f64,
}

/// Solves the all-or-nothing problem: full trust iff `alpha > alpha_hat`.
pub fn solve_binary_action(dist: &RelativePayoffDist, alpha: f64) -> Result<BinaryActionSolution> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::input(format!("alpha {alpha} outside [0, 1]")));
    }
    let (l, g) = dist.losses_gains()?;
    let alpha_hat = l.max(g) / (l + g);
    let trust_value = alpha * g - (1.0 - alpha) * l;
    let constant_value = (g - l).max(0.0);
    let no_trust_sigma = if g > l { 1.0 } else { 0.0 };
    let (regime, sigma_low, sigma_high, alternate) = if alpha > alpha_hat {
        (TrustVerdict::FullTrust, 0.0, 1.0, None)
    } else if alpha < alpha_hat {
        (TrustVerdict::NoTrust, no_trust_sigma, no_trust_sigma, None)
    } else {
        (
            TrustVerdict::BoundaryBoth,
            0.0,
            1.0,
            Some((no_trust_sigma, no_trust_sigma)),
        )
    };
    Ok(BinaryActionSolution {
        l,
        g,
        alpha_hat,
        alpha,
        regime,
        sigma_low,
        sigma_high,
        alternate,
        value: trust_value.max(constant_value),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    /// Cross-randomization certifying full trust.
    FullTrust,
    /// Jamming kernel for the no-trust regime (partial back-mixing).
    NoTrust,
}

/// A rationalizing reporting kernel for the misaligned adviser.
///
/// Misaligned types with `v < 0` randomize over positive-`v` messages with
/// weights proportional to `v tau / G` (the gain measure `q_plus`), and
/// symmetrically with the loss measure `q_minus`. In the no-trust regime
/// the heavy side mixes back with weight `gamma` so that every message on
/// the light side becomes exactly uninformative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryKernel {
    pub kind: KernelKind,
    /// Back-mixing weight (no-trust kernels only).
    pub gamma: Option<f64>,
    /// For atom distributions: `transition[i][j]` is the probability that a
    /// misaligned adviser holding atom `i` sends atom `j`'s message.
    pub transition: Option<Vec<Vec<f64>>>,
}

/// Builds the certifying adversary kernel(s). At the regime boundary both
/// kernels are returned, tagged by kind.
pub fn rationalizing_adversary(
    dist: &RelativePayoffDist,
    alpha: f64,
) -> Result<Vec<AdversaryKernel>> {
    if alpha == 0.0 {
        return Err(Error::input(
            "alpha = 0 leaves nothing to rationalize: every message is adversarial noise",
        ));
    }
    let solution = solve_binary_action(dist, alpha)?;
    let mut kernels = Vec::new();
    match solution.regime {
        TrustVerdict::FullTrust => kernels.push(full_trust_kernel(dist, &solution)),
        TrustVerdict::NoTrust => kernels.push(no_trust_kernel(dist, &solution, alpha)),
        TrustVerdict::BoundaryBoth => {
            kernels.push(full_trust_kernel(dist, &solution));
            kernels.push(no_trust_kernel(dist, &solution, alpha));
        }
    }
    Ok(kernels)
}

fn atom_measures(atoms: &[(f64, f64)], l: f64, g: f64) -> (Vec<f64>, Vec<f64>) {
    let q_plus = atoms
        .iter()
        .map(|&(v, p)| if v > 0.0 { v * p / g } else { 0.0 })
        .collect();
    let q_minus = atoms
        .iter()
        .map(|&(v, p)| if v < 0.0 { -v * p / l } else { 0.0 })
        .collect();
    (q_plus, q_minus)
}

fn full_trust_kernel(dist: &RelativePayoffDist, sol: &BinaryActionSolution) -> AdversaryKernel {
    let transition = match dist {
        RelativePayoffDist::Atoms { atoms } => {
            let (q_plus, q_minus) = atom_measures(atoms, sol.l, sol.g);
            Some(
                atoms
                    .iter()
                    .map(|&(v, _)| {
                        if v < 0.0 {
                            q_plus.clone()
                        } else {
                            q_minus.clone()
                        }
                    })
                    .collect(),
            )
        }
        RelativePayoffDist::Density { .. } => None,
    };
    AdversaryKernel {
        kind: KernelKind::FullTrust,
        gamma: None,
        transition,
    }
}

fn no_trust_kernel(
    dist: &RelativePayoffDist,
    sol: &BinaryActionSolution,
    alpha: f64,
) -> AdversaryKernel {
    // Heavy side mixes back so the light side's posteriors hit zero; ties
    // (L = G, only reachable at the boundary) use the high-gain form.
    let gamma = if sol.g >= sol.l {
        alpha * sol.l / ((1.0 - alpha) * sol.g)
    } else {
        alpha * sol.g / ((1.0 - alpha) * sol.l)
    };
    let transition = match dist {
        RelativePayoffDist::Atoms { atoms } => {
            let (q_plus, q_minus) = atom_measures(atoms, sol.l, sol.g);
            let rows = atoms
                .iter()
                .map(|&(v, _)| {
                    if sol.g >= sol.l {
                        if v < 0.0 {
                            q_plus.clone()
                        } else {
                            mix(&q_minus, gamma, &q_plus)
                        }
                    } else if v > 0.0 {
                        q_minus.clone()
                    } else {
                        mix(&q_plus, gamma, &q_minus)
                    }
                })
                .collect();
            Some(rows)
        }
        RelativePayoffDist::Density { .. } => None,
    };
    AdversaryKernel {
        kind: KernelKind::NoTrust,
        gamma: Some(gamma),
        transition,
    }
}

fn mix(a: &[f64], w: f64, b: &[f64]) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(x, y)| w * x + (1.0 - w) * y)
        .collect()
}

/// Posterior relative payoff of each message atom under a kernel:
/// `alpha v_m p_m + (1 - alpha) sum_i p_i K(m | i) v_i`. The sign per
/// message is the certificate that the agent's prescribed action is a best
/// response.
pub fn posterior_relative_payoffs(
    dist: &RelativePayoffDist,
    alpha: f64,
    kernel: &AdversaryKernel,
) -> Result<Vec<(f64, f64)>> {
    let RelativePayoffDist::Atoms { atoms } = dist else {
        return Err(Error::input(
            "posterior certificates are computed on atom distributions",
        ));
    };
    let transition = kernel
        .transition
        .as_ref()
        .ok_or_else(|| Error::input("kernel carries no atom transition matrix"))?;
    Ok(atoms
        .iter()
        .enumerate()
        .map(|(m, &(v_m, p_m))| {
            let incoming: f64 = atoms
                .iter()
                .enumerate()
                .map(|(i, &(v_i, p_i))| p_i * transition[i][m] * v_i)
                .sum();
            (v_m, alpha * v_m * p_m + (1.0 - alpha) * incoming)
        })
        .collect())
}
