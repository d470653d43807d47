//! The binary-state trust interval.
//!
//! With a binary state the trust region is an interval `[lo, hi]` around the
//! prior. A misaligned adviser with belief `mu` pushes the agent to the far
//! endpoint, switching sides at the curvature-weighted cutoff
//!
//! ```text
//! b(lo, hi) = ∫ mu U''(mu) dmu / ∫ U''(mu) dmu     (over [lo, hi]).
//! ```
//!
//! Posterior consistency at both endpoints gives two balancing residuals
//!
//! ```text
//! psi1 = alpha ∫_0^lo (mu - lo) tau + (1 - alpha) ∫_b^1 (mu - lo) tau,
//! psi2 = alpha ∫_hi^1 (mu - hi) tau + (1 - alpha) ∫_0^b (mu - hi) tau,
//! ```
//!
//! whose unique joint root with `lo <= prior <= hi` is the optimal interval
//! whenever `alpha > 1/2`. Each residual is strictly decreasing in its own
//! endpoint, so the solver runs a bisection per endpoint inside a fixed-point
//! iteration on `lo`; monotonicity of the best responses makes both safe.

use serde::{Deserialize, Serialize};

use crate::belief::check_unit_scalar;
use crate::density::BeliefDensity;
use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;
use crate::root::bisect;
use crate::utility::UtilityCurve;

/// Residual tolerance certified by [`solve_trust_interval`].
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Outer fixed-point stopping width on `lo`.
const OUTER_XTOL: f64 = 1e-10;
/// Inner bisection bracket width.
const INNER_XTOL: f64 = 1e-13;
/// Outer iteration budget; exceeding it is an error, never a best effort.
const MAX_OUTER: usize = 10_000;

/// A solved binary-state trust interval with its certificates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrustInterval {
    pub lo: f64,
    pub hi: f64,
    /// Cutoff belief `b(lo, hi)` separating the adversary's two sides.
    pub cutoff: f64,
    pub alpha: f64,
    pub prior: f64,
    /// `(psi1, psi2)` evaluated at `(lo, hi)`.
    pub residuals: (f64, f64),
}

impl TrustInterval {
    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }
}

/// The belief at which the misaligned adviser switches between inducing the
/// two interval endpoints. Degenerate intervals return `lo` (the continuity
/// limit of the curvature-weighted mean).
pub fn cutoff_belief(u: &UtilityCurve, lo: f64, hi: f64) -> Result<f64> {
    check_unit_scalar(lo)?;
    check_unit_scalar(hi)?;
    if lo > hi {
        return Err(Error::input(format!(
            "cutoff: inverted interval [{lo}, {hi}]"
        )));
    }
    if lo == hi {
        return Ok(lo);
    }
    let (m0, m1) = u.d2_moments(lo, hi)?;
    if !(m0 > 0.0) {
        return Err(Error::Internal(format!(
            "nonpositive curvature mass {m0} on [{lo}, {hi}]"
        )));
    }
    Ok((m1 / m0).clamp(lo, hi))
}

/// The two balancing residuals at a candidate interval.
pub fn psi_residuals(
    u: &UtilityCurve,
    tau: &BeliefDensity,
    alpha: f64,
    lo: f64,
    hi: f64,
) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    require_grid(tau)?;
    let b = cutoff_belief(u, lo, hi)?;
    let psi1 = alpha * deviation_mass(tau, 0.0, lo, lo)?
        + (1.0 - alpha) * deviation_mass(tau, b, 1.0, lo)?;
    let psi2 = alpha * deviation_mass(tau, hi, 1.0, hi)?
        + (1.0 - alpha) * deviation_mass(tau, 0.0, b, hi)?;
    Ok((psi1, psi2))
}

/// `∫_lo^hi (mu - anchor) tau(mu) dmu`.
fn deviation_mass(tau: &BeliefDensity, lo: f64, hi: f64, anchor: f64) -> Result<f64> {
    let (m0, m1) = tau.partial_moments(lo, hi)?;
    Ok(m1 - anchor * m0)
}

/// Solves the trust interval for `(u, tau, alpha)`.
///
/// Returns the degenerate interval at the prior for `alpha <= 1/2`;
/// otherwise the unique root of the balancing system, certified to
/// [`RESIDUAL_TOL`].
pub fn solve_trust_interval(
    u: &UtilityCurve,
    tau: &BeliefDensity,
    alpha: f64,
) -> Result<TrustInterval> {
    let prior = require_grid(tau)?;
    solve_from(u, tau, alpha, prior)
}

/// As [`solve_trust_interval`] but with an explicit starting point for the
/// outer fixed-point iteration; the dual-initialization uniqueness probe
/// starts from both `0` and the prior.
pub fn solve_trust_interval_from(
    u: &UtilityCurve,
    tau: &BeliefDensity,
    alpha: f64,
    init_lo: f64,
) -> Result<TrustInterval> {
    require_grid(tau)?;
    solve_from(u, tau, alpha, init_lo)
}

fn solve_from(
    u: &UtilityCurve,
    tau: &BeliefDensity,
    alpha: f64,
    init_lo: f64,
) -> Result<TrustInterval> {
    check_alpha(alpha)?;
    let prior = tau.prior_scalar()?;
    if alpha <= 0.5 {
        let residuals = psi_residuals(u, tau, alpha, prior, prior)?;
        return Ok(TrustInterval {
            lo: prior,
            hi: prior,
            cutoff: prior,
            alpha,
            prior,
            residuals,
        });
    }

    // Best responses: lo solving psi1 = 0 given hi, and hi solving psi2 = 0
    // given lo. Both residuals are strictly decreasing in the solved-for
    // endpoint, with guaranteed sign changes on [0, prior] and [prior, 1].
    let best_lo = |hi: f64| -> Result<f64> {
        bisect(
            |lo| {
                psi_residuals(u, tau, alpha, lo, hi)
                    .expect("validated inputs")
                    .0
            },
            0.0,
            prior,
            INNER_XTOL,
        )
    };
    let best_hi = |lo: f64| -> Result<f64> {
        bisect(
            |hi| {
                psi_residuals(u, tau, alpha, lo, hi)
                    .expect("validated inputs")
                    .1
            },
            prior,
            1.0,
            INNER_XTOL,
        )
    };

    let mut lo = init_lo.clamp(0.0, prior);
    let mut hi = prior;
    for _ in 0..MAX_OUTER {
        hi = best_hi(lo)?;
        let next_lo = best_lo(hi)?;
        let step = (next_lo - lo).abs();
        lo = next_lo;
        if step < OUTER_XTOL {
            hi = best_hi(lo)?;
            break;
        }
    }
    let residuals = psi_residuals(u, tau, alpha, lo, hi)?;
    if residuals.0.abs() > RESIDUAL_TOL || residuals.1.abs() > RESIDUAL_TOL {
        return Err(Error::NoConvergence {
            context: format!("trust interval at alpha={alpha}"),
            psi1: residuals.0,
            psi2: residuals.1,
        });
    }
    let cutoff = cutoff_belief(u, lo, hi)?;
    Ok(TrustInterval {
        lo,
        hi,
        cutoff,
        alpha,
        prior,
        residuals,
    })
}

/// The agent's worst-case payoff from committing to the interval `[lo, hi]`:
/// face-value payoffs inside, supporting-hyperplane payoffs where reports are
/// clipped, and the adversary splitting at the cutoff. Used as the
/// grid-search oracle for solver optimality checks.
pub fn worst_case_payoff(
    u: &UtilityCurve,
    tau: &BeliefDensity,
    alpha: f64,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    check_alpha(alpha)?;
    require_grid(tau)?;
    check_unit_scalar(lo)?;
    check_unit_scalar(hi)?;
    if lo > hi {
        return Err(Error::input(format!("inverted interval [{lo}, {hi}]")));
    }
    let b = cutoff_belief(u, lo, hi)?;
    // Payoff of acting as if the belief were `at`, integrated over tau on
    // [from, to]: the hyperplane supporting U at `at`.
    let hyperplane = |at: f64, from: f64, to: f64| -> Result<f64> {
        let (m0, m1) = tau.partial_moments(from, to)?;
        Ok(u.eval(at) * m0 + u.d1(at) * (m1 - at * m0))
    };
    let face_value = integrate_u_tau(u, tau, lo, hi);
    let aligned = hyperplane(lo, 0.0, lo)? + face_value + hyperplane(hi, hi, 1.0)?;
    let misaligned = hyperplane(hi, 0.0, b)? + hyperplane(lo, b, 1.0)?;
    Ok(alpha * aligned + (1.0 - alpha) * misaligned)
}

/// `∫ U(mu) tau(mu) dmu` over `[lo, hi]`, split at the density knots so the
/// adaptive rule only ever sees smooth integrands.
fn integrate_u_tau(u: &UtilityCurve, tau: &BeliefDensity, lo: f64, hi: f64) -> f64 {
    let knots: Vec<f64> = match tau {
        BeliefDensity::Grid { density } => density.knots().to_vec(),
        _ => vec![lo, hi],
    };
    let mut cuts = vec![lo];
    cuts.extend(knots.iter().copied().filter(|&k| k > lo && k < hi));
    cuts.push(hi);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += adaptive_simpson(
            |x| u.eval(x) * tau.value_at(x).expect("grid density"),
            w[0],
            w[1],
            1e-12,
        );
    }
    total
}

/// Direction of the curvature ratio `u1''/u2''` on a sampled grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatioDirection {
    Decreasing,
    Increasing,
    Constant,
    NonMonotone,
}

/// Strong-set-order comparison of two intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetOrder {
    Higher,
    Lower,
    Equal,
    Incomparable,
}

/// Outcome of comparing the trust intervals of two decision problems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub interval1: TrustInterval,
    pub interval2: TrustInterval,
    pub ratio_direction: RatioDirection,
    pub set_order: SetOrder,
    /// Whether the observed order matches the information-sensitivity
    /// prediction; `None` when the ratio is not monotone on the grid (the
    /// comparison is still reported, flagged as outside the hypothesis).
    pub matches_prediction: Option<bool>,
}

/// Solves both trust intervals and reports whether their strong-set-order
/// ranking matches the direction predicted by the monotonicity of
/// `u1''/u2''` (information sensitivity).
pub fn sensitivity_compare(
    u1: &UtilityCurve,
    u2: &UtilityCurve,
    tau: &BeliefDensity,
    alpha: f64,
) -> Result<SensitivityReport> {
    let interval1 = solve_trust_interval(u1, tau, alpha)?;
    let interval2 = solve_trust_interval(u2, tau, alpha)?;

    const GRID: usize = 201;
    const EPS: f64 = 1e-12;
    let ratio: Vec<f64> = (1..GRID)
        .map(|i| {
            let mu = i as f64 / GRID as f64;
            u1.d2(mu) / u2.d2(mu)
        })
        .collect();
    let nonincreasing = ratio.windows(2).all(|w| w[1] <= w[0] + EPS);
    let nondecreasing = ratio.windows(2).all(|w| w[1] >= w[0] - EPS);
    let ratio_direction = match (nonincreasing, nondecreasing) {
        (true, true) => RatioDirection::Constant,
        (true, false) => RatioDirection::Decreasing,
        (false, true) => RatioDirection::Increasing,
        (false, false) => RatioDirection::NonMonotone,
    };

    let tol = 1e-8;
    let higher = interval1.lo >= interval2.lo - tol && interval1.hi >= interval2.hi - tol;
    let lower = interval2.lo >= interval1.lo - tol && interval2.hi >= interval1.hi - tol;
    let set_order = match (higher, lower) {
        (true, true) => SetOrder::Equal,
        (true, false) => SetOrder::Higher,
        (false, true) => SetOrder::Lower,
        (false, false) => SetOrder::Incomparable,
    };

    let matches_prediction = match ratio_direction {
        // Ratio decreasing: problem 1 is less information-sensitive at high
        // beliefs, so its region sits higher (weak order allows equality).
        RatioDirection::Decreasing => Some(higher),
        RatioDirection::Increasing => Some(lower),
        RatioDirection::Constant => Some(higher && lower),
        RatioDirection::NonMonotone => None,
    };

    Ok(SensitivityReport {
        interval1,
        interval2,
        ratio_direction,
        set_order,
        matches_prediction,
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || !(0.0..=1.0).contains(&alpha) {
        return Err(Error::input(format!("alpha {alpha} outside [0, 1]")));
    }
    Ok(())
}

fn require_grid(tau: &BeliefDensity) -> Result<f64> {
    if !tau.is_grid() {
        return Err(Error::input(
            "binary trust solving needs a full-support grid density (atoms go through the game oracle)",
        ));
    }
    tau.prior_scalar()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Root of the symmetric-instance reduction for quadratic utility and
    /// uniform tau at prior 1/2: alpha lo^2 / 2 = (1 - alpha)(3/8 - lo/2).
    /// Independent of the solver path.
    pub(crate) fn symmetric_quadratic_lo(alpha: f64) -> f64 {
        let a = alpha / 2.0;
        let b = (1.0 - alpha) / 2.0;
        let c = -(1.0 - alpha) * 3.0 / 8.0;
        (-b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a)
    }

    #[test]
    fn cutoff_constant_curvature_is_midpoint() {
        let u = UtilityCurve::quadratic_loss();
        let b = cutoff_belief(&u, 0.2, 0.6).unwrap();
        assert!((b - 0.4).abs() < 1e-14);
    }

    #[test]
    fn cutoff_log_score_closed_form() {
        let u = UtilityCurve::log_score();
        let b = cutoff_belief(&u, 0.2, 0.6).unwrap();
        let expected = 2.0f64.ln() / 6.0f64.ln();
        assert!((b - expected).abs() < 1e-12, "{b} vs {expected}");
    }

    #[test]
    fn cutoff_degenerate() {
        let u = UtilityCurve::log_score();
        assert_eq!(cutoff_belief(&u, 0.7, 0.7).unwrap(), 0.7);
    }

    #[test]
    fn psi_zero_at_prior_at_half_alpha() {
        let u = UtilityCurve::quadratic_loss();
        let tau = BeliefDensity::uniform();
        let (p1, p2) = psi_residuals(&u, &tau, 0.5, 0.5, 0.5).unwrap();
        assert!(p1.abs() < 1e-14 && p2.abs() < 1e-14);
    }

    #[test]
    fn psi_zero_at_full_alpha_full_interval() {
        let u = UtilityCurve::quadratic_loss();
        let tau = BeliefDensity::uniform();
        let (p1, p2) = psi_residuals(&u, &tau, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(p1, 0.0);
        assert_eq!(p2, 0.0);
    }

    #[test]
    fn psi_zero_at_derived_root() {
        let u = UtilityCurve::quadratic_loss();
        let tau = BeliefDensity::uniform();
        let lo = symmetric_quadratic_lo(0.75);
        let (p1, p2) = psi_residuals(&u, &tau, 0.75, lo, 1.0 - lo).unwrap();
        assert!(p1.abs() < 1e-9, "psi1 = {p1}");
        assert!(p2.abs() < 1e-9, "psi2 = {p2}");
    }

    #[test]
    fn golden_intervals_quadratic_uniform() {
        let u = UtilityCurve::quadratic_loss();
        let tau = BeliefDensity::uniform();
        for alpha in [0.75, 0.9] {
            let t = solve_trust_interval(&u, &tau, alpha).unwrap();
            let lo = symmetric_quadratic_lo(alpha);
            assert!((t.lo - lo).abs() < 1e-9, "alpha {alpha}: {} vs {lo}", t.lo);
            assert!((t.hi - (1.0 - lo)).abs() < 1e-9);
            assert!((t.cutoff - 0.5).abs() < 1e-9);
        }
        // Frozen decimals from the quadratic-root oracle:
        // lo(0.75) = (sqrt(10)-1)/6, lo(0.9) = (2 sqrt(7)-1)/18.
        let t = solve_trust_interval(&u, &tau, 0.75).unwrap();
        assert!((t.lo - 0.3603796100).abs() < 1e-9);
        assert!((t.hi - 0.6396203900).abs() < 1e-9);
        let t = solve_trust_interval(&u, &tau, 0.9).unwrap();
        assert!((t.lo - 0.2384168123).abs() < 1e-9);
        assert!((t.hi - 0.7615831877).abs() < 1e-9);
    }

    #[test]
    fn degenerate_below_half() {
        let u = UtilityCurve::log_score();
        let tau = BeliefDensity::uniform();
        for alpha in [0.0, 0.25, 0.4, 0.5] {
            let t = solve_trust_interval(&u, &tau, alpha).unwrap();
            assert_eq!(t.lo, 0.5);
            assert_eq!(t.hi, 0.5);
            assert!(t.is_degenerate());
        }
    }

    #[test]
    fn full_trust_at_alpha_one() {
        let u = UtilityCurve::quadratic_loss();
        let tau = BeliefDensity::uniform();
        let t = solve_trust_interval(&u, &tau, 1.0).unwrap();
        assert!(t.lo <= 1e-6, "lo = {}", t.lo);
        assert!(t.hi >= 1.0 - 1e-6, "hi = {}", t.hi);
    }

    #[test]
    fn monotone_in_alpha() {
        let u = UtilityCurve::log_score();
        let tau = BeliefDensity::uniform();
        let mut last = solve_trust_interval(&u, &tau, 0.55).unwrap();
        for i in 1..=8 {
            let alpha = 0.55 + 0.05 * i as f64;
            let t = solve_trust_interval(&u, &tau, alpha).unwrap();
            assert!(t.lo < last.lo - 1e-7, "lo not decreasing at {alpha}");
            assert!(t.hi > last.hi + 1e-7, "hi not increasing at {alpha}");
            last = t;
        }
    }

    #[test]
    fn dual_initialization_agrees() {
        let u = UtilityCurve::weighted_quadratic(4.0).unwrap();
        let tau = BeliefDensity::uniform();
        for alpha in [0.6, 0.75, 0.9] {
            let a = solve_trust_interval_from(&u, &tau, alpha, 0.0).unwrap();
            let b = solve_trust_interval_from(&u, &tau, alpha, a.prior).unwrap();
            assert!((a.lo - b.lo).abs() < 1e-8, "alpha {alpha}");
            assert!((a.hi - b.hi).abs() < 1e-8, "alpha {alpha}");
        }
    }

    #[test]
    fn solver_output_maximizes_grid_payoff() {
        let u = UtilityCurve::quadratic_loss();
        let tau = BeliefDensity::uniform();
        let alpha = 0.75;
        let t = solve_trust_interval(&u, &tau, alpha).unwrap();
        let solver_value = worst_case_payoff(&u, &tau, alpha, t.lo, t.hi).unwrap();
        let n = 40;
        for i in 0..=n {
            let lo = 0.5 * i as f64 / n as f64;
            for j in 0..=n {
                let hi = 0.5 + 0.5 * j as f64 / n as f64;
                let v = worst_case_payoff(&u, &tau, alpha, lo, hi).unwrap();
                assert!(
                    v <= solver_value + 1e-9,
                    "grid candidate [{lo}, {hi}] beats solver: {v} > {solver_value}"
                );
            }
        }
    }

    #[test]
    fn asymmetric_curvature_shifts_interval_right() {
        // u1'' = 6 - 4 mu decreasing against constant-curvature u2: the
        // ratio decreases, so interval 1 must sit higher.
        let u1 = UtilityCurve::linear_curvature(6.0, -4.0).unwrap();
        let u2 = UtilityCurve::quadratic_loss();
        let tau = BeliefDensity::uniform();
        let rep = sensitivity_compare(&u1, &u2, &tau, 0.75).unwrap();
        assert_eq!(rep.ratio_direction, RatioDirection::Decreasing);
        assert_eq!(rep.set_order, SetOrder::Higher);
        assert_eq!(rep.matches_prediction, Some(true));
        assert!(rep.interval1.lo > rep.interval2.lo + 1e-6);
        assert!(rep.interval1.hi > rep.interval2.hi + 1e-6);
    }

    #[test]
    fn weighted_loss_shifts_interval_right() {
        let u1 = UtilityCurve::weighted_quadratic(4.0).unwrap();
        let u2 = UtilityCurve::quadratic_loss();
        let tau = BeliefDensity::uniform();
        let rep = sensitivity_compare(&u1, &u2, &tau, 0.75).unwrap();
        assert_eq!(rep.ratio_direction, RatioDirection::Decreasing);
        assert_eq!(rep.set_order, SetOrder::Higher);
        assert_eq!(rep.matches_prediction, Some(true));
        // Solver optimality double-check on the asymmetric instance.
        let t = &rep.interval1;
        let best = worst_case_payoff(&u1, &tau, 0.75, t.lo, t.hi).unwrap();
        for i in 0..=30 {
            let lo = t.prior * i as f64 / 30.0;
            for j in 0..=30 {
                let hi = t.prior + (1.0 - t.prior) * j as f64 / 30.0;
                let v = worst_case_payoff(&u1, &tau, 0.75, lo, hi).unwrap();
                assert!(v <= best + 1e-9, "[{lo}, {hi}]: {v} > {best}");
            }
        }
    }

    #[test]
    fn identical_curves_compare_equal() {
        let u = UtilityCurve::quadratic_loss();
        let tau = BeliefDensity::uniform();
        let rep = sensitivity_compare(&u, &u, &tau, 0.75).unwrap();
        assert_eq!(rep.ratio_direction, RatioDirection::Constant);
        assert_eq!(rep.set_order, SetOrder::Equal);
        assert_eq!(rep.matches_prediction, Some(true));
    }

    #[test]
    fn nonuniform_tau_solution_is_grid_optimal() {
        // Rising density tau(mu) = 0.5 + mu (prior 7/12) under log score:
        // nothing on a 30x30 candidate grid beats the solved interval.
        let u = UtilityCurve::log_score();
        let tau = BeliefDensity::grid(
            crate::piecewise::PiecewiseLinear::new(vec![0.0, 1.0], vec![0.5, 1.5]).unwrap(),
        )
        .unwrap();
        let alpha = 0.8;
        let t = solve_trust_interval(&u, &tau, alpha).unwrap();
        assert!((t.prior - 7.0 / 12.0).abs() < 1e-12);
        assert!(t.lo < t.prior && t.hi > t.prior);
        let best = worst_case_payoff(&u, &tau, alpha, t.lo, t.hi).unwrap();
        for i in 0..=30 {
            let lo = t.prior * i as f64 / 30.0;
            for j in 0..=30 {
                let hi = t.prior + (1.0 - t.prior) * j as f64 / 30.0;
                let v = worst_case_payoff(&u, &tau, alpha, lo, hi).unwrap();
                assert!(v <= best + 1e-9, "[{lo}, {hi}]: {v} > {best}");
            }
        }
    }

    #[test]
    fn atoms_rejected() {
        let u = UtilityCurve::quadratic_loss();
        let tau = BeliefDensity::binary_atoms(&[(0.2, 0.5), (0.8, 0.5)]).unwrap();
        assert!(solve_trust_interval(&u, &tau, 0.75).is_err());
    }
}
