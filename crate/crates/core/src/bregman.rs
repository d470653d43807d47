//! Bregman distances and worst-case reports against a trust region.
//!
//! The misaligned adviser holding belief `mu` induces the belief in the trust
//! region that is *farthest* from `mu` in the Bregman distance of the agent's
//! indirect utility,
//!
//! ```text
//! D_U(m, m') = U(m) - U(m') - U'(m')(m - m').
//! ```
//!
//! On an interval region the farthest point is always an endpoint, and which
//! endpoint flips at the curvature-weighted cutoff belief.

use serde::{Deserialize, Serialize};

use crate::belief::{check_unit_scalar, Belief};
use crate::binary_trust::cutoff_belief;
use crate::error::{Error, Result};
use crate::utility::UtilityCurve;

/// A trust region in one of the shapes the solvers produce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum TrustRegion {
    /// Binary-state interval `[lo, hi]`; `lo == hi` is the degenerate
    /// ignore-the-adviser region.
    Interval { lo: f64, hi: f64 },
    /// Ball of `radius` around `center` (spherical environments).
    Ball { center: Belief, radius: f64 },
    /// Binary-action regime: the whole simplex or the prior alone.
    Regime { full_trust: bool },
}

impl TrustRegion {
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        check_unit_scalar(lo)?;
        check_unit_scalar(hi)?;
        if lo > hi {
            return Err(Error::input(format!(
                "empty trust interval: lo {lo} > hi {hi}"
            )));
        }
        Ok(TrustRegion::Interval { lo, hi })
    }
}

/// `D_U(m, m')`: the payoff loss from acting on `m'` when the truth is `m`.
///
/// Convexity of `U` makes the exact value nonnegative; rounding noise on the
/// diagonal is clamped at zero.
pub fn bregman_distance(u: &UtilityCurve, m: f64, mprime: f64) -> Result<f64> {
    check_unit_scalar(m)?;
    check_unit_scalar(mprime)?;
    let d = u.eval(m) - u.eval(mprime) - u.d1(mprime) * (m - mprime);
    Ok(d.max(0.0))
}

/// The belief in `trust` Bregman-farthest from `mu`: the report an
/// adversarial adviser with belief `mu` would induce.
///
/// Implemented for interval regions (including the binary-action regimes,
/// which resolve to `[0, 1]` or a singleton). At the cutoff the adviser is
/// indifferent; ties break toward the lower endpoint.
pub fn worst_case_report(u: &UtilityCurve, trust: &TrustRegion, mu: f64) -> Result<f64> {
    check_unit_scalar(mu)?;
    let (lo, hi) =
        match trust {
            TrustRegion::Interval { lo, hi } => (*lo, *hi),
            TrustRegion::Regime { full_trust: true } => (0.0, 1.0),
            TrustRegion::Regime { full_trust: false } => return Err(Error::input(
                "no-trust regime has no binary interval; supply the prior as a degenerate interval",
            )),
            TrustRegion::Ball { .. } => {
                return Err(Error::input(
                    "ball regions are handled by spherical::antipodal_report",
                ))
            }
        };
    if lo > hi {
        return Err(Error::input(format!(
            "empty trust interval: lo {lo} > hi {hi}"
        )));
    }
    let b = cutoff_belief(u, lo, hi)?;
    Ok(if mu >= b { lo } else { hi })
}
