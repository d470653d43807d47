//! Trust balls for radially symmetric multi-state environments.
//!
//! When the indirect utility depends on the belief only through its distance
//! from a center `b`, `U(mu) = V(||mu - b||)`, and the adviser's posterior is
//! symmetric around `b` with radial density `tau(r)` on `[0, r0]`, the trust
//! region is a ball whose radius balances, along any diameter,
//!
//! ```text
//! (2 alpha - 1) ∫_{r*}^{r0} (r - r*) tau dr
//!     = (1 - alpha) ( ∫_0^{r*} (r + r*) tau dr + ∫_{r*}^{r0} 2 r* tau dr ).
//! ```
//!
//! `tau(r)` is the density of the radius itself: the balance equation
//! integrates it one-dimensionally along a diameter, so no solid-angle
//! factor belongs in the profile.
//!
//! The shape of `V` never enters: the misaligned adviser's best report is
//! the antipodal boundary point for *any* strictly convex radial utility,
//! so the radius is pinned down by `tau` alone.

use serde::{Deserialize, Serialize};

use crate::belief::Belief;
use crate::error::{Error, Result};
use crate::piecewise::PiecewiseLinear;
use crate::root::bisect;

/// Bisection tolerance for the balance equation.
const RADIUS_XTOL: f64 = 1e-12;

/// A radially symmetric environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalInstance {
    center: Belief,
    r0: f64,
    radial: PiecewiseLinear,
}

impl SphericalInstance {
    /// Validates normalization of the radial profile and that the support
    /// ball stays inside the simplex (checked at the 2N axis-extreme
    /// points, which attain the coordinate minima over the ball).
    pub fn new(center: Belief, r0: f64, radial: PiecewiseLinear) -> Result<Self> {
        if !(r0 > 0.0) || !r0.is_finite() {
            return Err(Error::input(format!(
                "support radius {r0} must be positive"
            )));
        }
        let (a, b) = radial.domain();
        if a.abs() > 1e-12 || (b - r0).abs() > 1e-12 {
            return Err(Error::input(format!(
                "radial profile must span [0, {r0}], got [{a}, {b}]"
            )));
        }
        let mass = radial.total_mass();
        if (mass - 1.0).abs() > 1e-10 {
            return Err(Error::input(format!(
                "radial profile integrates to {mass}, expected 1"
            )));
        }
        let n = center.dim();
        for i in 0..n {
            for sign in [-1.0, 1.0] {
                let extreme = axis_extreme(&center, r0, i, sign);
                if extreme
                    .iter()
                    .any(|&x| !(-1e-12..=1.0 + 1e-12).contains(&x))
                {
                    return Err(Error::input(format!(
                        "support ball of radius {r0} leaves the simplex at the axis-{i} extreme \
                         (instances are rejected, not clipped)"
                    )));
                }
            }
        }
        Ok(Self { center, r0, radial })
    }

    /// Uniform radial density on `[0, r0]`.
    pub fn uniform(center: Belief, r0: f64) -> Result<Self> {
        let radial = PiecewiseLinear::constant(0.0, r0, 1.0 / r0)?;
        Self::new(center, r0, radial)
    }

    pub fn center(&self) -> &Belief {
        &self.center
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn dimension(&self) -> usize {
        self.center.dim()
    }

    pub fn radial(&self) -> &PiecewiseLinear {
        &self.radial
    }

    /// Left-minus-right side of the balance equation at radius `r`.
    pub fn balance_residual(&self, alpha: f64, r: f64) -> Result<f64> {
        if !(0.0..=self.r0).contains(&r) {
            return Err(Error::input(format!("radius {r} outside [0, {}]", self.r0)));
        }
        let (m0_out, m1_out) = self.radial.partial_moments(r, self.r0)?;
        let (m0_in, m1_in) = self.radial.partial_moments(0.0, r)?;
        let lhs = (2.0 * alpha - 1.0) * (m1_out - r * m0_out);
        let rhs = (1.0 - alpha) * ((m1_in + r * m0_in) + 2.0 * r * m0_out);
        Ok(lhs - rhs)
    }
}

/// The in-hyperplane unit direction maximizing coordinate `i`, scaled to the
/// ball boundary.
fn axis_extreme(center: &Belief, r0: f64, i: usize, sign: f64) -> Vec<f64> {
    let n = center.dim() as f64;
    let norm = (1.0 - 1.0 / n).sqrt();
    center
        .probs()
        .iter()
        .enumerate()
        .map(|(j, &c)| {
            let v = if j == i { 1.0 - 1.0 / n } else { -1.0 / n };
            c + sign * r0 * v / norm
        })
        .collect()
}

/// Solves for the trust-ball radius `r*(alpha)`: zero at `alpha <= 1/2`,
/// the full support radius at `alpha = 1`, otherwise the unique root of the
/// balance equation in `(0, r0)`.
pub fn solve_radius(inst: &SphericalInstance, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::input(format!("alpha {alpha} outside [0, 1]")));
    }
    if alpha <= 0.5 {
        return Ok(0.0);
    }
    if alpha == 1.0 {
        return Ok(inst.r0);
    }
    // The residual is strictly decreasing in r, positive at 0, negative at
    // r0 for alpha in (1/2, 1).
    bisect(
        |r| inst.balance_residual(alpha, r).expect("r in range"),
        0.0,
        inst.r0,
        RADIUS_XTOL,
    )
}

/// Closed form for the uniform radial density,
/// `r*(alpha) = (1 - sqrt(1 + alpha - 2 alpha^2)) / alpha * r0`; reference
/// path that the root finder must reproduce.
pub fn uniform_radius_closed_form(alpha: f64, r0: f64) -> f64 {
    if alpha <= 0.5 {
        return 0.0;
    }
    (1.0 - (1.0 + alpha - 2.0 * alpha * alpha).sqrt()) / alpha * r0
}

/// The misaligned adviser's report against a trust ball: the antipodal
/// boundary point `center + r* (center - mu) / ||center - mu||`.
///
/// Errors when `mu` equals the center: every boundary point is then equally
/// (Bregman-)far and the caller must break the indifference itself.
pub fn antipodal_report(inst: &SphericalInstance, r_star: f64, mu: &Belief) -> Result<Belief> {
    if !(0.0..=inst.r0).contains(&r_star) {
        return Err(Error::input(format!(
            "radius {r_star} outside [0, {}]",
            inst.r0
        )));
    }
    if mu.dim() != inst.dimension() {
        return Err(Error::input(format!(
            "belief has {} states, instance has {}",
            mu.dim(),
            inst.dimension()
        )));
    }
    let diff: Vec<f64> = inst
        .center
        .probs()
        .iter()
        .zip(mu.probs())
        .map(|(c, m)| c - m)
        .collect();
    let norm = diff.iter().map(|d| d * d).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return Err(Error::input(
            "belief coincides with the center: every boundary point is optimal (indifference)",
        ));
    }
    let point: Vec<f64> = inst
        .center
        .probs()
        .iter()
        .zip(&diff)
        .map(|(c, d)| {
            let x = c + r_star * d / norm;
            // Clamp pure rounding noise at the simplex boundary.
            if (-1e-12..0.0).contains(&x) {
                0.0
            } else {
                x
            }
        })
        .collect();
    Belief::new(point)
}

/// Strictly convex radial utilities for certification checks. The solver
/// itself never consumes one; the trust radius is a property of `tau`
/// alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadialUtility {
    /// `V(x) = x^2`.
    Square,
    /// `V(x) = x^4 + x^2`.
    Quartic,
}

impl RadialUtility {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            RadialUtility::Square => x * x,
            RadialUtility::Quartic => x * x * x * x + x * x,
        }
    }

    pub fn d1(&self, x: f64) -> f64 {
        match self {
            RadialUtility::Square => 2.0 * x,
            RadialUtility::Quartic => 4.0 * x * x * x + 2.0 * x,
        }
    }
}

/// Bregman distance of `U(mu) = V(||mu - center||)` between a belief `m`
/// and a report `mprime`:
/// `V(||m - c||) - V(r') - V'(r') (n·(m - c) - r')` with `r' = ||mprime - c||`
/// and `n` the unit direction of `mprime - c`.
pub fn radial_bregman(
    v: RadialUtility,
    center: &Belief,
    m: &Belief,
    mprime: &Belief,
) -> Result<f64> {
    let dim = center.dim();
    if m.dim() != dim || mprime.dim() != dim {
        return Err(Error::input(
            "dimension mismatch in radial Bregman distance",
        ));
    }
    let from_center = |x: &Belief| -> Vec<f64> {
        x.probs()
            .iter()
            .zip(center.probs())
            .map(|(a, c)| a - c)
            .collect()
    };
    let dm = from_center(m);
    let dp = from_center(mprime);
    let rm = dm.iter().map(|d| d * d).sum::<f64>().sqrt();
    let rp = dp.iter().map(|d| d * d).sum::<f64>().sqrt();
    if rp < 1e-15 {
        // Gradient at the center is zero for smooth radial utilities.
        return Ok(v.eval(rm) - v.eval(0.0));
    }
    let align: f64 = dm.iter().zip(&dp).map(|(a, b)| a * b).sum::<f64>() / rp;
    Ok(v.eval(rm) - v.eval(rp) - v.d1(rp) * (align - rp))
}
