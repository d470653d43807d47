//! Indirect utility curves `U(mu)` on binary beliefs.
//!
//! The solvers only ever consume `U`, `U'`, and `U''`. Closed forms carry
//! exact derivatives; sampled curvature grids synthesize `U'` and `U` by
//! cumulative integration anchored at `mu = 0` (an affine shift of `U` is
//! irrelevant to Bregman distances and curvature cutoffs).
//!
//! Curvature moments `(∫ U'', ∫ mu U'')` over an interval drive the cutoff
//! belief. For closed forms they follow from the fundamental theorem and
//! integration by parts,
//!
//! ```text
//! ∫_a^b U'' = U'(b) - U'(a),
//! ∫_a^b mu U'' = b U'(b) - a U'(a) - (U(b) - U(a)),
//! ```
//!
//! which keeps them exact even where `U''` is
//! near-singular (log score at the simplex boundary).

use serde::{Deserialize, Serialize};

use crate::belief::check_unit_scalar;
use crate::error::{Error, Result};
use crate::piecewise::PiecewiseLinear;

/// Clamp applied to log-score evaluations; `U'' = 1/(mu(1-mu))` blows up at
/// the boundary.
pub const LOG_SCORE_CLAMP: f64 = 1e-12;

/// A strictly convex, twice differentiable indirect utility on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum UtilityCurve {
    /// Squared-loss decision problem: `U(mu) = mu^2 - mu`, `U'' = 2`.
    QuadraticLoss,
    /// Log scoring rule (negative Shannon entropy):
    /// `U(mu) = mu ln mu + (1-mu) ln(1-mu)`.
    LogScore,
    /// Squared loss with the state-1 loss scaled by `gamma > 0`:
    /// `U(mu) = -gamma mu (1-mu) / (1 + (gamma-1) mu)`.
    WeightedQuadratic { gamma: f64 },
    /// Explicit affine curvature `U''(mu) = c0 + c1 mu`, anchored at
    /// `U(0) = U'(0) = 0`.
    LinearCurvature { c0: f64, c1: f64 },
    /// Curvature sampled on a grid over `[0, 1]`.
    CustomGrid(GridCurve),
}

impl UtilityCurve {
    pub fn quadratic_loss() -> Self {
        UtilityCurve::QuadraticLoss
    }

    pub fn log_score() -> Self {
        UtilityCurve::LogScore
    }

    pub fn weighted_quadratic(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::input(format!(
                "weighted quadratic needs gamma > 0, got {gamma}"
            )));
        }
        Ok(UtilityCurve::WeightedQuadratic { gamma })
    }

    /// `U''(mu) = c0 + c1 mu`; requires strict positivity on `[0, 1]`.
    pub fn linear_curvature(c0: f64, c1: f64) -> Result<Self> {
        if !(c0 > 0.0 && c0 + c1 > 0.0) {
            return Err(Error::input(format!(
                "linear curvature {c0} + {c1} mu must stay positive on [0, 1]"
            )));
        }
        Ok(UtilityCurve::LinearCurvature { c0, c1 })
    }

    /// Builds a curve from `U''` samples on `n + 1` evenly spaced knots.
    pub fn from_d2_samples(d2: Vec<f64>) -> Result<Self> {
        let n = d2.len();
        if n < 2 {
            return Err(Error::input("custom grid needs at least two samples"));
        }
        let knots = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        Ok(UtilityCurve::CustomGrid(GridCurve::new(
            PiecewiseLinear::new(knots, d2)?,
        )?))
    }

    /// Closed-form tag, used in reports and artifacts.
    pub fn kind(&self) -> &'static str {
        match self {
            UtilityCurve::QuadraticLoss => "quadratic-loss",
            UtilityCurve::LogScore => "log-score",
            UtilityCurve::WeightedQuadratic { .. } => "weighted-quadratic",
            UtilityCurve::LinearCurvature { .. } => "linear-curvature",
            UtilityCurve::CustomGrid(_) => "custom-grid",
        }
    }

    pub fn eval(&self, mu: f64) -> f64 {
        match self {
            UtilityCurve::QuadraticLoss => mu * mu - mu,
            UtilityCurve::LogScore => {
                let m = clamp_unit(mu);
                m * m.ln() + (1.0 - m) * (1.0 - m).ln()
            }
            UtilityCurve::WeightedQuadratic { gamma } => {
                gamma * mu * (mu - 1.0) / denom(*gamma, mu)
            }
            UtilityCurve::LinearCurvature { c0, c1 } => {
                0.5 * c0 * mu * mu + c1 * mu * mu * mu / 6.0
            }
            UtilityCurve::CustomGrid(g) => g.eval(mu),
        }
    }

    pub fn d1(&self, mu: f64) -> f64 {
        match self {
            UtilityCurve::QuadraticLoss => 2.0 * mu - 1.0,
            UtilityCurve::LogScore => {
                let m = clamp_unit(mu);
                (m / (1.0 - m)).ln()
            }
            UtilityCurve::WeightedQuadratic { gamma } => {
                let d = denom(*gamma, mu);
                gamma * ((gamma - 1.0) * mu * mu + 2.0 * mu - 1.0) / (d * d)
            }
            UtilityCurve::LinearCurvature { c0, c1 } => c0 * mu + 0.5 * c1 * mu * mu,
            UtilityCurve::CustomGrid(g) => g.d1(mu),
        }
    }

    pub fn d2(&self, mu: f64) -> f64 {
        match self {
            UtilityCurve::QuadraticLoss => 2.0,
            UtilityCurve::LogScore => {
                let m = clamp_unit(mu);
                1.0 / (m * (1.0 - m))
            }
            UtilityCurve::WeightedQuadratic { gamma } => {
                let d = denom(*gamma, mu);
                2.0 * gamma * gamma / (d * d * d)
            }
            UtilityCurve::LinearCurvature { c0, c1 } => c0 + c1 * mu,
            UtilityCurve::CustomGrid(g) => g.d2(mu),
        }
    }

    /// Exact `(∫_a^b U'', ∫_a^b mu U'')`.
    pub fn d2_moments(&self, a: f64, b: f64) -> Result<(f64, f64)> {
        check_unit_scalar(a)?;
        check_unit_scalar(b)?;
        if a > b {
            return Err(Error::input(format!(
                "d2_moments: inverted bounds [{a}, {b}]"
            )));
        }
        if let UtilityCurve::CustomGrid(g) = self {
            return g.d2.partial_moments(a, b);
        }
        let (da, db) = (self.d1(a), self.d1(b));
        let m0 = db - da;
        let m1 = b * db - a * da - (self.eval(b) - self.eval(a));
        Ok((m0, m1))
    }
}

fn denom(gamma: f64, mu: f64) -> f64 {
    1.0 + (gamma - 1.0) * mu
}

fn clamp_unit(mu: f64) -> f64 {
    mu.clamp(LOG_SCORE_CLAMP, 1.0 - LOG_SCORE_CLAMP)
}

/// `U''` samples plus the cumulative integrals evaluated at the knots, so
/// that `U'` and `U` are exact integrals of the interpolated curvature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PiecewiseLinear", into = "PiecewiseLinear")]
pub struct GridCurve {
    d2: PiecewiseLinear,
    d1_at_knots: Vec<f64>,
    u_at_knots: Vec<f64>,
}

impl From<GridCurve> for PiecewiseLinear {
    fn from(g: GridCurve) -> PiecewiseLinear {
        g.d2
    }
}

impl TryFrom<PiecewiseLinear> for GridCurve {
    type Error = Error;

    fn try_from(d2: PiecewiseLinear) -> Result<Self> {
        GridCurve::new(d2)
    }
}

impl GridCurve {
    pub fn new(d2: PiecewiseLinear) -> Result<Self> {
        let (a, b) = d2.domain();
        if a.abs() > 1e-12 || (b - 1.0).abs() > 1e-12 {
            return Err(Error::input(format!(
                "curvature grid must span [0, 1], got [{a}, {b}]"
            )));
        }
        if d2.min_value() <= 0.0 {
            return Err(Error::input(
                "curvature samples must be strictly positive (strict convexity)",
            ));
        }
        let knots = d2.knots();
        let values = d2.values();
        let mut d1_at_knots = vec![0.0; knots.len()];
        let mut u_at_knots = vec![0.0; knots.len()];
        for i in 1..knots.len() {
            let w = knots[i] - knots[i - 1];
            let v0 = values[i - 1];
            let slope = (values[i] - v0) / w;
            d1_at_knots[i] = d1_at_knots[i - 1] + v0 * w + 0.5 * slope * w * w;
            u_at_knots[i] = u_at_knots[i - 1]
                + d1_at_knots[i - 1] * w
                + 0.5 * v0 * w * w
                + slope * w * w * w / 6.0;
        }
        Ok(Self {
            d2,
            d1_at_knots,
            u_at_knots,
        })
    }

    fn locate(&self, mu: f64) -> (usize, f64) {
        let knots = self.d2.knots();
        let mut i = match knots.binary_search_by(|k| k.partial_cmp(&mu).unwrap()) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        i = i.min(knots.len() - 2);
        (i, mu - knots[i])
    }

    pub fn d2(&self, mu: f64) -> f64 {
        self.d2.value_at(mu.clamp(0.0, 1.0))
    }

    pub fn d1(&self, mu: f64) -> f64 {
        let (i, u) = self.locate(mu.clamp(0.0, 1.0));
        let (v0, slope) = self.cell(i);
        self.d1_at_knots[i] + v0 * u + 0.5 * slope * u * u
    }

    pub fn eval(&self, mu: f64) -> f64 {
        let (i, u) = self.locate(mu.clamp(0.0, 1.0));
        let (v0, slope) = self.cell(i);
        self.u_at_knots[i] + self.d1_at_knots[i] * u + 0.5 * v0 * u * u + slope * u * u * u / 6.0
    }

    fn cell(&self, i: usize) -> (f64, f64) {
        let knots = self.d2.knots();
        let values = self.d2.values();
        let w = knots[i + 1] - knots[i];
        (values[i], (values[i + 1] - values[i]) / w)
    }
}
