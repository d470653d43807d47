//! Piecewise-linear nonnegative functions with exact partial moments.
//!
//! Grid densities, radial densities, and sampled curvature profiles all
//! reduce to this type. Mass and first moments over any subinterval are
//! computed from per-cell antiderivatives, so integrals of the interpolant
//! are exact rather than approximated by a second quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPiecewise")]
pub struct PiecewiseLinear {
    knots: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawPiecewise {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawPiecewise> for PiecewiseLinear {
    type Error = Error;

    fn try_from(raw: RawPiecewise) -> Result<Self> {
        PiecewiseLinear::new(raw.knots, raw.values)
    }
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::input("piecewise function needs at least two knots"));
        }
        if knots.len() != values.len() {
            return Err(Error::input(format!(
                "knot/value length mismatch: {} vs {}",
                knots.len(),
                values.len()
            )));
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::input("knots must be strictly increasing"));
        }
        if knots.iter().chain(values.iter()).any(|x| !x.is_finite()) {
            return Err(Error::input("knots and values must be finite"));
        }
        if values.iter().any(|&v| v < 0.0) {
            return Err(Error::input("values must be nonnegative"));
        }
        Ok(Self { knots, values })
    }

    /// Constant value `c` on `[a, b]`.
    pub fn constant(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![c, c])
    }

    /// Samples `f` on `n + 1` evenly spaced knots over `[a, b]`.
    pub fn sample<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("sample: need at least one cell"));
        }
        let knots: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
        let values = knots.iter().map(|&x| f(x)).collect();
        Self::new(knots, values)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().unwrap())
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Linear interpolation inside the domain, zero outside.
    pub fn value_at(&self, x: f64) -> f64 {
        let (a, b) = self.domain();
        if x < a || x > b {
            return 0.0;
        }
        let i = self.cell_index(x);
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let t = (x - x0) / (x1 - x0);
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }

    fn cell_index(&self, x: f64) -> usize {
        match self.knots.binary_search_by(|k| k.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.knots.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.knots.len() - 2),
        }
    }

    /// Exact `(∫ f, ∫ x·f)` over `[lo, hi]` clipped to the domain.
    pub fn partial_moments(&self, lo: f64, hi: f64) -> Result<(f64, f64)> {
        if !(lo <= hi) {
            return Err(Error::input(format!(
                "partial_moments: inverted bounds [{lo}, {hi}]"
            )));
        }
        let (da, db) = self.domain();
        let lo = lo.max(da);
        let hi = hi.min(db);
        if lo >= hi {
            return Ok((0.0, 0.0));
        }
        let mut m0 = 0.0;
        let mut m1 = 0.0;
        let first = self.cell_index(lo);
        for i in first..self.knots.len() - 1 {
            let (x0, x1) = (self.knots[i], self.knots[i + 1]);
            if x0 >= hi {
                break;
            }
            let a = lo.max(x0);
            let b = hi.min(x1);
            if a >= b {
                continue;
            }
            let v0 = self.values[i];
            let slope = (self.values[i + 1] - v0) / (x1 - x0);
            // Work in u = x - x0 to keep the cubic terms well conditioned.
            let ua = a - x0;
            let ub = b - x0;
            let c0 = v0 * (ub - ua) + 0.5 * slope * (ub * ub - ua * ua);
            let c1 = 0.5 * v0 * (ub * ub - ua * ua) + slope * (ub * ub * ub - ua * ua * ua) / 3.0;
            m0 += c0;
            m1 += x0 * c0 + c1;
        }
        Ok((m0, m1))
    }

    pub fn total_mass(&self) -> f64 {
        let (a, b) = self.domain();
        self.partial_moments(a, b).expect("valid domain").0
    }

    pub fn mean(&self) -> f64 {
        let (a, b) = self.domain();
        let (m0, m1) = self.partial_moments(a, b).expect("valid domain");
        m1 / m0
    }

    /// Rescales values so the total mass is one.
    pub fn normalized(&self) -> Result<Self> {
        let mass = self.total_mass();
        if mass <= 0.0 {
            return Err(Error::input("cannot normalize a zero-mass function"));
        }
        Self::new(
            self.knots.clone(),
            self.values.iter().map(|v| v / mass).collect(),
        )
    }
}
