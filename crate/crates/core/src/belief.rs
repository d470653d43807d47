//! Points on the probability simplex over states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the simplex sum constraint.
pub const SUM_TOL: f64 = 1e-12;

/// A belief over `N` states. In binary-state problems the belief is handled
/// as the scalar probability of state 1; [`Belief::binary`] and
/// [`Belief::prob_one`] convert between the two views.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Belief {
    probs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for Belief {
    type Error = Error;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Belief::new(probs)
    }
}

impl From<Belief> for Vec<f64> {
    fn from(b: Belief) -> Vec<f64> {
        b.probs
    }
}

impl Belief {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::input("belief needs at least one state"));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::input(
                "belief entries must be finite and nonnegative",
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::input(format!(
                "belief entries sum to {sum}, expected 1 within {SUM_TOL:e}"
            )));
        }
        Ok(Self { probs })
    }

    /// Binary-state belief with `mu = Pr(state 1)`.
    pub fn binary(mu: f64) -> Result<Self> {
        check_unit_scalar(mu)?;
        Ok(Self {
            probs: vec![1.0 - mu, mu],
        })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("belief needs at least one state"));
        }
        Ok(Self {
            probs: vec![1.0 / n as f64; n],
        })
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// The scalar `Pr(state 1)` of a binary belief.
    pub fn prob_one(&self) -> Result<f64> {
        if self.probs.len() != 2 {
            return Err(Error::input(format!(
                "prob_one: belief has {} states, expected 2",
                self.probs.len()
            )));
        }
        Ok(self.probs[1])
    }
}

/// Validates a scalar belief in `[0, 1]`.
pub fn check_unit_scalar(mu: f64) -> Result<()> {
    if !mu.is_finite() || !(0.0..=1.0).contains(&mu) {
        return Err(Error::input(format!("belief scalar {mu} outside [0, 1]")));
    }
    Ok(())
}
