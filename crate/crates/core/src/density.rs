//! Distributions of the aligned adviser's posteriors.
//!
//! Three shapes cover every solver in the crate: a strictly positive density
//! on `[0, 1]` (binary-state solvers), a radial profile on `[0, r0]`
//! (spherical environments; the profile is the density of the radius itself,
//! integrated one-dimensionally along a diameter), and a finite atom list
//! (game oracle, binary actions).

use serde::{Deserialize, Serialize};

use crate::belief::Belief;
use crate::error::{Error, Result};
use crate::piecewise::PiecewiseLinear;

/// Tolerance for normalization and Bayes-plausibility checks.
pub const MASS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BeliefDensity {
    /// Full-support density of the posterior `mu = Pr(state 1)` on `[0, 1]`.
    Grid { density: PiecewiseLinear },
    /// Density of the radius `r` on `[0, r0]` for a spherical environment.
    Radial { density: PiecewiseLinear },
    /// Finitely many posterior atoms with probabilities.
    Finite { atoms: Vec<(Belief, f64)> },
}

impl BeliefDensity {
    /// Uniform posterior density on `[0, 1]`.
    pub fn uniform() -> Self {
        BeliefDensity::Grid {
            density: PiecewiseLinear::constant(0.0, 1.0, 1.0).expect("static input"),
        }
    }

    pub fn grid(density: PiecewiseLinear) -> Result<Self> {
        let (a, b) = density.domain();
        if a.abs() > 1e-12 || (b - 1.0).abs() > 1e-12 {
            return Err(Error::input(format!(
                "grid density must span [0, 1], got [{a}, {b}]"
            )));
        }
        if density.min_value() <= 0.0 {
            return Err(Error::input("grid density must be strictly positive"));
        }
        let mass = density.total_mass();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::input(format!(
                "grid density integrates to {mass}, expected 1 within {MASS_TOL:e}"
            )));
        }
        Ok(BeliefDensity::Grid { density })
    }

    pub fn radial(density: PiecewiseLinear) -> Result<Self> {
        let (a, _) = density.domain();
        if a.abs() > 1e-12 {
            return Err(Error::input("radial density must start at r = 0"));
        }
        let mass = density.total_mass();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::input(format!(
                "radial density integrates to {mass}, expected 1 within {MASS_TOL:e}"
            )));
        }
        Ok(BeliefDensity::Radial { density })
    }

    pub fn finite(atoms: Vec<(Belief, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::input("finite support needs at least one atom"));
        }
        let dim = atoms[0].0.dim();
        if atoms.iter().any(|(b, _)| b.dim() != dim) {
            return Err(Error::input("finite-support atoms must share a dimension"));
        }
        if atoms.iter().any(|(_, p)| !p.is_finite() || *p < 0.0) {
            return Err(Error::input("atom probabilities must be nonnegative"));
        }
        let total: f64 = atoms.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::input(format!(
                "atom probabilities sum to {total}, expected 1 within {MASS_TOL:e}"
            )));
        }
        Ok(BeliefDensity::Finite { atoms })
    }

    /// Binary finite support from `(mu, probability)` pairs.
    pub fn binary_atoms(pairs: &[(f64, f64)]) -> Result<Self> {
        let atoms = pairs
            .iter()
            .map(|&(mu, p)| Ok((Belief::binary(mu)?, p)))
            .collect::<Result<Vec<_>>>()?;
        Self::finite(atoms)
    }

    /// The implied prior: the mean posterior (Bayes plausibility).
    pub fn prior(&self) -> Result<Belief> {
        match self {
            BeliefDensity::Grid { density } => Belief::binary(density.mean()),
            BeliefDensity::Radial { .. } => Err(Error::input(
                "radial profiles are centered; the prior lives on the spherical instance",
            )),
            BeliefDensity::Finite { atoms } => {
                let dim = atoms[0].0.dim();
                let mut mean = vec![0.0; dim];
                for (b, p) in atoms {
                    for (m, q) in mean.iter_mut().zip(b.probs()) {
                        *m += p * q;
                    }
                }
                Belief::new(mean)
            }
        }
    }

    /// Scalar prior for one-dimensional (binary or radial-coordinate) use.
    pub fn prior_scalar(&self) -> Result<f64> {
        match self {
            BeliefDensity::Grid { density } => Ok(density.mean()),
            _ => self.prior()?.prob_one(),
        }
    }

    /// `(mass, first moment)` of the scalar coordinate over `[lo, hi]`,
    /// inclusive of boundary atoms.
    pub fn partial_moments(&self, lo: f64, hi: f64) -> Result<(f64, f64)> {
        if !(lo <= hi) {
            return Err(Error::input(format!(
                "density moments: inverted bounds [{lo}, {hi}]"
            )));
        }
        match self {
            BeliefDensity::Grid { density } | BeliefDensity::Radial { density } => {
                density.partial_moments(lo, hi)
            }
            BeliefDensity::Finite { atoms } => {
                let mut m0 = 0.0;
                let mut m1 = 0.0;
                for (b, p) in atoms {
                    let mu = b.prob_one()?;
                    if mu >= lo && mu <= hi {
                        m0 += p;
                        m1 += p * mu;
                    }
                }
                Ok((m0, m1))
            }
        }
    }

    /// `(mass, conditional mean)` over `[lo, hi]`; the mean is `NaN` on an
    /// empty range.
    pub fn moments(&self, lo: f64, hi: f64) -> Result<(f64, f64)> {
        let (m0, m1) = self.partial_moments(lo, hi)?;
        Ok((m0, m1 / m0))
    }

    /// Density value at a point (grid and radial shapes only).
    pub fn value_at(&self, x: f64) -> Result<f64> {
        match self {
            BeliefDensity::Grid { density } | BeliefDensity::Radial { density } => {
                Ok(density.value_at(x))
            }
            BeliefDensity::Finite { .. } => Err(Error::input(
                "finite-support distributions have no density values",
            )),
        }
    }

    pub fn is_grid(&self) -> bool {
        matches!(self, BeliefDensity::Grid { .. })
    }
}
