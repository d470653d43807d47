//! Experiment configuration: a single JSON document per run.
//!
//! Numeric fields accept either JSON numbers or exact decimal strings
//! (`"alpha": "0.75"`), so golden configs can pin values without binary
//! float drift through editors or generators.

use std::fmt;
use std::path::PathBuf;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use trust_core::piecewise::PiecewiseLinear;
use trust_core::spherical::SphericalInstance;
use trust_core::{Belief, BeliefDensity, RelativePayoffDist, SignalMatrix, UtilityCurve};

/// A real number deserializable from a number or a decimal string.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Real(pub f64);

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct RealVisitor;
        impl Visitor<'_> for RealVisitor {
            type Value = Real;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a decimal string")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Real, E> {
                Ok(Real(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Real, E> {
                Ok(Real(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Real, E> {
                Ok(Real(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Real, E> {
                v.trim()
                    .parse::<f64>()
                    .map(Real)
                    .map_err(|_| E::custom(format!("cannot parse {v:?} as a real number")))
            }
        }
        d.deserialize_any(RealVisitor)
    }
}

fn reals(v: &[Real]) -> Vec<f64> {
    v.iter().map(|r| r.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    BinaryTrust,
    BinaryAction,
    Mva,
    Spherical,
    Oracle,
    Sweep,
    VerifyTre,
    VerifyBundle,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        let name = match self {
            Task::BinaryTrust => "binary-trust",
            Task::BinaryAction => "binary-action",
            Task::Mva => "mva",
            Task::Spherical => "spherical",
            Task::Oracle => "oracle",
            Task::Sweep => "sweep",
            Task::VerifyTre => "verify-tre",
            Task::VerifyBundle => "verify-bundle",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: String,
    pub task: Task,
    #[serde(default)]
    pub utility: Option<UtilitySpec>,
    #[serde(default)]
    pub tau: Option<TauSpec>,
    #[serde(default)]
    pub alpha: Option<Real>,
    #[serde(default)]
    pub alphas: Option<Vec<Real>>,
    #[serde(default)]
    pub matrix: Option<Vec<Vec<Real>>>,
    #[serde(default)]
    pub matrix_csv: Option<PathBuf>,
    #[serde(default)]
    pub game_file: Option<PathBuf>,
    #[serde(default)]
    pub vdist: Option<VDistSpec>,
    #[serde(default)]
    pub spherical: Option<SphericalSpec>,
    /// Verification cells for verify-tre (default 200).
    #[serde(default)]
    pub n_cells: Option<usize>,
    /// Sampled beliefs for the randomized side-optimality audit.
    #[serde(default)]
    pub n_samples: Option<usize>,
    /// Artifact directory for verify-bundle.
    #[serde(default)]
    pub bundle: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
}

pub fn default_schema_version() -> String {
    "1".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum UtilitySpec {
    QuadraticLoss,
    LogScore,
    WeightedQuadratic { gamma: Real },
    LinearCurvature { c0: Real, c1: Real },
    CustomGrid { d2: Vec<Real> },
}

impl UtilitySpec {
    pub fn build(&self) -> trust_core::Result<UtilityCurve> {
        match self {
            UtilitySpec::QuadraticLoss => Ok(UtilityCurve::quadratic_loss()),
            UtilitySpec::LogScore => Ok(UtilityCurve::log_score()),
            UtilitySpec::WeightedQuadratic { gamma } => UtilityCurve::weighted_quadratic(gamma.0),
            UtilitySpec::LinearCurvature { c0, c1 } => UtilityCurve::linear_curvature(c0.0, c1.0),
            UtilitySpec::CustomGrid { d2 } => UtilityCurve::from_d2_samples(reals(d2)),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TauSpec {
    Uniform,
    Grid { knots: Vec<Real>, values: Vec<Real> },
    Atoms { atoms: Vec<(Real, Real)> },
}

impl TauSpec {
    pub fn build(&self) -> trust_core::Result<BeliefDensity> {
        match self {
            TauSpec::Uniform => Ok(BeliefDensity::uniform()),
            TauSpec::Grid { knots, values } => {
                BeliefDensity::grid(PiecewiseLinear::new(reals(knots), reals(values))?)
            }
            TauSpec::Atoms { atoms } => {
                let pairs: Vec<(f64, f64)> = atoms.iter().map(|(m, p)| (m.0, p.0)).collect();
                BeliefDensity::binary_atoms(&pairs)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VDistSpec {
    Atoms { atoms: Vec<(Real, Real)> },
    Density { knots: Vec<Real>, values: Vec<Real> },
}

impl VDistSpec {
    pub fn build(&self) -> trust_core::Result<RelativePayoffDist> {
        match self {
            VDistSpec::Atoms { atoms } => {
                RelativePayoffDist::atoms(atoms.iter().map(|(v, p)| (v.0, p.0)).collect())
            }
            VDistSpec::Density { knots, values } => {
                RelativePayoffDist::density(PiecewiseLinear::new(reals(knots), reals(values))?)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphericalSpec {
    pub center: Vec<Real>,
    pub r0: Real,
    /// Radial density knots/values on `[0, r0]`; omitted means uniform.
    #[serde(default)]
    pub radial_knots: Option<Vec<Real>>,
    #[serde(default)]
    pub radial_values: Option<Vec<Real>>,
}

impl SphericalSpec {
    pub fn build(&self) -> trust_core::Result<SphericalInstance> {
        let center = Belief::new(reals(&self.center))?;
        match (&self.radial_knots, &self.radial_values) {
            (Some(k), Some(v)) => {
                SphericalInstance::new(center, self.r0.0, PiecewiseLinear::new(reals(k), reals(v))?)
            }
            (None, None) => SphericalInstance::uniform(center, self.r0.0),
            _ => Err(trust_core::Error::InvalidInput(
                "radial_knots and radial_values must be given together".to_string(),
            )),
        }
    }
}

impl ExperimentConfig {
    pub fn signal_matrix(&self) -> anyhow::Result<SignalMatrix> {
        if let Some(matrix) = &self.matrix {
            let rows = matrix.iter().map(|r| reals(r)).collect();
            return Ok(SignalMatrix::new(rows)?);
        }
        let Some(path) = &self.matrix_csv else {
            anyhow::bail!("mva task needs `matrix` or `matrix_csv`");
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("matrix_csv {}: {e}", path.display()))?;
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|f| {
                    f.trim().parse::<f64>().map_err(|_| {
                        anyhow::anyhow!(
                            "matrix_csv {} line {}: bad entry {f:?}",
                            path.display(),
                            lineno + 1
                        )
                    })
                })
                .collect::<anyhow::Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Ok(SignalMatrix::new(rows)?)
    }
}

/// Parses a config document, reporting the JSON path of any failing field.
pub fn parse_config(text: &str) -> anyhow::Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de)
        .map_err(|e| anyhow::anyhow!("config field `{}`: {}", e.path(), e.inner()))
}
