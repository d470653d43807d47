//! Artifact schemas and writers.
//!
//! Every JSON artifact is self-contained (instance spec plus solution plus
//! `schema_version`), so `verify` can re-derive everything from the bundle
//! alone. CSV tables use `.` decimals, `,` separators, UTF-8, and LF line
//! endings; columns are fixed per task and never reorder.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use trust_core::binary_action::{AdversaryKernel, BinaryActionSolution};
use trust_core::binary_trust::TrustInterval;
use trust_core::game::{GameSpec, SaddleSolution, TrsReport};
use trust_core::transport::ConsistencyReport;
use trust_core::MvaSolution;

use crate::config::{SphericalSpec, TauSpec, UtilitySpec, VDistSpec};

/// Binary-trust solution artifact (`binary_trust.json`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BinaryTrustArtifact {
    pub schema_version: String,
    pub task: String,
    pub utility: UtilitySpec,
    pub tau: TauSpec,
    pub alpha: f64,
    pub interval: TrustInterval,
}

/// One solved row of an alignment sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepArtifact {
    pub schema_version: String,
    pub task: String,
    pub utility: Option<UtilitySpec>,
    pub tau: Option<TauSpec>,
    pub spherical: Option<SphericalSpec>,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepRow {
    Interval {
        alpha: f64,
        lo: f64,
        hi: f64,
        cutoff: f64,
    },
    Radius {
        alpha: f64,
        r_star: f64,
        residual: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MvaArtifact {
    pub schema_version: String,
    pub task: String,
    pub matrix: Vec<Vec<f64>>,
    pub solution: MvaSolution,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BinaryActionArtifact {
    pub schema_version: String,
    pub task: String,
    pub vdist: VDistSpec,
    pub alpha: f64,
    pub solution: BinaryActionSolution,
    pub kernels: Vec<AdversaryKernel>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SphericalArtifact {
    pub schema_version: String,
    pub task: String,
    pub spherical: SphericalSpec,
    pub alpha: f64,
    pub r_star: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleArtifact {
    pub schema_version: String,
    pub task: String,
    pub game: GameSpec,
    pub solution: SaddleSolution,
    pub structure: TrsReport,
}

/// Transport-map verification artifact (`tre_verification.json`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreArtifact {
    pub schema_version: String,
    pub task: String,
    pub utility: UtilitySpec,
    pub tau: TauSpec,
    pub alpha: f64,
    pub interval: TrustInterval,
    pub map: TransportMapArtifact,
    pub report: ConsistencyReport,
    pub side_audit: SideAudit,
}

/// Serialized transport map: regime, thresholds, and sampled knots per
/// monotone piece.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransportMapArtifact {
    pub regime: trust_core::transport::Regime,
    pub pieces: Vec<TransportPieceArtifact>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransportPieceArtifact {
    pub source: (f64, f64),
    pub target: (f64, f64),
    /// `(source belief, emitted message)` samples.
    pub knots: Vec<(f64, f64)>,
}

/// Seeded audit that sampled beliefs emit messages on their Bregman-optimal
/// side of the trust interval.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SideAudit {
    pub seed: u64,
    pub samples: usize,
    pub mismatches: usize,
}

pub fn map_artifact(
    map: &trust_core::TransportMap,
    knots_per_piece: usize,
) -> TransportMapArtifact {
    let knots = map.sampled_knots(knots_per_piece);
    TransportMapArtifact {
        regime: map.regime.clone(),
        pieces: map
            .pieces
            .iter()
            .zip(knots)
            .map(|(p, knots)| TransportPieceArtifact {
                source: p.source,
                target: p.target,
                knots,
            })
            .collect(),
    }
}

/// Formats a real with up to nine significant decimals, trimming trailing
/// zeros (`0.75` stays `0.75`, never `0.750000000`).
pub fn fmt_real(x: f64) -> String {
    let s = format!("{x:.9}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    match s {
        "" | "-" | "-0" => "0".to_string(),
        _ => s.to_string(),
    }
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| anyhow::anyhow!("creating {}: {e}", dir.display()))?;
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| anyhow::anyhow!("writing {}: {e}", path.display()))?;
    Ok(path)
}

pub fn write_csv(
    dir: &Path,
    name: &str,
    header: &str,
    rows: &[Vec<f64>],
) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| anyhow::anyhow!("creating {}: {e}", dir.display()))?;
    let path = dir.join(name);
    let mut out = Vec::new();
    writeln!(out, "{header}")?;
    for row in rows {
        let fields: Vec<String> = row.iter().map(|&v| fmt_real(v)).collect();
        writeln!(out, "{}", fields.join(","))?;
    }
    fs::write(&path, out).map_err(|e| anyhow::anyhow!("writing {}: {e}", path.display()))?;
    Ok(path)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<T> {
    let text =
        fs::read_to_string(path).map_err(|e| anyhow::anyhow!("reading {}: {e}", path.display()))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de)
        .map_err(|e| anyhow::anyhow!("{} field `{}`: {}", path.display(), e.path(), e.inner()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_formatting() {
        assert_eq!(fmt_real(0.75), "0.75");
        assert_eq!(fmt_real(0.5), "0.5");
        assert_eq!(fmt_real(1.0), "1");
        assert_eq!(fmt_real(0.0), "0");
        assert_eq!(fmt_real(-0.0), "0");
        assert_eq!(fmt_real(0.360379610028), "0.36037961");
        assert_eq!(fmt_real(-2.25), "-2.25");
    }
}
