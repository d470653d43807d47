//! Minimal viable alignment via a finite linear program.
//!
//! Identify the adviser's information with a row-stochastic `N x K` signal
//! matrix `Pi`. The composite channel under alignment `alpha` is the
//! garbling `G = alpha I + (1 - alpha) B` for a stochastic adversary matrix
//! `B`, and the adviser can be rendered uninformative exactly when
//! `D(Pi) G = 0`, where `D(Pi)` stacks the row differences
//! `pi_i - pi_1`. The largest such `alpha`,
//!
//! ```text
//! max alpha   s.t.   G >= alpha I,  G 1 = 1,  D(Pi) G = 0,
//! ```
//!
//! is the minimal viable alignment: above it the agent strictly benefits
//! from the adviser in any problem with strictly convex indirect utility.
//! The optimum always lies in `[1/R, 1/2]` for `R = rank(Pi) >= 2`, hitting
//! `1/K` when `Pi` has full column rank, and every value in `[1/N, 1/2]` is
//! attained by an explicit one-parameter family of signal matrices.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{Cmp, Problem};

/// Row-sum tolerance for stochastic matrices.
pub const ROW_SUM_TOL: f64 = 1e-12;
/// Relative singular-value threshold for numerical rank.
pub const RANK_RTOL: f64 = 1e-9;
/// Certificate constraint tolerance.
pub const CERT_TOL: f64 = 1e-8;

/// A row-stochastic `N x K` signal matrix: `entries[i][j]` is the
/// probability of signal `j` in state `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SignalMatrix {
    entries: Vec<Vec<f64>>,
}

impl TryFrom<Vec<Vec<f64>>> for SignalMatrix {
    type Error = Error;

    fn try_from(entries: Vec<Vec<f64>>) -> Result<Self> {
        SignalMatrix::new(entries)
    }
}

impl From<SignalMatrix> for Vec<Vec<f64>> {
    fn from(m: SignalMatrix) -> Vec<Vec<f64>> {
        m.entries
    }
}

impl SignalMatrix {
    pub fn new(entries: Vec<Vec<f64>>) -> Result<Self> {
        let n = entries.len();
        if n < 2 {
            return Err(Error::input("signal matrix needs at least two states"));
        }
        let k = entries[0].len();
        if k < 2 {
            return Err(Error::input("signal matrix needs at least two signals"));
        }
        for (i, row) in entries.iter().enumerate() {
            if row.len() != k {
                return Err(Error::input(format!(
                    "row {i} has {} entries, expected {k}",
                    row.len()
                )));
            }
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::input(format!("row {i} has negative entries")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::input(format!(
                    "row {i} sums to {sum}, expected 1 within {ROW_SUM_TOL:e}"
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn identity(k: usize) -> Result<Self> {
        let entries = (0..k)
            .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::new(entries)
    }

    pub fn n_states(&self) -> usize {
        self.entries.len()
    }

    pub fn n_signals(&self) -> usize {
        self.entries[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.entries
    }

    /// `D(Pi)`: rows `pi_i - pi_1` for `i = 2..N`.
    pub fn row_difference(&self) -> Vec<Vec<f64>> {
        let first = &self.entries[0];
        self.entries[1..]
            .iter()
            .map(|row| row.iter().zip(first).map(|(a, b)| a - b).collect())
            .collect()
    }

    /// Numerical rank with a relative singular-value threshold, plus the
    /// kept singular values (largest first).
    pub fn rank_with_spectrum(&self) -> (usize, Vec<f64>) {
        let n = self.n_states();
        let k = self.n_signals();
        let m = DMatrix::from_fn(n, k, |i, j| self.entries[i][j]);
        let mut sv: Vec<f64> = m
            .svd(false, false)
            .singular_values
            .iter()
            .cloned()
            .collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let cut = RANK_RTOL * sv.first().copied().unwrap_or(0.0);
        let rank = sv.iter().filter(|&&s| s > cut).count();
        (rank, sv)
    }

    pub fn rank(&self) -> usize {
        self.rank_with_spectrum().0
    }
}

/// Output of the minimal-viable-alignment program with its certificates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MvaSolution {
    /// The optimum: the largest alignment at which the adviser can still be
    /// silenced.
    pub alpha_star: f64,
    /// Optimal garbling `G` (the composite channel certificate).
    pub garbling: Vec<Vec<f64>>,
    /// Adversary matrix `B = (G - alpha I) / (1 - alpha)`; absent in the
    /// degenerate `alpha_star = 1` case (rank-one signal matrices).
    pub adversary: Option<Vec<Vec<f64>>>,
    /// Numerical rank `R` of the signal matrix.
    pub rank: usize,
    /// Row-difference matrix `D(Pi)` used in the program.
    pub row_difference: Vec<Vec<f64>>,
    /// Singular values of `Pi`, largest first.
    pub singular_values: Vec<f64>,
    /// Set when the smallest kept singular value sits within a decade of
    /// the rank threshold, i.e. the reported rank is fragile.
    pub near_degenerate_rank: bool,
}

/// Solves the alignment-threshold LP for a signal matrix.
pub fn solve_mva(pi: &SignalMatrix) -> Result<MvaSolution> {
    let k = pi.n_signals();
    let d = pi.row_difference();
    // Variables: G row-major (K*K), then alpha.
    let n_vars = k * k + 1;
    let alpha_ix = k * k;
    let mut objective = vec![0.0; n_vars];
    objective[alpha_ix] = -1.0; // maximize alpha
    let mut lp = Problem::minimize(objective);

    // Rows of G are probability vectors.
    for i in 0..k {
        let mut row = vec![0.0; n_vars];
        for j in 0..k {
            row[i * k + j] = 1.0;
        }
        lp.constrain(row, Cmp::Eq, 1.0);
    }
    // Uninformativeness: D(Pi) G = 0, column by column.
    for drow in &d {
        for j in 0..k {
            let mut row = vec![0.0; n_vars];
            for (l, &coef) in drow.iter().enumerate() {
                row[l * k + j] = coef;
            }
            lp.constrain(row, Cmp::Eq, 0.0);
        }
    }
    // Diagonal dominance by the alignment mass: G_kk >= alpha.
    for i in 0..k {
        let mut row = vec![0.0; n_vars];
        row[i * k + i] = 1.0;
        row[alpha_ix] = -1.0;
        lp.constrain(row, Cmp::Ge, 0.0);
    }
    let mut cap = vec![0.0; n_vars];
    cap[alpha_ix] = 1.0;
    lp.constrain(cap, Cmp::Le, 1.0);

    let sol = lp.solve().map_err(|e| {
        // The uniform garbling at alpha = 0 is always feasible, so a
        // phase-1 failure means something is broken internally.
        Error::Internal(format!("MVA program unexpectedly failed: {e}"))
    })?;
    let alpha_star = sol.x[alpha_ix];
    let garbling: Vec<Vec<f64>> = (0..k).map(|i| sol.x[i * k..(i + 1) * k].to_vec()).collect();
    let adversary = if alpha_star < 1.0 - 1e-12 {
        Some(
            (0..k)
                .map(|i| {
                    (0..k)
                        .map(|j| {
                            let id = if i == j { alpha_star } else { 0.0 };
                            ((garbling[i][j] - id) / (1.0 - alpha_star)).max(0.0)
                        })
                        .collect()
                })
                .collect(),
        )
    } else {
        None
    };
    let (rank, singular_values) = pi.rank_with_spectrum();
    let cut = RANK_RTOL * singular_values.first().copied().unwrap_or(0.0);
    let near_degenerate_rank = singular_values
        .iter()
        .filter(|&&s| s > cut)
        .any(|&s| s <= 10.0 * cut);
    Ok(MvaSolution {
        alpha_star,
        garbling,
        adversary,
        rank,
        row_difference: d,
        singular_values,
        near_degenerate_rank,
    })
}

/// The explicit signal-matrix family attaining `MVA = 1/(2 + delta (K-3))`.
///
/// Rows: the first and every row past `K-1` are uniform; rows `2..K-2`
/// shift one signal's mass off the first signal; row `K-1` splits the shift
/// between the first and last signals with weight `delta`. The validity
/// window `delta >= (K-4)/(K-3)` is exactly where the bound is attained.
pub fn construct_target_mva(n_states: usize, k_signals: usize, delta: f64) -> Result<SignalMatrix> {
    if n_states < 3 {
        return Err(Error::input(format!(
            "target construction needs at least 3 states, got {n_states} \
             (binary-state thresholds stop at 1/2)"
        )));
    }
    if k_signals < 4 || k_signals > n_states + 1 {
        return Err(Error::input(format!(
            "signal count {k_signals} outside the validity window [4, N + 1] = [4, {}]",
            n_states + 1
        )));
    }
    let lo = (k_signals as f64 - 4.0) / (k_signals as f64 - 3.0);
    if !(delta >= lo && delta <= 1.0) {
        return Err(Error::input(format!(
            "delta {delta} outside the validity window [{lo}, 1] for K = {k_signals}"
        )));
    }
    let k = k_signals;
    let base = 1.0 / k as f64;
    let mut entries = vec![vec![base; k]; n_states];
    for i in 1..=k - 3 {
        // Middle rows: bump one signal, zero out the first.
        entries[i][i] = 2.0 * base;
        entries[i][0] = 0.0;
    }
    // Next-to-last row: bump signal K-1, split the removal by delta.
    entries[k - 2][k - 2] = 2.0 * base;
    entries[k - 2][0] = (1.0 - delta) * base;
    entries[k - 2][k - 1] = delta * base;
    SignalMatrix::new(entries)
}

/// `alpha^† = 1/(2 + delta (K - 3))`, the family's closed-form threshold.
pub fn target_alpha(k_signals: usize, delta: f64) -> f64 {
    1.0 / (2.0 + delta * (k_signals as f64 - 3.0))
}
