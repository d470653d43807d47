//! Dense two-phase primal simplex for small linear programs.
//!
//! Everything this crate asks of an LP solver fits in a few hundred
//! variables (garbling certificates, saddle strategies), so a dense tableau
//! with Dantzig pricing and a Bland anti-cycling fallback is the whole
//! implementation. Variables are nonnegative; constraints may be `=`, `<=`,
//! or `>=` (slack and surplus columns are added internally).

use crate::error::{Error, Result};

/// Entering-variable threshold on reduced costs.
const PRICE_EPS: f64 = 1e-9;
/// Pivot element threshold in the ratio test; anything smaller would
/// amplify roundoff catastrophically when the row is rescaled.
const PIVOT_EPS: f64 = 1e-7;
/// Phase-1 residual above which the program is declared infeasible.
const FEAS_EPS: f64 = 1e-8;
/// Pivots before switching from Dantzig to Bland pricing.
const BLAND_AFTER: usize = 20_000;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Eq,
    Le,
    Ge,
}

/// A minimization problem over nonnegative variables.
#[derive(Debug, Clone)]
pub struct Problem {
    minimize: Vec<f64>,
    rows: Vec<Row>,
}

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<f64>,
    cmp: Cmp,
    rhs: f64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<f64>,
    pub value: f64,
}

impl Problem {
    pub fn minimize(objective: Vec<f64>) -> Self {
        Problem {
            minimize: objective,
            rows: Vec::new(),
        }
    }

    pub fn constrain(&mut self, coeffs: Vec<f64>, cmp: Cmp, rhs: f64) {
        assert_eq!(coeffs.len(), self.minimize.len(), "row width mismatch");
        self.rows.push(Row { coeffs, cmp, rhs });
    }

    /// Solves the program; `value` is `c·x` for the stored minimization
    /// objective (maximizing callers negate both ways).
    pub fn solve(&self) -> Result<Solution> {
        Tableau::build(self)?.run()
    }
}

struct Tableau {
    /// Row-major constraint matrix including slack and artificial columns.
    a: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    n_struct: usize,
    n_slack: usize,
    n_total: usize,
    cost: Vec<f64>,
}

impl Tableau {
    fn build(p: &Problem) -> Result<Self> {
        let n_struct = p.minimize.len();
        let m = p.rows.len();
        let n_slack = p.rows.iter().filter(|r| r.cmp != Cmp::Eq).count();
        let n_total = n_struct + n_slack + m; // slacks then artificials
        let mut a = vec![vec![0.0; n_total]; m];
        let mut rhs = vec![0.0; m];
        let mut basis = vec![0; m];
        let mut slack_at = n_struct;
        for (i, row) in p.rows.iter().enumerate() {
            let flip = if row.rhs < 0.0 { -1.0 } else { 1.0 };
            for (j, &c) in row.coeffs.iter().enumerate() {
                a[i][j] = flip * c;
            }
            rhs[i] = flip * row.rhs;
            match row.cmp {
                Cmp::Eq => {}
                Cmp::Le => {
                    a[i][slack_at] = flip;
                    slack_at += 1;
                }
                Cmp::Ge => {
                    a[i][slack_at] = -flip;
                    slack_at += 1;
                }
            }
            let art = n_struct + n_slack + i;
            a[i][art] = 1.0;
            basis[i] = art;
        }
        Ok(Tableau {
            a,
            rhs,
            basis,
            n_struct,
            n_slack,
            n_total,
            cost: p.minimize.clone(),
        })
    }

    fn run(mut self) -> Result<Solution> {
        // Phase 1: minimize the sum of artificials.
        let mut phase1 = vec![0.0; self.n_total];
        for j in self.n_struct + self.n_slack..self.n_total {
            phase1[j] = 1.0;
        }
        let infeas = self.optimize(&phase1, self.n_total)?;
        if infeas > FEAS_EPS {
            return Err(Error::Internal(format!(
                "linear program infeasible (phase-1 residual {infeas:.3e})"
            )));
        }
        self.evict_artificials();

        // Phase 2: artificials are barred by restricting the column range.
        let allowed = self.n_struct + self.n_slack;
        let mut phase2 = vec![0.0; self.n_total];
        phase2[..self.n_struct].copy_from_slice(&self.cost);
        let value = self.optimize(&phase2, allowed)?;
        let mut x = vec![0.0; self.n_struct];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n_struct {
                x[b] = self.rhs[i];
            }
        }
        Ok(Solution { x, value })
    }

    /// Pivots artificial variables left basic at zero out of the basis
    /// (choosing the largest available pivot element) and drops rows that
    /// have become redundant, so phase 2 never touches an artificial.
    fn evict_artificials(&mut self) {
        let art_start = self.n_struct + self.n_slack;
        let mut drop_rows = Vec::new();
        for i in 0..self.basis.len() {
            if self.basis[i] < art_start {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..art_start {
                let mag = self.a[i][j].abs();
                if mag > best.map_or(PIVOT_EPS, |(_, m)| m) {
                    best = Some((j, mag));
                }
            }
            match best {
                Some((j, _)) => self.pivot(i, j),
                // The row reads 0 * x = 0 in the current tableau: redundant.
                None => drop_rows.push(i),
            }
        }
        for &i in drop_rows.iter().rev() {
            self.a.remove(i);
            self.rhs.remove(i);
            self.basis.remove(i);
        }
    }

    /// Simplex iterations for a given cost vector over columns `< allowed`.
    /// Returns the objective value at optimum.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<f64> {
        let m = self.basis.len();
        // Reduced costs are recomputed per iteration from the basic costs;
        // with dense rows this is the same order of work as a pivot and
        // avoids drift in an incrementally updated cost row.
        for iter in 0..MAX_PIVOTS {
            let basic_cost: Vec<f64> = self.basis.iter().map(|&b| cost[b]).collect();
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut reduced = cost[j];
                for i in 0..m {
                    if basic_cost[i] != 0.0 {
                        reduced -= basic_cost[i] * self.a[i][j];
                    }
                }
                if reduced < -PRICE_EPS {
                    if iter >= BLAND_AFTER {
                        entering = Some((j, reduced)); // Bland: first eligible
                        break;
                    }
                    match entering {
                        Some((_, best)) if reduced >= best => {}
                        _ => entering = Some((j, reduced)),
                    }
                }
            }
            let Some((j, _)) = entering else {
                let value = self
                    .basis
                    .iter()
                    .enumerate()
                    .map(|(i, &b)| cost[b] * self.rhs[i])
                    .sum();
                return Ok(value);
            };
            // Ratio test. Among rows within a hair of the minimum ratio,
            // prefer the largest pivot element for stability (lowest basis
            // index once Bland pricing has kicked in).
            let mut min_ratio = f64::INFINITY;
            for i in 0..m {
                if self.a[i][j] > PIVOT_EPS {
                    min_ratio = min_ratio.min(self.rhs[i] / self.a[i][j]);
                }
            }
            if min_ratio == f64::INFINITY {
                return Err(Error::Internal(
                    "linear program unbounded below".to_string(),
                ));
            }
            let band = 1e-9 * (1.0 + min_ratio.abs());
            let mut leave: Option<usize> = None;
            for i in 0..m {
                if self.a[i][j] <= PIVOT_EPS || self.rhs[i] / self.a[i][j] > min_ratio + band {
                    continue;
                }
                let better = match leave {
                    None => true,
                    Some(li) => {
                        if iter >= BLAND_AFTER {
                            self.basis[i] < self.basis[li]
                        } else {
                            self.a[i][j] > self.a[li][j]
                        }
                    }
                };
                if better {
                    leave = Some(i);
                }
            }
            let i = leave.expect("a row attains the minimum ratio");
            self.pivot(i, j);
        }
        Err(Error::Internal(format!(
            "simplex exceeded {MAX_PIVOTS} pivots"
        )))
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let m = self.basis.len();
        let piv = self.a[row][col];
        for v in self.a[row].iter_mut() {
            *v /= piv;
        }
        self.rhs[row] /= piv;
        for i in 0..m {
            if i == row {
                continue;
            }
            let factor = self.a[i][col];
            if factor == 0.0 {
                continue;
            }
            let (pivot_row, this_row) = if i < row {
                let (head, tail) = self.a.split_at_mut(row);
                (&tail[0], &mut head[i])
            } else {
                let (head, tail) = self.a.split_at_mut(i);
                (&head[row], &mut tail[0])
            };
            for (t, p) in this_row.iter_mut().zip(pivot_row.iter()) {
                *t -= factor * p;
            }
            self.rhs[i] -= factor * self.rhs[row];
            if self.rhs[i].abs() < 1e-14 {
                self.rhs[i] = 0.0;
            }
        }
        self.basis[row] = col;
    }
}
