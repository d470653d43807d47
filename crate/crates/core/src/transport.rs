//! Certifying adversary strategies as quantile transport maps.
//!
//! In a trust-region equilibrium every on-path message must induce, via
//! Bayes' rule, exactly the belief the trust-region strategy acts on. The
//! misaligned adviser achieves this by transporting "deviation mass" between
//! the two sides of the cutoff. For `alpha > 1/2` with interval `[lo, hi]`
//! and cutoff `b`, the map `beta: [0, b] -> [hi, 1]` pushes
//!
//! ```text
//! nu(Y)  = (1 - alpha) ∫_Y (hi - mu) tau(mu) dmu        (source mass)
//! ```
//!
//! onto
//!
//! ```text
//! eta(X) = alpha ∫_X (mu - hi) tau(mu) dmu              (target mass)
//! ```
//!
//! via the canonical quantile coupling `beta = F_eta^{-1} ∘ F_nu`, with the
//! mirror map on `[b, 1] -> [0, lo]`. The balancing residuals being zero is
//! exactly equality of total source and target masses. For `alpha <= 1/2`
//! the trust region is the prior alone; thresholds `mu_l < prior < mu_h`
//! split the support into two transported tails and a mid band pooled onto
//! the single message `prior`.
//!
//! Cumulative mass functions are cached on a uniform grid with exact values
//! at the grid points; generalized inverses `F^{-1}(q) = inf {x : F(x) >= q}`
//! are taken by bisection, which handles the flat starts where the target
//! weight vanishes.

use serde::{Deserialize, Serialize};

use crate::binary_trust::{psi_residuals, TrustInterval, RESIDUAL_TOL};
use crate::density::BeliefDensity;
use crate::error::{Error, Result};
use crate::root::bisect;
use crate::utility::UtilityCurve;

/// Residual slack accepted before a trust interval may be certified.
pub const PRECONDITION_TOL: f64 = 100.0 * RESIDUAL_TOL;
/// Grid resolution for cached cumulative mass functions.
const CUM_GRID_CELLS: usize = 4096;
/// Bisection tolerance for generalized inverses and preimages.
const INV_XTOL: f64 = 1e-13;

/// Which construction the map implements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "kebab-case")]
pub enum Regime {
    /// `alpha > 1/2`: two tail-to-tail quantile maps split at the cutoff.
    HighAlpha { lo: f64, hi: f64, cutoff: f64 },
    /// `alpha <= 1/2`: tails transported across the prior, mid band pooled
    /// onto the prior message.
    LowAlpha { mu_l: f64, mu_h: f64, prior: f64 },
}

/// One monotone segment of the adviser's reporting strategy.
#[derive(Debug, Clone)]
pub struct TransportPiece {
    /// Source belief interval the piece is responsible for.
    pub source: (f64, f64),
    /// Target message interval (a point for the pooled mid band).
    pub target: (f64, f64),
    kind: PieceKind,
}

#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)] // two variants, few instances
enum PieceKind {
    Quantile {
        source_cum: CumGrid,
        target_cum: CumGrid,
    },
    PointMass {
        message: f64,
    },
}

impl TransportPiece {
    /// Pools the whole source interval onto a single message.
    pub fn point_mass(source: (f64, f64), message: f64) -> Self {
        TransportPiece {
            source,
            target: (message, message),
            kind: PieceKind::PointMass { message },
        }
    }

    /// The message sent for a source belief inside this piece.
    pub fn map(&self, mu: f64) -> f64 {
        match &self.kind {
            PieceKind::PointMass { message } => *message,
            PieceKind::Quantile {
                source_cum,
                target_cum,
            } => target_cum.inverse(source_cum.eval(mu)),
        }
    }

    /// Total source and target masses; equal for a certified construction.
    pub fn masses(&self) -> (f64, f64) {
        match &self.kind {
            PieceKind::PointMass { .. } => (0.0, 0.0),
            PieceKind::Quantile {
                source_cum,
                target_cum,
            } => (source_cum.total(), target_cum.total()),
        }
    }

    /// `inf { mu in source : map(mu) >= x }`, by bisection on the monotone
    /// map; used to pull message cells back to source intervals.
    fn preimage_start(&self, x: f64) -> f64 {
        match &self.kind {
            PieceKind::PointMass { message } => {
                if *message >= x {
                    self.source.0
                } else {
                    self.source.1
                }
            }
            PieceKind::Quantile { .. } => {
                let (s0, s1) = self.source;
                if self.map(s0) >= x {
                    return s0;
                }
                if self.map(s1) < x {
                    return s1;
                }
                let mut lo = s0;
                let mut hi = s1;
                while hi - lo > INV_XTOL {
                    let mid = 0.5 * (lo + hi);
                    if self.map(mid) >= x {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                hi
            }
        }
    }
}

/// Monotone cumulative deviation-mass function, cached on a uniform grid.
///
/// Grid values are exact prefix sums; queries between grid points add the
/// exact partial moment of the remaining sliver rather than interpolating.
/// Near the target anchors the weight vanishes quadratically and a linear
/// interpolant's corner error, divided by the tiny mass of boundary
/// verification cells, would dominate the certification budget.
#[derive(Debug, Clone)]
struct CumGrid {
    points: Vec<f64>,
    values: Vec<f64>,
    tau: BeliefDensity,
    anchor: f64,
    scale: f64,
}

impl CumGrid {
    /// Accumulates `scale * ∫ |anchor - mu| tau` from `a`, with increments
    /// taken in absolute value so the deviation weight never flips sign.
    fn build(tau: &BeliefDensity, a: f64, b: f64, anchor: f64, scale: f64) -> Result<Self> {
        let n = CUM_GRID_CELLS;
        let mut points = Vec::with_capacity(n + 1);
        let mut values = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        points.push(a);
        values.push(0.0);
        for i in 1..=n {
            let x0 = a + (b - a) * (i - 1) as f64 / n as f64;
            let x1 = a + (b - a) * i as f64 / n as f64;
            let (m0, m1) = tau.partial_moments(x0, x1)?;
            acc += scale * (m1 - anchor * m0).abs();
            points.push(x1);
            values.push(acc);
        }
        Ok(CumGrid {
            points,
            values,
            tau: tau.clone(),
            anchor,
            scale,
        })
    }

    fn total(&self) -> f64 {
        *self.values.last().unwrap()
    }

    fn eval(&self, x: f64) -> f64 {
        let (a, b) = (self.points[0], *self.points.last().unwrap());
        if x <= a {
            return 0.0;
        }
        if x >= b {
            return self.total();
        }
        let n = self.points.len() - 1;
        let i = (((x - a) / (b - a) * n as f64) as usize).min(n - 1);
        let (m0, m1) = self
            .tau
            .partial_moments(self.points[i], x)
            .expect("bounds ordered by construction");
        self.values[i] + self.scale * (m1 - self.anchor * m0).abs()
    }

    /// Generalized inverse `inf { x : F(x) >= q }`: binary search to the
    /// bracketing grid cell, then bisection inside it.
    fn inverse(&self, q: f64) -> f64 {
        if self.values[0] >= q {
            return self.points[0];
        }
        if self.total() < q {
            return *self.points.last().unwrap();
        }
        let j = self.values.partition_point(|&v| v < q);
        let mut lo = self.points[j - 1];
        let mut hi = self.points[j];
        while hi - lo > INV_XTOL {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) >= q {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

/// The misaligned adviser's reporting strategy, as ordered monotone pieces
/// partitioning the belief space.
#[derive(Debug, Clone)]
pub struct TransportMap {
    pub regime: Regime,
    pub pieces: Vec<TransportPiece>,
}

impl TransportMap {
    /// Assembles a map from hand-built pieces. Intended for verification
    /// experiments (deliberately broken maps must be expressible); maps
    /// meant to certify a solution come from [`build_tre_map`].
    pub fn from_pieces(regime: Regime, pieces: Vec<TransportPiece>) -> Self {
        TransportMap { regime, pieces }
    }

    /// The message sent by a misaligned adviser holding belief `mu`. Piece
    /// boundaries resolve right-continuously (the boundaries carry no mass).
    pub fn report(&self, mu: f64) -> Result<f64> {
        for (i, piece) in self.pieces.iter().enumerate() {
            let last = i + 1 == self.pieces.len();
            if (mu >= piece.source.0 && mu < piece.source.1) || (last && mu <= piece.source.1) {
                return Ok(piece.map(mu));
            }
        }
        Err(Error::input(format!(
            "belief {mu} outside the map's source pieces"
        )))
    }

    /// `(source mu, target message)` pairs sampled evenly on each piece, for
    /// artifact emission.
    pub fn sampled_knots(&self, per_piece: usize) -> Vec<Vec<(f64, f64)>> {
        self.pieces
            .iter()
            .map(|p| {
                let n = per_piece.max(2);
                (0..n)
                    .map(|i| {
                        let mu = p.source.0 + (p.source.1 - p.source.0) * i as f64 / (n - 1) as f64;
                        (mu, p.map(mu))
                    })
                    .collect()
            })
            .collect()
    }
}

/// Builds the trust-region-equilibrium transport map certifying `trust`.
///
/// Preconditions: `alpha` strictly inside `(0, 1)` (at 1 there is no
/// misaligned mass to route), and `trust` actually solving the balancing
/// system for `(u, tau, alpha)` — a map built from an uncertified interval
/// would not certify anything and is rejected.
pub fn build_tre_map(
    u: &UtilityCurve,
    tau: &BeliefDensity,
    alpha: f64,
    trust: &TrustInterval,
) -> Result<TransportMap> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::input(format!(
            "transport construction needs alpha in (0, 1), got {alpha}"
        )));
    }
    if (trust.alpha - alpha).abs() > 1e-12 {
        return Err(Error::Precondition(format!(
            "trust interval solved for alpha {}, map requested at {alpha}",
            trust.alpha
        )));
    }
    let prior = tau.prior_scalar()?;
    if alpha > 0.5 {
        let (psi1, psi2) = psi_residuals(u, tau, alpha, trust.lo, trust.hi)?;
        if psi1.abs() > PRECONDITION_TOL || psi2.abs() > PRECONDITION_TOL {
            return Err(Error::Precondition(format!(
                "trust interval residuals ({psi1:.3e}, {psi2:.3e}) exceed {PRECONDITION_TOL:e}; \
                 the map would not certify anything"
            )));
        }
        let (lo, hi, b) = (trust.lo, trust.hi, trust.cutoff);
        // Low beliefs push the agent to hi, high beliefs to lo.
        let low_to_high = TransportPiece {
            source: (0.0, b),
            target: (hi, 1.0),
            kind: PieceKind::Quantile {
                source_cum: CumGrid::build(tau, 0.0, b, hi, 1.0 - alpha)?,
                target_cum: CumGrid::build(tau, hi, 1.0, hi, alpha)?,
            },
        };
        let high_to_low = TransportPiece {
            source: (b, 1.0),
            target: (0.0, lo),
            kind: PieceKind::Quantile {
                source_cum: CumGrid::build(tau, b, 1.0, lo, 1.0 - alpha)?,
                target_cum: CumGrid::build(tau, 0.0, lo, lo, alpha)?,
            },
        };
        Ok(TransportMap {
            regime: Regime::HighAlpha { lo, hi, cutoff: b },
            pieces: vec![low_to_high, high_to_low],
        })
    } else {
        if (trust.lo - prior).abs() > 1e-9 || (trust.hi - prior).abs() > 1e-9 {
            return Err(Error::Precondition(format!(
                "alpha {alpha} <= 1/2 requires the degenerate trust region at the prior {prior}, \
                 got [{}, {}]",
                trust.lo, trust.hi
            )));
        }
        let (mu_l, mu_h) = low_alpha_thresholds(tau, alpha, prior)?;
        let left_tail = TransportPiece {
            source: (0.0, mu_l),
            target: (prior, 1.0),
            kind: PieceKind::Quantile {
                source_cum: CumGrid::build(tau, 0.0, mu_l, prior, 1.0 - alpha)?,
                target_cum: CumGrid::build(tau, prior, 1.0, prior, alpha)?,
            },
        };
        let mid_band = TransportPiece::point_mass((mu_l, mu_h), prior);
        let right_tail = TransportPiece {
            source: (mu_h, 1.0),
            target: (0.0, prior),
            kind: PieceKind::Quantile {
                source_cum: CumGrid::build(tau, mu_h, 1.0, prior, 1.0 - alpha)?,
                target_cum: CumGrid::build(tau, 0.0, prior, prior, alpha)?,
            },
        };
        Ok(TransportMap {
            regime: Regime::LowAlpha { mu_l, mu_h, prior },
            pieces: vec![left_tail, mid_band, right_tail],
        })
    }
}

/// Thresholds `(mu_l, mu_h)` of the `alpha <= 1/2` construction: each tail
/// holds exactly `alpha/(1-alpha)` of the one-sided deviation mass around
/// the prior, so the transported tails balance and the mid band is
/// mean-zero.
pub fn low_alpha_thresholds(tau: &BeliefDensity, alpha: f64, prior: f64) -> Result<(f64, f64)> {
    if !(0.0..=0.5).contains(&alpha) {
        return Err(Error::input(format!(
            "low-alpha thresholds need alpha in [0, 1/2], got {alpha}"
        )));
    }
    let ratio = alpha / (1.0 - alpha);
    let below = |x: f64| -> f64 {
        let (m0, m1) = tau.partial_moments(0.0, x).expect("valid bounds");
        prior * m0 - m1
    };
    let above = |x: f64| -> f64 {
        let (m0, m1) = tau.partial_moments(x, 1.0).expect("valid bounds");
        m1 - prior * m0
    };
    let mu_l = bisect(|x| ratio * below(prior) - below(x), 0.0, prior, INV_XTOL)?;
    let mu_h = bisect(|x| above(x) - ratio * above(prior), prior, 1.0, INV_XTOL)?;
    Ok((mu_l, mu_h))
}

/// One verified message cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellCheck {
    pub from: f64,
    pub to: f64,
    /// Total (aligned + misaligned) message mass in the cell.
    pub mass: f64,
    pub posterior_mean: f64,
    pub required: f64,
    pub deviation: f64,
}

/// Outcome of the Bayes-consistency audit of a transport map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub max_deviation: f64,
    pub cells: Vec<CellCheck>,
    /// Cells skipped for carrying no message mass.
    pub skipped_zero_mass: usize,
}

/// Partitions the message space into `n_cells` (refined at the trust
/// boundaries and the pooled atom) and checks that the Bayes posterior mean
/// of every positive-mass cell equals its prescription: `hi` above the
/// interval, `lo` below, the aligned conditional mean inside, and the prior
/// everywhere in the low-alpha regime. Returns the maximum absolute
/// deviation; a certified map stays within quadrature error.
pub fn verify_posterior_consistency(
    map: &TransportMap,
    tau: &BeliefDensity,
    alpha: f64,
    trust: &TrustInterval,
    n_cells: usize,
) -> Result<ConsistencyReport> {
    if n_cells == 0 {
        return Err(Error::input("need at least one verification cell"));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::input(format!("alpha {alpha} outside [0, 1]")));
    }
    // Cell boundaries: uniform grid refined at the trust endpoints and atoms.
    let mut bounds: Vec<f64> = (0..=n_cells).map(|i| i as f64 / n_cells as f64).collect();
    bounds.push(trust.lo);
    bounds.push(trust.hi);
    let mut atoms: Vec<f64> = Vec::new();
    for piece in &map.pieces {
        if let PieceKind::PointMass { message } = piece.kind {
            atoms.push(message);
            bounds.push(message);
        }
    }
    bounds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    bounds.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

    let low_alpha = matches!(map.regime, Regime::LowAlpha { .. });
    let mut cells = Vec::new();
    let mut skipped = 0usize;
    let mut max_deviation: f64 = 0.0;

    let mut check_cell = |x0: f64, x1: f64, is_atom: bool| -> Result<()> {
        // Aligned mass: truthful reports inside the cell; a point atom
        // carries no aligned density mass.
        let (a0, a1) = if is_atom {
            (0.0, 0.0)
        } else {
            tau.partial_moments(x0, x1)?
        };
        let mut m0 = alpha * a0;
        let mut m1 = alpha * a1;
        for piece in &map.pieces {
            let (p0, p1) = match piece.kind {
                PieceKind::PointMass { message } => {
                    // Atoms always sit on refined cell boundaries, so
                    // strict bounds keep their mass out of the interval
                    // cells; each atom is audited as its own cell.
                    let inside = if is_atom {
                        (message - x0).abs() < 1e-12
                    } else {
                        message > x0 && message < x1
                    };
                    if inside {
                        tau.partial_moments(piece.source.0, piece.source.1)?
                    } else {
                        (0.0, 0.0)
                    }
                }
                PieceKind::Quantile { .. } => {
                    if is_atom {
                        (0.0, 0.0)
                    } else {
                        let s0 = piece.preimage_start(x0);
                        let s1 = piece.preimage_start(x1);
                        tau.partial_moments(s0, s1)?
                    }
                }
            };
            m0 += (1.0 - alpha) * p0;
            m1 += (1.0 - alpha) * p1;
        }
        if m0 <= 1e-14 {
            skipped += 1;
            return Ok(());
        }
        let posterior_mean = m1 / m0;
        let required = if low_alpha {
            trust.prior
        } else if x1 <= trust.lo + 1e-15 {
            trust.lo
        } else if x0 >= trust.hi - 1e-15 {
            trust.hi
        } else {
            // Inside the region reports are taken at face value; the cell's
            // prescription is the aligned conditional mean.
            a1 / a0
        };
        let deviation = (posterior_mean - required).abs();
        max_deviation = max_deviation.max(deviation);
        cells.push(CellCheck {
            from: x0,
            to: x1,
            mass: m0,
            posterior_mean,
            required,
            deviation,
        });
        Ok(())
    };

    for w in bounds.clone().windows(2) {
        check_cell(w[0], w[1], false)?;
    }
    for atom in atoms {
        check_cell(atom, atom, true)?;
    }

    Ok(ConsistencyReport {
        max_deviation,
        cells,
        skipped_zero_mass: skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binary_trust::solve_trust_interval;
    use crate::bregman::{worst_case_report, TrustRegion};

    fn certified_instance(alpha: f64) -> (UtilityCurve, BeliefDensity, TrustInterval) {
        let u = UtilityCurve::quadratic_loss();
        let tau = BeliefDensity::uniform();
        let trust = solve_trust_interval(&u, &tau, alpha).unwrap();
        (u, tau, trust)
    }

    #[test]
    fn zero_source_maps_to_hi() {
        let (u, tau, trust) = certified_instance(0.75);
        let map = build_tre_map(&u, &tau, 0.75, &trust).unwrap();
        let m = map.report(0.0).unwrap();
        assert!((m - trust.hi).abs() < 1e-9, "{m} vs hi {}", trust.hi);
    }

    #[test]
    fn transported_mass_matches_closed_form() {
        let (u, tau, trust) = certified_instance(0.75);
        let map = build_tre_map(&u, &tau, 0.75, &trust).unwrap();
        let (nu, eta) = map.pieces[0].masses();
        // Uniform tau: eta([hi, 1]) = alpha (1 - hi)^2 / 2.
        let expected = 0.75 * (1.0 - trust.hi) * (1.0 - trust.hi) / 2.0;
        assert!((eta - expected).abs() < 1e-9, "{eta} vs {expected}");
        assert!((eta - 0.048702).abs() < 1e-6);
        assert!((nu - eta).abs() < 1e-9, "mass conservation: {nu} vs {eta}");
        let (nu2, eta2) = map.pieces[1].masses();
        assert!((nu2 - eta2).abs() < 1e-9);
    }

    #[test]
    fn pieces_are_monotone_and_fill_targets() {
        let (u, tau, trust) = certified_instance(0.75);
        let map = build_tre_map(&u, &tau, 0.75, &trust).unwrap();
        for piece in &map.pieces {
            let mut last = f64::NEG_INFINITY;
            for i in 0..=200 {
                let mu = piece.source.0 + (piece.source.1 - piece.source.0) * i as f64 / 200.0;
                let m = piece.map(mu);
                assert!(m >= last - 1e-12, "non-monotone at {mu}");
                assert!(m >= piece.target.0 - 1e-9 && m <= piece.target.1 + 1e-9);
                last = m;
            }
        }
        // Endpoint continuity: target ranges are exactly [hi, 1] and [0, lo].
        assert!((map.pieces[0].map(0.0) - trust.hi).abs() < 1e-9);
        assert!((map.pieces[0].map(trust.cutoff) - 1.0).abs() < 1e-6);
        assert!(map.pieces[1].map(trust.cutoff).abs() < 1e-6);
        assert!((map.pieces[1].map(1.0) - trust.lo).abs() < 1e-9);
    }

    #[test]
    fn certified_map_passes_verification() {
        let (u, tau, trust) = certified_instance(0.75);
        let map = build_tre_map(&u, &tau, 0.75, &trust).unwrap();
        let report = verify_posterior_consistency(&map, &tau, 0.75, &trust, 200).unwrap();
        assert!(
            report.max_deviation <= 1e-6,
            "max deviation {}",
            report.max_deviation
        );
    }

    #[test]
    fn corrupted_interval_fails_verification() {
        let (u, tau, trust) = certified_instance(0.75);
        let map = build_tre_map(&u, &tau, 0.75, &trust).unwrap();
        let mut corrupted = trust.clone();
        corrupted.hi += 0.05;
        let report = verify_posterior_consistency(&map, &tau, 0.75, &corrupted, 200).unwrap();
        assert!(
            report.max_deviation >= 0.01,
            "expected a visible failure, got {}",
            report.max_deviation
        );
        // And the builder refuses the corrupted interval outright.
        assert!(build_tre_map(&u, &tau, 0.75, &corrupted).is_err());
    }

    #[test]
    fn all_to_one_map_fails_near_one() {
        let (_u, tau, trust) = certified_instance(0.75);
        let b = trust.cutoff;
        let broken = TransportMap::from_pieces(
            Regime::HighAlpha {
                lo: trust.lo,
                hi: trust.hi,
                cutoff: b,
            },
            vec![
                TransportPiece::point_mass((0.0, b), 1.0),
                TransportPiece::point_mass((b, 1.0), 1.0),
            ],
        );
        let report = verify_posterior_consistency(&broken, &tau, 0.75, &trust, 50).unwrap();
        let near_one = report
            .cells
            .iter()
            .find(|c| c.to >= 1.0 - 1e-9 && c.from < 1.0)
            .expect("cell at 1");
        // All misaligned mass (mean near cutoff/2) lands on message 1.0,
        // pulling the posterior well below hi.
        assert!(
            near_one.deviation > 0.05,
            "deviation {}",
            near_one.deviation
        );
    }

    #[test]
    fn low_alpha_thresholds_uniform_closed_form() {
        // Uniform tau, prior 1/2, alpha = 0.4: the threshold equation
        // mu_l/2 - mu_l^2/2 = (alpha/(1-alpha)) / 8 reduces to
        // 6 mu_l^2 - 6 mu_l + 1 = 0, root (3 - sqrt(3))/6.
        let tau = BeliefDensity::uniform();
        let (mu_l, mu_h) = low_alpha_thresholds(&tau, 0.4, 0.5).unwrap();
        let expected = (3.0 - 3.0_f64.sqrt()) / 6.0;
        assert!((mu_l - expected).abs() < 1e-10, "{mu_l} vs {expected}");
        assert!((mu_h - (1.0 - expected)).abs() < 1e-10);
    }

    #[test]
    fn low_alpha_map_pools_everything_on_prior() {
        let u = UtilityCurve::quadratic_loss();
        let tau = BeliefDensity::uniform();
        let trust = solve_trust_interval(&u, &tau, 0.4).unwrap();
        let map = build_tre_map(&u, &tau, 0.4, &trust).unwrap();
        assert_eq!(map.pieces.len(), 3);
        let report = verify_posterior_consistency(&map, &tau, 0.4, &trust, 100).unwrap();
        assert!(
            report.max_deviation <= 1e-6,
            "max deviation {}",
            report.max_deviation
        );
        // Mid band goes to the prior message.
        let Regime::LowAlpha { mu_l, mu_h, prior } = map.regime else {
            panic!("expected low-alpha regime");
        };
        assert!((map.report(0.5 * (mu_l + mu_h)).unwrap() - prior).abs() < 1e-12);
    }

    #[test]
    fn boundary_alpha_half_degenerates_continuously() {
        let u = UtilityCurve::quadratic_loss();
        let tau = BeliefDensity::uniform();
        let trust = solve_trust_interval(&u, &tau, 0.5).unwrap();
        let map = build_tre_map(&u, &tau, 0.5, &trust).unwrap();
        let Regime::LowAlpha { mu_l, mu_h, .. } = map.regime else {
            panic!("expected low-alpha regime at 1/2");
        };
        assert!((mu_l - 0.5).abs() < 1e-9);
        assert!((mu_h - 0.5).abs() < 1e-9);
        let report = verify_posterior_consistency(&map, &tau, 0.5, &trust, 100).unwrap();
        assert!(report.max_deviation <= 1e-6);
    }

    #[test]
    fn emitted_messages_are_bregman_optimal() {
        // Saddle property: every message lands on the side that the
        // worst-case report picks for that belief.
        let (u, tau, trust) = certified_instance(0.8);
        let map = build_tre_map(&u, &tau, 0.8, &trust).unwrap();
        let region = TrustRegion::interval(trust.lo, trust.hi).unwrap();
        for i in 0..=100 {
            let mu = i as f64 / 100.0;
            if (mu - trust.cutoff).abs() < 1e-6 {
                continue; // indifferent at the cutoff
            }
            let msg = map.report(mu).unwrap();
            let induced = if msg >= trust.hi { trust.hi } else { trust.lo };
            let optimal = worst_case_report(&u, &region, mu).unwrap();
            assert_eq!(induced, optimal, "mu = {mu}, msg = {msg}");
        }
    }

    #[test]
    fn alpha_one_rejected_for_building() {
        let (u, tau, trust) = certified_instance(0.75);
        assert!(build_tre_map(&u, &tau, 1.0, &trust).is_err());
    }

    #[test]
    fn alpha_one_verifies_any_map_trivially() {
        // No misaligned mass: the posterior equals the message identically,
        // whatever the map claims to do.
        let u = UtilityCurve::quadratic_loss();
        let tau = BeliefDensity::uniform();
        let trust = solve_trust_interval(&u, &tau, 1.0).unwrap();
        let junk = TransportMap::from_pieces(
            Regime::HighAlpha {
                lo: trust.lo,
                hi: trust.hi,
                cutoff: trust.cutoff,
            },
            vec![TransportPiece::point_mass((0.0, 1.0), 1.0)],
        );
        let report = verify_posterior_consistency(&junk, &tau, 1.0, &trust, 100).unwrap();
        assert!(
            report.max_deviation <= 1e-12,
            "deviation {}",
            report.max_deviation
        );
    }
}
