//! Solvers for robust advice-taking under misalignment risk.
//!
//! An agent acts on recommendations from an adviser who is truthful with a
//! known alignment probability `alpha` and adversarial otherwise. The optimal
//! robust policy keeps a *trust region* in belief space: reported beliefs
//! inside the region are taken at face value, reports outside are mapped to
//! the region's boundary. This crate computes those regions and the
//! adversarial strategies that certify them:
//!
//! * [`binary_trust`] — the trust interval for binary-state problems, found
//!   from the posterior-balancing system with a curvature-weighted cutoff;
//! * [`transport`] — quantile transport maps implementing the certifying
//!   adversary, plus Bayes-consistency verification;
//! * [`mva`] — minimal viable alignment via a finite linear program over
//!   garblings of the adviser's signal matrix;
//! * [`binary_action`] — the all-or-nothing solution for binary-action
//!   problems;
//! * [`spherical`] — trust-ball radii for radially symmetric environments and
//!   the antipodal adversary;
//! * [`game`] — an exact saddle-point oracle for the finite zero-sum game
//!   between agent and misaligned adviser, used as ground truth for all
//!   analytic solvers.
//!
//! Shared machinery lives in [`belief`], [`utility`], [`density`],
//! [`bregman`], [`quad`], [`root`], and [`lp`]. All types are immutable after
//! construction and every operation is a pure function, so concurrent use
//! needs no coordination.

// Validation predicates negate float comparisons on purpose (NaN must fail
// them), and the dense LP/tensor kernels keep explicit indices.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod belief;
pub mod binary_action;
pub mod binary_trust;
pub mod bregman;
pub mod density;
mod error;
pub mod game;
pub mod lp;
pub mod mva;
pub mod piecewise;
pub mod quad;
pub mod root;
pub mod spherical;
pub mod transport;
pub mod utility;

pub use belief::Belief;
pub use binary_action::{BinaryActionSolution, RelativePayoffDist};
pub use binary_trust::TrustInterval;
pub use bregman::TrustRegion;
pub use density::BeliefDensity;
pub use error::{Error, Result};
pub use game::{FiniteGame, SaddleSolution};
pub use mva::{MvaSolution, SignalMatrix};
pub use spherical::SphericalInstance;
pub use transport::TransportMap;
pub use utility::UtilityCurve;
