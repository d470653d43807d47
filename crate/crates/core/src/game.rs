//! Exact saddle oracle for the finite zero-sum game between the agent and
//! the misaligned adviser.
//!
//! The adviser's posterior is one of `K` atoms; messages range over the same
//! atoms (anything else would reveal misalignment). Writing
//! `Q[j][t][a] = sum_w mu_j(w) f(t | w) u(a, w, t)` for the payoff kernel,
//! the agent's worst-case objective decomposes per true posterior,
//!
//! ```text
//! U(sigma) = alpha sum_j tau_j W(j, j; sigma)
//!          + (1 - alpha) sum_j tau_j min_m W(m, j; sigma),
//! ```
//!
//! with `W(m, j; sigma) = sum_{t,a} sigma(a | m, t) Q[j][t][a]` — concave
//! piecewise-linear in the strategy, so the maximin strategy solves a linear
//! program. The adversary's minimax program is assembled independently
//! (minimize the sum of per-message best responses) and the two optima are
//! interchangeable, so the returned pair is a saddle point; both
//! best-response gains are reported as the exploitability certificate.

use serde::{Deserialize, Serialize};

use crate::belief::Belief;
use crate::error::{Error, Result};
use crate::lp::{Cmp, Problem};
use crate::utility::UtilityCurve;

/// Mass and Bayes-plausibility tolerance for game validation.
pub const GAME_TOL: f64 = 1e-9;
/// Exploitability both returned strategies are certified to.
pub const EXPLOIT_TOL: f64 = 1e-8;
/// Best-response margin allowed on verified on-path messages.
pub const BR_MARGIN_TOL: f64 = 1e-7;

/// A finite advice game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GameSpec", into = "GameSpec")]
pub struct FiniteGame {
    prior: Vec<f64>,
    messages: Vec<(Belief, f64)>,
    /// `f[w][t]`: conditional law of the agent's private type.
    type_law: Vec<Vec<f64>>,
    n_actions: usize,
    /// Row-major `[a][w][t]`.
    payoff: Vec<f64>,
    alpha: f64,
}

/// Serialization schema for game documents: states are implicit in the
/// prior length, the payoff tensor is row-major over `[action][state][type]`
/// and never depends on the message.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameSpec {
    #[serde(default = "default_schema_version")]
    pub schema_version: String,
    pub prior: Vec<f64>,
    pub messages: Vec<MessageAtom>,
    /// Defaults to a single uninformative type.
    #[serde(default)]
    pub type_law: Option<Vec<Vec<f64>>>,
    pub n_actions: usize,
    pub payoff: Vec<f64>,
    pub alpha: f64,
}

fn default_schema_version() -> String {
    "1".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MessageAtom {
    pub posterior: Vec<f64>,
    pub prob: f64,
}

impl TryFrom<GameSpec> for FiniteGame {
    type Error = Error;

    fn try_from(spec: GameSpec) -> Result<Self> {
        let n = spec.prior.len();
        let type_law = spec.type_law.unwrap_or_else(|| vec![vec![1.0]; n]);
        let messages = spec
            .messages
            .into_iter()
            .map(|m| Ok((Belief::new(m.posterior)?, m.prob)))
            .collect::<Result<Vec<_>>>()?;
        FiniteGame::new(
            Belief::new(spec.prior)?,
            messages,
            type_law,
            spec.n_actions,
            spec.payoff,
            spec.alpha,
        )
    }
}

impl From<FiniteGame> for GameSpec {
    fn from(g: FiniteGame) -> GameSpec {
        GameSpec {
            schema_version: default_schema_version(),
            prior: g.prior,
            messages: g
                .messages
                .into_iter()
                .map(|(b, p)| MessageAtom {
                    posterior: b.into(),
                    prob: p,
                })
                .collect(),
            type_law: Some(g.type_law),
            n_actions: g.n_actions,
            payoff: g.payoff,
            alpha: g.alpha,
        }
    }
}

impl FiniteGame {
    pub fn new(
        prior: Belief,
        messages: Vec<(Belief, f64)>,
        type_law: Vec<Vec<f64>>,
        n_actions: usize,
        payoff: Vec<f64>,
        alpha: f64,
    ) -> Result<Self> {
        let n = prior.dim();
        if messages.is_empty() {
            return Err(Error::input("game needs at least one message atom"));
        }
        if n_actions == 0 {
            return Err(Error::input("game needs at least one action"));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::input(format!("alpha {alpha} outside [0, 1]")));
        }
        let mut total = 0.0;
        let mut mean = vec![0.0; n];
        for (b, p) in &messages {
            if b.dim() != n {
                return Err(Error::input("message posterior dimension mismatch"));
            }
            if !(*p >= 0.0) {
                return Err(Error::input("message probabilities must be nonnegative"));
            }
            total += p;
            for (m, q) in mean.iter_mut().zip(b.probs()) {
                *m += p * q;
            }
        }
        if (total - 1.0).abs() > GAME_TOL {
            return Err(Error::input(format!(
                "message probabilities sum to {total}, expected 1"
            )));
        }
        for (m, p) in mean.iter().zip(prior.probs()) {
            if (m - p).abs() > GAME_TOL {
                return Err(Error::input(
                    "message atoms are not Bayes-plausible: mean posterior differs from the prior",
                ));
            }
        }
        if type_law.len() != n {
            return Err(Error::input(format!(
                "type law has {} state rows, expected {n}",
                type_law.len()
            )));
        }
        let n_types = type_law[0].len();
        if n_types == 0 {
            return Err(Error::input("game needs at least one private type"));
        }
        for (w, row) in type_law.iter().enumerate() {
            if row.len() != n_types {
                return Err(Error::input(format!("type law row {w} width mismatch")));
            }
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::input(format!("type law row {w} has bad entries")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > GAME_TOL {
                return Err(Error::input(format!(
                    "type law row {w} sums to {s}, expected 1"
                )));
            }
        }
        if payoff.len() != n_actions * n * n_types {
            return Err(Error::input(format!(
                "payoff tensor has {} entries, expected actions*states*types = {}",
                payoff.len(),
                n_actions * n * n_types
            )));
        }
        if payoff.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("payoff tensor must be finite"));
        }
        Ok(Self {
            prior: prior.into(),
            messages,
            type_law,
            n_actions,
            payoff,
            alpha,
        })
    }

    /// Binary-state game without private types: message atoms are scalar
    /// posteriors and the payoff is `u(a, w)`.
    pub fn binary(
        atoms: &[(f64, f64)],
        actions: usize,
        payoff_aw: &[f64],
        alpha: f64,
    ) -> Result<Self> {
        let messages = atoms
            .iter()
            .map(|&(mu, p)| Ok((Belief::binary(mu)?, p)))
            .collect::<Result<Vec<_>>>()?;
        let prior: f64 = atoms.iter().map(|(mu, p)| mu * p).sum();
        if payoff_aw.len() != actions * 2 {
            return Err(Error::input("binary payoff table must be actions x 2"));
        }
        FiniteGame::new(
            Belief::binary(prior)?,
            messages,
            vec![vec![1.0], vec![1.0]],
            actions,
            payoff_aw.to_vec(),
            alpha,
        )
    }

    pub fn n_states(&self) -> usize {
        self.prior.len()
    }

    pub fn n_messages(&self) -> usize {
        self.messages.len()
    }

    pub fn n_types(&self) -> usize {
        self.type_law[0].len()
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn messages(&self) -> &[(Belief, f64)] {
        &self.messages
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    fn u(&self, a: usize, w: usize, t: usize) -> f64 {
        self.payoff[(a * self.n_states() + w) * self.n_types() + t]
    }

    /// `Q[j][t][a] = sum_w mu_j(w) f(t|w) u(a, w, t)`: expected payoff of
    /// action `a` under type `t` when the true posterior is atom `j`.
    fn kernel(&self) -> Vec<Vec<Vec<f64>>> {
        let (k, nt, na, n) = (
            self.n_messages(),
            self.n_types(),
            self.n_actions,
            self.n_states(),
        );
        let mut q = vec![vec![vec![0.0; na]; nt]; k];
        for (j, (mu, _)) in self.messages.iter().enumerate() {
            for t in 0..nt {
                for a in 0..na {
                    let mut v = 0.0;
                    for w in 0..n {
                        v += mu.probs()[w] * self.type_law[w][t] * self.u(a, w, t);
                    }
                    q[j][t][a] = v;
                }
            }
        }
        q
    }

    /// The agent's optimal payoff ignoring messages: best response per type
    /// to the prior.
    pub fn no_adviser_value(&self) -> f64 {
        let (nt, na, n) = (self.n_types(), self.n_actions, self.n_states());
        let mut total = 0.0;
        for t in 0..nt {
            let mut best = f64::NEG_INFINITY;
            for a in 0..na {
                let mut v = 0.0;
                for w in 0..n {
                    v += self.prior[w] * self.type_law[w][t] * self.u(a, w, t);
                }
                best = best.max(v);
            }
            total += best;
        }
        total
    }
}

/// A saddle point of the advice game with its certificates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleSolution {
    /// Payoff of the returned strategy pair.
    pub value: f64,
    /// Guarantee of the agent strategy (worst case over adversaries).
    pub maximin_value: f64,
    /// Cap enforced by the adversary strategy (best agent response).
    pub minimax_value: f64,
    /// `agent_strategy[m][t][a]`.
    pub agent_strategy: Vec<Vec<Vec<f64>>>,
    /// `adversary_strategy[j][m]`: message mix for true posterior `j`.
    pub adversary_strategy: Vec<Vec<f64>>,
    /// Bayes posterior over states induced by each message under the pair.
    pub induced_posteriors: Vec<Vec<f64>>,
    /// Messages carrying no mass under the pair (posterior defaults to the
    /// prior).
    pub off_path: Vec<bool>,
    /// Best-response gains `(adversary against the agent strategy, agent
    /// against the adversary strategy)`.
    pub exploitability: (f64, f64),
}

/// Computes the agent's maximin strategy and the adversary's minimax
/// strategy by two independent linear programs and certifies the pair by
/// direct best-response evaluation.
pub fn solve_saddle(game: &FiniteGame) -> Result<SaddleSolution> {
    let q = game.kernel();
    let mut sigma = agent_lp(game, &q)?;
    let beta = adversary_lp(game, &q)?;
    // Off-path messages (possible only without aligned mass, alpha = 0) get
    // the prior-optimal action per type, lowest action index on ties; the
    // LP leaves them arbitrary.
    for m in 0..game.n_messages() {
        let mass = game.alpha() * game.messages[m].1
            + (1.0 - game.alpha())
                * game
                    .messages
                    .iter()
                    .enumerate()
                    .map(|(j, (_, tau_j))| tau_j * beta[j][m])
                    .sum::<f64>();
        if mass > 1e-14 {
            continue;
        }
        for t in 0..game.n_types() {
            let mut best = (f64::NEG_INFINITY, 0usize);
            for a in 0..game.n_actions() {
                let v: f64 = (0..game.n_states())
                    .map(|w| game.prior[w] * game.type_law[w][t] * game.u(a, w, t))
                    .sum();
                if v > best.0 {
                    best = (v, a);
                }
            }
            for a in 0..game.n_actions() {
                sigma[m][t][a] = if a == best.1 { 1.0 } else { 0.0 };
            }
        }
    }
    certify_pair(game, sigma, beta)
}

/// Evaluates a strategy pair and packages it with its certificates: the
/// pair's value, the guarantee of the agent strategy, the cap enforced by
/// the adversary strategy, and both best-response gains.
pub fn certify_pair(
    game: &FiniteGame,
    sigma: Vec<Vec<Vec<f64>>>,
    beta: Vec<Vec<f64>>,
) -> Result<SaddleSolution> {
    let k = game.n_messages();
    if sigma.len() != k || beta.len() != k {
        return Err(Error::input("strategy shape does not match the game"));
    }
    let q = game.kernel();
    let w = |m: usize, j: usize| -> f64 {
        let mut v = 0.0;
        for t in 0..game.n_types() {
            for a in 0..game.n_actions() {
                v += sigma[m][t][a] * q[j][t][a];
            }
        }
        v
    };

    let alpha = game.alpha();
    // Value of the pair.
    let mut value = 0.0;
    for j in 0..k {
        let tau_j = game.messages[j].1;
        value += alpha * tau_j * w(j, j);
        for m in 0..k {
            value += (1.0 - alpha) * tau_j * beta[j][m] * w(m, j);
        }
    }
    // Worst case of sigma: adversary best-responds per posterior.
    let mut maximin = 0.0;
    for j in 0..k {
        let tau_j = game.messages[j].1;
        maximin += alpha * tau_j * w(j, j);
        let worst = (0..k).map(|m| w(m, j)).fold(f64::INFINITY, f64::min);
        maximin += (1.0 - alpha) * tau_j * worst;
    }
    // Best response of the agent against beta, and induced posteriors.
    let (minimax, induced_posteriors, off_path) = agent_best_response_value(game, &beta);

    let exploitability = (value - maximin, minimax - value);
    Ok(SaddleSolution {
        value,
        maximin_value: maximin,
        minimax_value: minimax,
        agent_strategy: sigma,
        adversary_strategy: beta,
        induced_posteriors,
        off_path,
        exploitability,
    })
}

fn agent_lp(game: &FiniteGame, q: &[Vec<Vec<f64>>]) -> Result<Vec<Vec<Vec<f64>>>> {
    let (k, nt, na) = (game.n_messages(), game.n_types(), game.n_actions());
    let alpha = game.alpha();
    // Variables: sigma(a | m, t) row-major (m, t, a), then z+_j, z-_j.
    let n_sigma = k * nt * na;
    let n_vars = n_sigma + 2 * k;
    let sig = |m: usize, t: usize, a: usize| (m * nt + t) * na + a;

    let mut objective = vec![0.0; n_vars];
    for j in 0..k {
        let tau_j = game.messages[j].1;
        for t in 0..nt {
            for a in 0..na {
                objective[sig(j, t, a)] -= alpha * tau_j * q[j][t][a];
            }
        }
        objective[n_sigma + 2 * j] -= (1.0 - alpha) * tau_j;
        objective[n_sigma + 2 * j + 1] += (1.0 - alpha) * tau_j;
    }
    let mut lp = Problem::minimize(objective);
    for m in 0..k {
        for t in 0..nt {
            let mut row = vec![0.0; n_vars];
            for a in 0..na {
                row[sig(m, t, a)] = 1.0;
            }
            lp.constrain(row, Cmp::Eq, 1.0);
        }
    }
    // z_j <= W(m, j; sigma) for every message slot m.
    for j in 0..k {
        for m in 0..k {
            let mut row = vec![0.0; n_vars];
            for t in 0..nt {
                for a in 0..na {
                    row[sig(m, t, a)] = q[j][t][a];
                }
            }
            row[n_sigma + 2 * j] = -1.0;
            row[n_sigma + 2 * j + 1] = 1.0;
            lp.constrain(row, Cmp::Ge, 0.0);
        }
    }
    let sol = lp.solve()?;
    let mut sigma = vec![vec![vec![0.0; na]; nt]; k];
    for m in 0..k {
        for t in 0..nt {
            for a in 0..na {
                sigma[m][t][a] = sol.x[sig(m, t, a)];
            }
        }
    }
    Ok(sigma)
}

fn adversary_lp(game: &FiniteGame, q: &[Vec<Vec<f64>>]) -> Result<Vec<Vec<f64>>> {
    let (k, nt, na) = (game.n_messages(), game.n_types(), game.n_actions());
    let alpha = game.alpha();
    // Variables: beta(m | j) row-major (j, m), then y+_{m,t}, y-_{m,t}.
    let n_beta = k * k;
    let n_vars = n_beta + 2 * k * nt;
    let bix = |j: usize, m: usize| j * k + m;
    let yix = |m: usize, t: usize| n_beta + 2 * (m * nt + t);

    let mut objective = vec![0.0; n_vars];
    for m in 0..k {
        for t in 0..nt {
            objective[yix(m, t)] = 1.0;
            objective[yix(m, t) + 1] = -1.0;
        }
    }
    let mut lp = Problem::minimize(objective);
    for j in 0..k {
        let mut row = vec![0.0; n_vars];
        for m in 0..k {
            row[bix(j, m)] = 1.0;
        }
        lp.constrain(row, Cmp::Eq, 1.0);
    }
    // y_{m,t} >= alpha tau_m Q[m][t][a] + (1-alpha) sum_j tau_j beta(m|j) Q[j][t][a].
    for m in 0..k {
        for t in 0..nt {
            for a in 0..na {
                let mut row = vec![0.0; n_vars];
                row[yix(m, t)] = 1.0;
                row[yix(m, t) + 1] = -1.0;
                for j in 0..k {
                    row[bix(j, m)] = -(1.0 - alpha) * game.messages[j].1 * q[j][t][a];
                }
                let rhs = alpha * game.messages[m].1 * q[m][t][a];
                lp.constrain(row, Cmp::Ge, rhs);
            }
        }
    }
    let sol = lp.solve()?;
    let mut beta = vec![vec![0.0; k]; k];
    for j in 0..k {
        for m in 0..k {
            beta[j][m] = sol.x[bix(j, m)];
        }
    }
    Ok(beta)
}

/// The agent's exact best-response value against `beta`, plus the induced
/// posterior per message (prior for off-path messages).
fn agent_best_response_value(
    game: &FiniteGame,
    beta: &[Vec<f64>],
) -> (f64, Vec<Vec<f64>>, Vec<bool>) {
    let (k, nt, na, n) = (
        game.n_messages(),
        game.n_types(),
        game.n_actions(),
        game.n_states(),
    );
    let alpha = game.alpha();
    let mut total = 0.0;
    let mut posteriors = Vec::with_capacity(k);
    let mut off_path = Vec::with_capacity(k);
    for m in 0..k {
        // Unnormalized joint weight over states at message m.
        let mut wgt = vec![0.0; n];
        let tau_m = game.messages[m].1;
        for w in 0..n {
            wgt[w] += alpha * tau_m * game.messages[m].0.probs()[w];
        }
        for (j, (mu_j, tau_j)) in game.messages().iter().enumerate() {
            for w in 0..n {
                wgt[w] += (1.0 - alpha) * tau_j * beta[j][m] * mu_j.probs()[w];
            }
        }
        let mass: f64 = wgt.iter().sum();
        if mass <= 1e-14 {
            off_path.push(true);
            posteriors.push(game.prior().to_vec());
        } else {
            off_path.push(false);
            posteriors.push(wgt.iter().map(|v| v / mass).collect());
        }
        for t in 0..nt {
            let mut best = f64::NEG_INFINITY;
            for a in 0..na {
                let mut v = 0.0;
                for w in 0..n {
                    v += wgt[w] * game.type_law[w][t] * game.u(a, w, t);
                }
                best = best.max(v);
            }
            if best.is_finite() {
                total += best;
            }
        }
    }
    (total, posteriors, off_path)
}

/// The value of consulting the adviser at all.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdviserValue {
    /// Saddle value with the adviser present.
    pub u_star: f64,
    /// Optimal payoff ignoring messages.
    pub u_baseline: f64,
    /// `u_star - u_baseline`; nonnegative up to solver tolerance.
    pub value: f64,
}

pub fn adviser_value(game: &FiniteGame) -> Result<AdviserValue> {
    let saddle = solve_saddle(game)?;
    let u_baseline = game.no_adviser_value();
    let value = saddle.value - u_baseline;
    if value < -1e-10 {
        return Err(Error::Internal(format!(
            "adviser value {value} is negative beyond tolerance; the saddle solver is broken"
        )));
    }
    Ok(AdviserValue {
        u_star: saddle.value,
        u_baseline,
        value,
    })
}

/// Per-message verification of robust rationalizability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageCheck {
    pub index: usize,
    pub on_path: bool,
    /// Payoff gap between the best action and the worst action the agent
    /// actually plays, maximized over types.
    pub best_response_margin: f64,
    pub pass: bool,
    pub induced_posterior: Vec<f64>,
    /// Binary instances with a utility curve attached: distance of the
    /// induced posterior from the boundary-projection prescription.
    pub projection_deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrsReport {
    pub messages: Vec<MessageCheck>,
    pub all_pass: bool,
    /// Empirical trust set `[lo, hi]` detected on binary instances.
    pub empirical_trust: Option<(f64, f64)>,
}

/// Checks that each on-path message is answered with Bayes-optimal actions
/// at its induced posterior, and (for binary instances with a utility
/// curve) that induced posteriors of out-of-trust messages sit at the
/// corresponding trust boundary.
pub fn verify_trs_structure(
    game: &FiniteGame,
    sol: &SaddleSolution,
    curve: Option<&UtilityCurve>,
) -> Result<TrsReport> {
    let (k, nt, na, n) = (
        game.n_messages(),
        game.n_types(),
        game.n_actions(),
        game.n_states(),
    );
    if sol.agent_strategy.len() != k || sol.adversary_strategy.len() != k {
        return Err(Error::input("solution shape does not match the game"));
    }
    let alpha = game.alpha();
    let mut checks = Vec::with_capacity(k);
    for m in 0..k {
        let mut wgt = vec![0.0; n];
        let tau_m = game.messages[m].1;
        for w in 0..n {
            wgt[w] += alpha * tau_m * game.messages[m].0.probs()[w];
        }
        for (j, (mu_j, tau_j)) in game.messages().iter().enumerate() {
            for w in 0..n {
                wgt[w] += (1.0 - alpha) * tau_j * sol.adversary_strategy[j][m] * mu_j.probs()[w];
            }
        }
        let mass: f64 = wgt.iter().sum();
        let on_path = mass > 1e-12;
        let induced: Vec<f64> = if on_path {
            wgt.iter().map(|v| v / mass).collect()
        } else {
            game.prior().to_vec()
        };
        let mut margin = 0.0_f64;
        if on_path {
            for t in 0..nt {
                let vals: Vec<f64> = (0..na)
                    .map(|a| {
                        (0..n)
                            .map(|w| wgt[w] * game.type_law[w][t] * game.u(a, w, t))
                            .sum::<f64>()
                            / mass
                    })
                    .collect();
                let best = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                for a in 0..na {
                    if sol.agent_strategy[m][t][a] > 1e-9 {
                        margin = margin.max(best - vals[a]);
                    }
                }
            }
        }
        checks.push(MessageCheck {
            index: m,
            on_path,
            best_response_margin: margin,
            pass: !on_path || margin <= BR_MARGIN_TOL,
            induced_posterior: induced,
            projection_deviation: None,
        });
    }

    // Binary boundary-projection check: messages whose induced posterior
    // moved must land exactly on the nearest edge of the empirical trust
    // set.
    let mut empirical_trust = None;
    if n == 2 && curve.is_some() {
        let scalar = |v: &[f64]| v[1];
        let trusted: Vec<usize> = (0..k)
            .filter(|&m| {
                checks[m].on_path
                    && (scalar(&checks[m].induced_posterior) - game.messages[m].0.probs()[1]).abs()
                        < 1e-6
            })
            .collect();
        if !trusted.is_empty() {
            let lo = trusted
                .iter()
                .map(|&m| game.messages[m].0.probs()[1])
                .fold(f64::INFINITY, f64::min);
            let hi = trusted
                .iter()
                .map(|&m| game.messages[m].0.probs()[1])
                .fold(f64::NEG_INFINITY, f64::max);
            empirical_trust = Some((lo, hi));
            for check in checks.iter_mut() {
                if !check.on_path {
                    continue;
                }
                let msg = game.messages[check.index].0.probs()[1];
                let induced = scalar(&check.induced_posterior);
                let prescription = msg.clamp(lo, hi);
                check.projection_deviation = Some((induced - prescription).abs());
            }
        }
    }

    let all_pass = checks.iter().all(|c| c.pass);
    Ok(TrsReport {
        messages: checks,
        all_pass,
        empirical_trust,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Quadratic-payoff binary game on a uniform posterior grid.
    fn binary_grid_game(k: usize, actions: usize, alpha: f64) -> FiniteGame {
        let atoms: Vec<(f64, f64)> = (0..k)
            .map(|i| (i as f64 / (k - 1) as f64, 1.0 / k as f64))
            .collect();
        let action_values: Vec<f64> = (0..actions)
            .map(|a| a as f64 / (actions - 1) as f64)
            .collect();
        let mut payoff = Vec::with_capacity(actions * 2);
        for &a in &action_values {
            payoff.push(-(a * a)); // state 0
            payoff.push(-(a - 1.0) * (a - 1.0)); // state 1
        }
        FiniteGame::binary(&atoms, actions, &payoff, alpha).unwrap()
    }

    #[test]
    fn full_alignment_is_bayes_value() {
        let game = binary_grid_game(11, 11, 1.0);
        let sol = solve_saddle(&game).unwrap();
        // Direct Bayes value: each atom answered optimally.
        let mut expected = 0.0;
        for (mu, p) in game.messages() {
            let mu = mu.probs()[1];
            let best = (0..11)
                .map(|a| {
                    let a = a as f64 / 10.0;
                    -(1.0 - mu) * a * a - mu * (a - 1.0) * (a - 1.0)
                })
                .fold(f64::NEG_INFINITY, f64::max);
            expected += p * best;
        }
        assert!(
            (sol.value - expected).abs() < 1e-9,
            "{} vs {expected}",
            sol.value
        );
        assert!(sol.exploitability.0 <= EXPLOIT_TOL);
        assert!(sol.exploitability.1 <= EXPLOIT_TOL);
    }

    #[test]
    fn zero_alignment_is_prior_value() {
        let game = binary_grid_game(11, 11, 0.0);
        let sol = solve_saddle(&game).unwrap();
        let expected = game.no_adviser_value();
        assert!(
            (sol.value - expected).abs() < 1e-9,
            "{} vs {expected}",
            sol.value
        );
    }

    #[test]
    fn minimax_equals_maximin() {
        for alpha in [0.3, 0.6, 0.75, 0.9] {
            let game = binary_grid_game(9, 9, alpha);
            let sol = solve_saddle(&game).unwrap();
            assert!(
                (sol.maximin_value - sol.minimax_value).abs() <= EXPLOIT_TOL,
                "alpha {alpha}: maximin {} vs minimax {}",
                sol.maximin_value,
                sol.minimax_value
            );
            assert!(sol.exploitability.0 <= EXPLOIT_TOL, "alpha {alpha}");
            assert!(sol.exploitability.1 <= EXPLOIT_TOL, "alpha {alpha}");
        }
    }

    #[test]
    fn value_monotone_in_alpha() {
        let values: Vec<f64> = [0.0, 0.25, 0.5, 0.75, 1.0]
            .iter()
            .map(|&alpha| solve_saddle(&binary_grid_game(9, 9, alpha)).unwrap().value)
            .collect();
        for w in values.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "value decreased: {:?}", values);
        }
    }

    #[test]
    fn duplicate_message_atom_keeps_value() {
        let game = binary_grid_game(9, 9, 0.7);
        let sol = solve_saddle(&game).unwrap();
        // Split the middle atom into two halves.
        let mut atoms: Vec<(f64, f64)> = game
            .messages()
            .iter()
            .map(|(b, p)| (b.probs()[1], *p))
            .collect();
        let (mu_mid, p_mid) = atoms[4];
        atoms[4] = (mu_mid, p_mid / 2.0);
        atoms.push((mu_mid, p_mid / 2.0));
        let mut payoff = Vec::new();
        for a in 0..9 {
            let a = a as f64 / 8.0;
            payoff.push(-(a * a));
            payoff.push(-(a - 1.0) * (a - 1.0));
        }
        let dup = FiniteGame::binary(&atoms, 9, &payoff, 0.7).unwrap();
        let dup_sol = solve_saddle(&dup).unwrap();
        assert!(
            (sol.value - dup_sol.value).abs() < 1e-8,
            "{} vs {}",
            sol.value,
            dup_sol.value
        );
    }

    #[test]
    fn adversary_mass_only_on_minimizers() {
        let game = binary_grid_game(9, 9, 0.75);
        let sol = solve_saddle(&game).unwrap();
        let k = game.n_messages();
        // Recompute W(m, j; sigma) and check complementary slackness.
        for j in 0..k {
            let w_row: Vec<f64> = (0..k)
                .map(|m| {
                    let mut v = 0.0;
                    for (a, &s) in sol.agent_strategy[m][0].iter().enumerate() {
                        let mu = game.messages()[j].0.probs()[1];
                        let act = a as f64 / 8.0;
                        let q = -(1.0 - mu) * act * act - mu * (act - 1.0) * (act - 1.0);
                        v += s * q;
                    }
                    v
                })
                .collect();
            let worst = w_row.iter().cloned().fold(f64::INFINITY, f64::min);
            for m in 0..k {
                if sol.adversary_strategy[j][m] > 1e-9 {
                    assert!(
                        w_row[m] <= worst + 1e-9,
                        "posterior {j} message {m}: {} vs min {worst}",
                        w_row[m]
                    );
                }
            }
        }
    }

    #[test]
    fn saddle_verifies_and_forced_strategy_fails() {
        let game = binary_grid_game(9, 9, 0.75);
        let sol = solve_saddle(&game).unwrap();
        let u = UtilityCurve::quadratic_loss();
        let report = verify_trs_structure(&game, &sol, Some(&u)).unwrap();
        assert!(report.all_pass, "{:#?}", report.messages);
        assert!(report.empirical_trust.is_some());

        // Forcing the agent to the lowest action everywhere must fail.
        let mut forced = sol.clone();
        for m in 0..game.n_messages() {
            for t in 0..game.n_types() {
                for a in 0..game.n_actions() {
                    forced.agent_strategy[m][t][a] = if a == 0 { 1.0 } else { 0.0 };
                }
            }
        }
        let report = verify_trs_structure(&game, &forced, None).unwrap();
        assert!(!report.all_pass);
        assert!(report
            .messages
            .iter()
            .any(|c| c.best_response_margin > 1e-3));
    }

    #[test]
    fn log_score_grid_recovers_continuous_interval() {
        // Discretized log-score instance: actions report a clamped
        // probability, messages are a uniform 21-point grid. The oracle's
        // empirical trust set must land within one grid cell of the
        // continuous solver's interval.
        use crate::binary_trust::solve_trust_interval;
        use crate::density::BeliefDensity;
        let k = 21;
        let alpha = 0.8;
        let atoms: Vec<(f64, f64)> = (0..k)
            .map(|i| (i as f64 / (k - 1) as f64, 1.0 / k as f64))
            .collect();
        let eps = 5e-3;
        let mut payoff = Vec::new();
        for a in 0..k {
            let p = (a as f64 / (k - 1) as f64).clamp(eps, 1.0 - eps);
            payoff.push((1.0 - p).ln()); // state 0
            payoff.push(p.ln()); // state 1
        }
        let game = FiniteGame::binary(&atoms, k, &payoff, alpha).unwrap();
        let sol = solve_saddle(&game).unwrap();
        assert!(sol.exploitability.0 <= EXPLOIT_TOL && sol.exploitability.1 <= EXPLOIT_TOL);
        let curve = UtilityCurve::log_score();
        let report = verify_trs_structure(&game, &sol, Some(&curve)).unwrap();
        assert!(report.all_pass);
        let (lo_d, hi_d) = report.empirical_trust.unwrap();
        let cont = solve_trust_interval(&curve, &BeliefDensity::uniform(), alpha).unwrap();
        let cell = 1.0 / (k - 1) as f64;
        assert!(
            (lo_d - cont.lo).abs() <= cell && (hi_d - cont.hi).abs() <= cell,
            "discrete [{lo_d}, {hi_d}] vs continuous [{}, {}]",
            cont.lo,
            cont.hi
        );
    }

    #[test]
    fn informative_adviser_has_value_at_full_alignment() {
        // Blackwell: strictly convex induced payoffs make information
        // strictly valuable once it is trusted.
        let av = adviser_value(&binary_grid_game(11, 11, 1.0)).unwrap();
        assert!(av.value > 1e-3, "value {}", av.value);
        assert!(av.u_star > av.u_baseline);
    }

    #[test]
    fn off_path_messages_get_prior_optimal_action() {
        // At alpha = 0 the adversary pools everything; messages it avoids
        // are off path and must carry the deterministic prior-best action.
        let game = binary_grid_game(5, 5, 0.0);
        let sol = solve_saddle(&game).unwrap();
        // Prior 0.5: best grid action is a = 0.5, index 2.
        for m in 0..game.n_messages() {
            if sol.off_path[m] {
                assert_eq!(sol.agent_strategy[m][0][2], 1.0, "message {m}");
                assert_eq!(sol.induced_posteriors[m], game.prior().to_vec());
            }
        }
        assert!(
            sol.off_path.iter().any(|&b| b),
            "expected at least one off-path message at alpha = 0"
        );
    }

    #[test]
    fn degenerate_games_rejected() {
        assert!(FiniteGame::binary(&[], 3, &[0.0; 6], 0.5).is_err());
        assert!(FiniteGame::binary(&[(0.5, 1.0)], 0, &[], 0.5).is_err());
        // Not Bayes-plausible: prior is forced by the atoms in the binary
        // helper, so break plausibility via the general constructor.
        let bad = FiniteGame::new(
            Belief::binary(0.3).unwrap(),
            vec![(Belief::binary(0.9).unwrap(), 1.0)],
            vec![vec![1.0], vec![1.0]],
            2,
            vec![0.0, 0.0, 1.0, 1.0],
            0.5,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn game_spec_round_trip() {
        let game = binary_grid_game(5, 3, 0.6);
        let json = serde_json::to_string(&game).unwrap();
        let back: FiniteGame = serde_json::from_str(&json).unwrap();
        assert_eq!(game, back);
    }
}
