//! Online assortment policies.
//!
//! Every algorithm implements [`Policy`]: `select` the round's assortment,
//! `observe` the feedback it produced, `reset` to a fresh seeded state. The
//! harness in [`crate::sim`] drives them without knowing which one it runs.
//!
//! | name          | estimator                        | objective | feedback |
//! |---------------|----------------------------------|-----------|----------|
//! | `aoa-rb-top`  | no-choice pivot                  | top-m     | winner   |
//! | `aoa-rb-wtd`  | no-choice pivot                  | weighted  | winner   |
//! | `aoa-rb-k`    | no-choice pivot                  | weighted  | top-k    |
//! | `adpivot`     | adaptive pivot                   | weighted  | winner   |
//! | `mnl-ucb`     | epoch-based geometric estimates  | weighted  | winner   |
//! | `oracle`      | ground truth                     | weighted  | any      |
//! | `uniform`     | none                             | -         | any      |
//!
//! Learned scores are ratios `θ_i / θ_0`, so the optimizers run them against a
//! unit no-choice score.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::index;

use crate::assort::{max_weighted_assortment, top_m_select};
use crate::error::{Error, Result};
use crate::estimate::{default_x, UcbParams, WinMatrix};
use crate::model::{Assortment, Feedback, FeedbackKind, PlInstance, NO_CHOICE};
use crate::sim::compute_sstar;
use crate::{rng_for, streams, SimRng};

pub trait Policy {
    fn name(&self) -> &str;

    /// Feedback mode the policy consumes; `None` accepts either.
    fn feedback_mode(&self) -> Option<FeedbackMode>;

    fn select(&mut self, t: u64) -> Assortment;

    fn observe(&mut self, s: &Assortment, feedback: &Feedback) -> Result<()>;

    /// Forget everything learned and reseed internal randomness.
    fn reset(&mut self, seed: u64);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackMode {
    Winner,
    Ranking,
}

impl FeedbackMode {
    pub fn of(kind: FeedbackKind) -> Self {
        match kind {
            FeedbackKind::Winner => FeedbackMode::Winner,
            FeedbackKind::TopK(_) => FeedbackMode::Ranking,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    /// Maximize total score `Θ_S` with exactly `m` items.
    TopM,
    /// Maximize expected weighted revenue with at most `m` items.
    Weighted,
}

impl Objective {
    pub fn as_str(self) -> &'static str {
        match self {
            Objective::TopM => "top",
            Objective::Weighted => "wtd",
        }
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "top" | "top-m" => Ok(Objective::TopM),
            "wtd" | "weighted" => Ok(Objective::Weighted),
            other => Err(Error::Config(format!(
                "unknown objective `{other}` (expected `top` or `wtd`)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    AoaRbTop,
    AoaRbWtd,
    AoaRbK,
    AdPivot,
    MnlUcb,
    Oracle,
    Uniform,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 7] = [
        PolicyKind::AoaRbTop,
        PolicyKind::AoaRbWtd,
        PolicyKind::AoaRbK,
        PolicyKind::AdPivot,
        PolicyKind::MnlUcb,
        PolicyKind::Oracle,
        PolicyKind::Uniform,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::AoaRbTop => "aoa-rb-top",
            PolicyKind::AoaRbWtd => "aoa-rb-wtd",
            PolicyKind::AoaRbK => "aoa-rb-k",
            PolicyKind::AdPivot => "adpivot",
            PolicyKind::MnlUcb => "mnl-ucb",
            PolicyKind::Oracle => "oracle",
            PolicyKind::Uniform => "uniform",
        }
    }

    pub fn default_objective(self) -> Objective {
        match self {
            PolicyKind::AoaRbTop => Objective::TopM,
            _ => Objective::Weighted,
        }
    }

    pub fn valid_names() -> String {
        let names: Vec<&str> = Self::ALL.iter().map(|k| k.as_str()).collect();
        names.join(", ")
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown policy `{s}`; valid names: {}",
                    Self::valid_names()
                ))
            })
    }
}

/// Per-policy parameters; unset fields take their defaults at build time.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    /// Confidence parameter; defaults to `2 ln T`.
    pub x: Option<f64>,
    pub theta_cap: f64,
    pub objective: Option<Objective>,
    /// Exploration constant of the MNL-UCB bonus.
    pub mnl_constant: f64,
}

impl PolicySpec {
    pub const DEFAULT_MNL_CONSTANT: f64 = 48.0;

    pub fn new(kind: PolicyKind) -> Self {
        PolicySpec {
            kind,
            x: None,
            theta_cap: UcbParams::DEFAULT_THETA_CAP,
            objective: None,
            mnl_constant: Self::DEFAULT_MNL_CONSTANT,
        }
    }

    pub fn objective(&self) -> Objective {
        self.objective.unwrap_or(self.kind.default_objective())
    }

    pub fn ucb_params(&self, horizon: u64) -> Result<UcbParams> {
        UcbParams::new(self.x.unwrap_or_else(|| default_x(horizon)), self.theta_cap)
    }
}

/// The public, learnable part of an instance: sizes and weights, never scores.
#[derive(Debug, Clone, PartialEq)]
struct Catalog {
    k: usize,
    m: usize,
    weights: Vec<f64>,
}

impl Catalog {
    fn of(inst: &PlInstance) -> Self {
        Catalog {
            k: inst.k(),
            m: inst.m(),
            weights: inst.weights().to_vec(),
        }
    }

    fn optimize(&self, objective: Objective, scores: &[f64]) -> Assortment {
        match objective {
            Objective::TopM => top_m_select(scores, self.m),
            Objective::Weighted => max_weighted_assortment(scores, &self.weights, self.m, 1.0),
        }
    }
}

/// Builds a fresh policy for `inst`. Only the oracle looks at the true scores.
pub fn build_policy(spec: &PolicySpec, inst: &PlInstance, horizon: u64) -> Result<Box<dyn Policy + Send>> {
    let policy: Box<dyn Policy + Send> = match spec.kind {
        PolicyKind::AoaRbTop | PolicyKind::AoaRbWtd | PolicyKind::AoaRbK | PolicyKind::AdPivot => {
            Box::new(RankBreakUcb::from_spec(spec, inst, horizon)?)
        }
        PolicyKind::MnlUcb => Box::new(MnlUcb::from_spec(spec, inst)?),
        PolicyKind::Oracle => Box::new(OraclePolicy::new(inst, spec.objective())),
        PolicyKind::Uniform => Box::new(UniformPolicy::new(Catalog::of(inst), 0)),
    };
    Ok(policy)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pivot {
    /// Every score is estimated against the no-choice item.
    NoChoice,
    /// Scores are chained through whichever pivot gives the tightest bound.
    Adaptive,
}

/// Optimistic play on rank-broken pairwise counts.
///
/// The whole learned state is the [`WinMatrix`]; replaying the same feedback
/// log reproduces every selection.
#[derive(Debug, Clone)]
pub struct RankBreakUcb {
    name: String,
    catalog: Catalog,
    params: UcbParams,
    objective: Objective,
    pivot: Pivot,
    mode: FeedbackMode,
    wins: WinMatrix,
    scores: Vec<f64>,
}

impl RankBreakUcb {
    fn new(catalog: Catalog, params: UcbParams, objective: Objective, pivot: Pivot, mode: FeedbackMode) -> Self {
        let k = catalog.k;
        RankBreakUcb {
            name: String::from("rank-break-ucb"),
            catalog,
            params,
            objective,
            pivot,
            mode,
            wins: WinMatrix::new(k),
            scores: vec![params.theta_cap; k],
        }
    }

    /// One of the four rank-breaking policies described by `spec`.
    pub fn from_spec(spec: &PolicySpec, inst: &PlInstance, horizon: u64) -> Result<Self> {
        let (pivot, mode) = match spec.kind {
            PolicyKind::AoaRbTop | PolicyKind::AoaRbWtd => (Pivot::NoChoice, FeedbackMode::Winner),
            PolicyKind::AoaRbK => (Pivot::NoChoice, FeedbackMode::Ranking),
            PolicyKind::AdPivot => (Pivot::Adaptive, FeedbackMode::Winner),
            other => return Err(Error::Config(format!("`{other}` is not a rank-breaking policy"))),
        };
        let mut p = RankBreakUcb::new(Catalog::of(inst), spec.ucb_params(horizon)?, spec.objective(), pivot, mode);
        p.name = String::from(spec.kind.as_str());
        Ok(p)
    }

    pub fn win_matrix(&self) -> &WinMatrix {
        &self.wins
    }

    /// Score bounds used by the most recent `select`.
    pub fn last_scores(&self) -> &[f64] {
        &self.scores
    }
}

impl Policy for RankBreakUcb {
    fn name(&self) -> &str {
        &self.name
    }

    fn feedback_mode(&self) -> Option<FeedbackMode> {
        Some(self.mode)
    }

    fn select(&mut self, _t: u64) -> Assortment {
        self.scores = match self.pivot {
            Pivot::NoChoice => self.wins.theta_ucb_all(&self.params),
            Pivot::Adaptive => {
                let adaptive = self.wins.adaptive_theta_ucb_all(&self.params);
                debug_assert!(adaptive
                    .iter()
                    .zip(self.wins.theta_ucb_all(&self.params))
                    .all(|(a, p)| *a <= p));
                adaptive
            }
        };
        self.catalog.optimize(self.objective, &self.scores)
    }

    fn observe(&mut self, s: &Assortment, feedback: &Feedback) -> Result<()> {
        match (self.mode, feedback) {
            (FeedbackMode::Winner, Feedback::Winner(w)) => self.wins.rank_break_winner(s, *w),
            (FeedbackMode::Ranking, Feedback::Ranking(sigma)) => {
                self.wins.rank_break_topk(s, sigma)
            }
            (FeedbackMode::Winner, Feedback::Ranking(_)) => Err(Error::Contract(format!(
                "{} consumes winner feedback, got a ranking",
                self.name
            ))),
            (FeedbackMode::Ranking, Feedback::Winner(_)) => Err(Error::Contract(format!(
                "{} consumes ranking feedback, got a winner",
                self.name
            ))),
        }
    }

    fn reset(&mut self, _seed: u64) {
        self.wins = WinMatrix::new(self.catalog.k);
        self.scores = vec![self.params.theta_cap; self.catalog.k];
    }
}

/// Epoch-based MNL bandit: offer one assortment until the no-choice item is
/// picked, then refresh the per-item estimates from the epoch's pick counts.
///
/// Within an epoch, the number of picks of item `i` is geometric with mean
/// `θ_i / θ_0`. The bonus is `sqrt(v̄ C ln(√K ℓ + 1) / T_i) + C ln(√K ℓ + 1) / T_i`
/// where `ℓ` counts completed epochs and `T_i` the epochs that offered `i`.
#[derive(Debug, Clone)]
pub struct MnlUcb {
    catalog: Catalog,
    objective: Objective,
    constant: f64,
    cap: f64,
    current: Option<Assortment>,
    epoch_picks: Vec<u64>,
    pick_sums: Vec<u64>,
    epochs_offered: Vec<u64>,
    completed_epochs: u64,
    ucb: Vec<f64>,
}

impl MnlUcb {
    fn new(catalog: Catalog, objective: Objective, constant: f64, cap: f64) -> Self {
        let k = catalog.k;
        MnlUcb {
            catalog,
            objective,
            constant,
            cap,
            current: None,
            epoch_picks: vec![0; k],
            pick_sums: vec![0; k],
            epochs_offered: vec![0; k],
            completed_epochs: 0,
            ucb: vec![cap; k],
        }
    }

    pub fn from_spec(spec: &PolicySpec, inst: &PlInstance) -> Result<Self> {
        if !(spec.mnl_constant.is_finite() && spec.mnl_constant > 0.0) {
            return Err(Error::Config(format!(
                "mnl_constant = {} must be positive",
                spec.mnl_constant
            )));
        }
        Ok(MnlUcb::new(Catalog::of(inst), spec.objective(), spec.mnl_constant, spec.theta_cap))
    }

    pub fn completed_epochs(&self) -> u64 {
        self.completed_epochs
    }

    /// Running mean of per-epoch picks of item `i`, if it was ever offered.
    pub fn mean_picks(&self, i: usize) -> Option<f64> {
        let n = self.epochs_offered[i - 1];
        (n > 0).then(|| self.pick_sums[i - 1] as f64 / n as f64)
    }

    pub fn ucb(&self) -> &[f64] {
        &self.ucb
    }

    fn refresh_ucb(&mut self) {
        let log_term = libm::log(libm::sqrt(self.catalog.k as f64) * self.completed_epochs as f64 + 1.0);
        let c = self.constant * log_term;
        for i in 0..self.catalog.k {
            let n = self.epochs_offered[i];
            self.ucb[i] = if n == 0 {
                self.cap
            } else {
                let n = n as f64;
                let mean = self.pick_sums[i] as f64 / n;
                (mean + libm::sqrt(mean * c / n) + c / n).min(self.cap)
            };
        }
    }
}

impl Policy for MnlUcb {
    fn name(&self) -> &str {
        PolicyKind::MnlUcb.as_str()
    }

    fn feedback_mode(&self) -> Option<FeedbackMode> {
        Some(FeedbackMode::Winner)
    }

    fn select(&mut self, _t: u64) -> Assortment {
        if self.current.is_none() {
            self.current = Some(self.catalog.optimize(self.objective, &self.ucb));
        }
        self.current.clone().unwrap()
    }

    fn observe(&mut self, s: &Assortment, feedback: &Feedback) -> Result<()> {
        let Feedback::Winner(w) = *feedback else {
            return Err(Error::Contract("mnl-ucb consumes winner feedback, got a ranking".into()));
        };
        if !s.contains_with_no_choice(w) || s.items().last().is_some_and(|&i| i > self.catalog.k) {
            return Err(Error::Domain(format!("winner {w} is not in S ∪ {{0}}")));
        }
        if w != NO_CHOICE {
            self.epoch_picks[w - 1] += 1;
            return Ok(());
        }
        for &i in s.items() {
            self.epochs_offered[i - 1] += 1;
            self.pick_sums[i - 1] += self.epoch_picks[i - 1];
        }
        self.epoch_picks.iter_mut().for_each(|c| *c = 0);
        self.completed_epochs += 1;
        self.refresh_ucb();
        self.current = None;
        Ok(())
    }

    fn reset(&mut self, _seed: u64) {
        *self = MnlUcb::new(self.catalog.clone(), self.objective, self.constant, self.cap);
    }
}

/// Always plays the true optimum for its objective.
#[derive(Debug, Clone)]
pub struct OraclePolicy {
    best: Assortment,
}

impl OraclePolicy {
    pub fn new(inst: &PlInstance, objective: Objective) -> Self {
        OraclePolicy {
            best: compute_sstar(inst, objective).0,
        }
    }
}

impl Policy for OraclePolicy {
    fn name(&self) -> &str {
        PolicyKind::Oracle.as_str()
    }

    fn feedback_mode(&self) -> Option<FeedbackMode> {
        None
    }

    fn select(&mut self, _t: u64) -> Assortment {
        self.best.clone()
    }

    fn observe(&mut self, _s: &Assortment, _feedback: &Feedback) -> Result<()> {
        Ok(())
    }

    fn reset(&mut self, _seed: u64) {}
}

/// Plays a uniformly random `m`-subset every round.
#[derive(Debug, Clone)]
pub struct UniformPolicy {
    catalog: Catalog,
    rng: SimRng,
}

impl UniformPolicy {
    fn new(catalog: Catalog, seed: u64) -> Self {
        UniformPolicy {
            catalog,
            rng: rng_for(seed, streams::POLICY),
        }
    }
}

impl Policy for UniformPolicy {
    fn name(&self) -> &str {
        PolicyKind::Uniform.as_str()
    }

    fn feedback_mode(&self) -> Option<FeedbackMode> {
        None
    }

    fn select(&mut self, _t: u64) -> Assortment {
        let mut items: Vec<usize> = index::sample(&mut self.rng, self.catalog.k, self.catalog.m)
            .into_iter()
            .map(|i| i + 1)
            .collect();
        items.sort_unstable();
        Assortment::from_sorted(items)
    }

    fn observe(&mut self, _s: &Assortment, _feedback: &Feedback) -> Result<()> {
        Ok(())
    }

    fn reset(&mut self, seed: u64) {
        self.rng = rng_for(seed, streams::POLICY);
    }
}
