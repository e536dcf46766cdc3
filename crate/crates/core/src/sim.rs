//! Episode execution and regret accounting.
//!
//! Regret is computed from the ground-truth instance every round, using the
//! exact expected quantities (`Θ_S` and the weighted revenue), never from the
//! sampled feedback:
//!
//! - top-m regret increment: `(Θ_{S*} − Θ_{S_t}) / m`
//! - weighted regret increment: `R(S*) − R(S_t)`

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::assort::{brute_force_assortment, top_m_select, ParametricSolver};
use crate::error::{Error, Result};
use crate::model::{Assortment, Feedback, PlInstance};
use crate::policy::{FeedbackMode, Objective, Policy};
use crate::{rng_for, streams};

/// Largest `K` for which the true optimum is cross-checked exhaustively.
pub const SSTAR_BRUTE_FORCE_K: usize = 12;

/// Optimal assortment for `objective` and its value (`Θ_{S*}` for top-m,
/// `R(S*)` for the weighted objective).
pub fn compute_sstar(inst: &PlInstance, objective: Objective) -> (Assortment, f64) {
    match objective {
        Objective::TopM => {
            let s = top_m_select(inst.theta(), inst.m());
            let total = inst.total_score(&s);
            (s, total)
        }
        Objective::Weighted => {
            let solver = ParametricSolver::with_tolerance(1e-15);
            let mut best = solver.solve(inst.theta(), inst.weights(), inst.m(), inst.theta0());
            let mut value = inst.expected_revenue(&best);
            if inst.k() <= SSTAR_BRUTE_FORCE_K {
                let (s, v) = brute_force_assortment(inst.theta(), inst.weights(), inst.m(), inst.theta0())
                    .expect("small instance");
                if v > value {
                    best = s;
                    value = v;
                }
            }
            (best, value)
        }
    }
}

/// Rounds at which cumulative regret is recorded. The horizon is always
/// included.
#[derive(Debug, Clone, PartialEq)]
pub enum CheckpointSchedule {
    /// `t = ⌈ratio^j⌉`, deduplicated.
    Geometric { ratio: f64 },
    /// Every round.
    Full,
    Explicit(Vec<u64>),
}

impl Default for CheckpointSchedule {
    fn default() -> Self {
        CheckpointSchedule::Geometric { ratio: 1.1 }
    }
}

impl CheckpointSchedule {
    pub fn times(&self, horizon: u64) -> Vec<u64> {
        let mut times: Vec<u64> = match self {
            CheckpointSchedule::Full => (1..=horizon).collect(),
            CheckpointSchedule::Explicit(ts) => ts.iter().copied().filter(|&t| t >= 1 && t <= horizon).collect(),
            CheckpointSchedule::Geometric { ratio } => {
                let ratio = if *ratio > 1.0 { *ratio } else { 1.1 };
                let mut out = Vec::new();
                let mut j = 0;
                loop {
                    let t = libm::ceil(libm::pow(ratio, j as f64)) as u64;
                    if t > horizon {
                        break;
                    }
                    out.push(t);
                    j += 1;
                }
                out
            }
        };
        times.push(horizon);
        times.sort_unstable();
        times.dedup();
        times
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretPoint {
    pub t: u64,
    pub reg_top: f64,
    pub reg_wtd: f64,
}

/// Cumulative regrets of one episode at its checkpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub instance: String,
    pub policy: String,
    pub seed: u64,
    pub points: Vec<RegretPoint>,
}

impl RegretTrace {
    pub fn last(&self) -> RegretPoint {
        *self.points.last().expect("traces have at least one checkpoint")
    }

    pub fn at(&self, t: u64) -> Option<RegretPoint> {
        self.points.iter().find(|p| p.t == t).copied()
    }
}

/// Runs one episode; see [`run_episode_observed`].
pub fn run_episode(
    inst: &PlInstance,
    policy: &mut dyn Policy,
    horizon: u64,
    seed: u64,
    schedule: &CheckpointSchedule,
) -> Result<RegretTrace> {
    run_episode_observed(inst, policy, horizon, seed, schedule, |_, _, _| {})
}

/// Runs `horizon` rounds of `policy` against `inst`, calling `observer` with
/// every `(t, S_t, feedback)`.
///
/// The policy is reset with `seed`; feedback is drawn from the environment
/// stream of the same seed, so two policies run with one seed see the same
/// underlying random numbers.
pub fn run_episode_observed<F>(
    inst: &PlInstance,
    policy: &mut dyn Policy,
    horizon: u64,
    seed: u64,
    schedule: &CheckpointSchedule,
    mut observer: F,
) -> Result<RegretTrace>
where
    F: FnMut(u64, &Assortment, &Feedback),
{
    if horizon == 0 {
        return Err(Error::Config("horizon must be at least 1".into()));
    }
    let env_mode = FeedbackMode::of(inst.feedback());
    if let Some(mode) = policy.feedback_mode() {
        if mode != env_mode {
            return Err(Error::Config(format!(
                "policy {} expects {:?} feedback but the instance produces {:?}",
                policy.name(),
                mode,
                env_mode
            )));
        }
    }

    let (_, best_total) = compute_sstar(inst, Objective::TopM);
    let (_, best_revenue) = compute_sstar(inst, Objective::Weighted);
    let m = inst.m() as f64;

    policy.reset(seed);
    let mut rng = rng_for(seed, streams::ENVIRONMENT);
    let checkpoints = schedule.times(horizon);
    let mut next = checkpoints.iter().copied().peekable();
    let mut points = Vec::with_capacity(checkpoints.len());
    let (mut reg_top, mut reg_wtd) = (0.0, 0.0);

    for t in 1..=horizon {
        let s = policy.select(t);
        if s.len() > inst.m() || s.items().last().is_some_and(|&i| i > inst.k()) {
            return Err(Error::Contract(format!(
                "{} played {:?} with K = {}, m = {}",
                policy.name(),
                s.items(),
                inst.k(),
                inst.m()
            )));
        }
        let feedback = inst.sample_feedback(&s, &mut rng);
        observer(t, &s, &feedback);
        policy.observe(&s, &feedback)?;

        let top = (best_total - inst.total_score(&s)) / m;
        let wtd = best_revenue - inst.expected_revenue(&s);
        debug_assert!(top >= -1e-12 && wtd >= -1e-12, "negative regret increment");
        reg_top += top.max(0.0);
        reg_wtd += wtd.max(0.0);

        if next.peek() == Some(&t) {
            next.next();
            points.push(RegretPoint { t, reg_top, reg_wtd });
        }
    }

    Ok(RegretTrace {
        instance: String::from(inst.name()),
        policy: String::from(policy.name()),
        seed,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregatePoint {
    pub t: u64,
    pub mean_top: f64,
    pub std_top: f64,
    pub mean_wtd: f64,
    pub std_wtd: f64,
}

/// Seed-aggregated regret curves. Standard deviations are sample standard
/// deviations (`n − 1` denominator), zero for a single seed.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchResult {
    pub instance: String,
    pub policy: String,
    /// Seeds in ascending order.
    pub seeds: Vec<u64>,
    pub fingerprint: u64,
    pub points: Vec<AggregatePoint>,
}

impl BatchResult {
    pub fn last(&self) -> AggregatePoint {
        *self.points.last().expect("aggregates have at least one checkpoint")
    }

    pub fn at(&self, t: u64) -> Option<AggregatePoint> {
        self.points.iter().find(|p| p.t == t).copied()
    }
}

/// Aggregates traces of one (instance, policy) pair. The result does not
/// depend on the order of `traces`.
pub fn aggregate(traces: &[RegretTrace], fingerprint: u64) -> Result<BatchResult> {
    let first = traces
        .first()
        .ok_or_else(|| Error::Domain("cannot aggregate zero traces".into()))?;
    let mut sorted: Vec<&RegretTrace> = traces.iter().collect();
    sorted.sort_by_key(|t| t.seed);

    for tr in &sorted {
        if tr.instance != first.instance || tr.policy != first.policy {
            return Err(Error::Domain("traces from different runs".into()));
        }
        if tr.points.len() != first.points.len()
            || tr.points.iter().zip(&first.points).any(|(a, b)| a.t != b.t)
        {
            return Err(Error::Domain("traces have different checkpoints".into()));
        }
    }

    let mut column = Vec::with_capacity(sorted.len());
    let mut stats = |pick: &dyn Fn(&RegretPoint) -> f64, idx: usize| {
        column.clear();
        column.extend(sorted.iter().map(|tr| pick(&tr.points[idx])));
        mean_std(&column)
    };
    let points = (0..first.points.len())
        .map(|idx| {
            let (mean_top, std_top) = stats(&|p| p.reg_top, idx);
            let (mean_wtd, std_wtd) = stats(&|p| p.reg_wtd, idx);
            AggregatePoint {
                t: first.points[idx].t,
                mean_top,
                std_top,
                mean_wtd,
                std_wtd,
            }
        })
        .collect();

    Ok(BatchResult {
        instance: first.instance.clone(),
        policy: first.policy.clone(),
        seeds: sorted.iter().map(|t| t.seed).collect(),
        fingerprint,
        points,
    })
}

fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    (mean, libm::sqrt(pairwise_sum(&dev) / (n - 1.0)))
}
