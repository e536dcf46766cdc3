//! Parallel multi-seed execution.
//!
//! Each seed owns its environment, policy and instance-relabeling streams, so
//! results are identical for any thread count and any seed order.

use rankbreak_core::sim::run_episode_observed;
use rankbreak_core::{
    aggregate, build_policy, rng_for, streams, BatchResult, CheckpointSchedule, Feedback, PlInstance, PolicySpec,
    RegretTrace, WinMatrix,
};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::config::check_compatible;
use crate::error::{AppError, AppResult};

/// One (instance, policy) cell of an experiment.
#[derive(Debug, Clone, Copy)]
pub struct Job<'a> {
    pub instance: &'a PlInstance,
    /// Relabel items per seed before the episode.
    pub shuffle: bool,
    pub policy: &'a PolicySpec,
    pub horizon: u64,
    pub schedule: &'a CheckpointSchedule,
}

#[derive(Debug, Clone)]
pub struct BatchOutput {
    /// Per-seed traces in ascending seed order.
    pub traces: Vec<RegretTrace>,
    pub result: BatchResult,
}

pub fn make_pool(threads: usize) -> AppResult<ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| AppError::Runtime(format!("thread pool: {e}")))
}

/// Thread count used when neither the config nor the command line sets one.
pub fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// The instance actually played under `seed`.
pub fn episode_instance(base: &PlInstance, shuffle: bool, seed: u64) -> PlInstance {
    if shuffle {
        base.shuffled(&mut rng_for(seed, streams::INSTANCE))
    } else {
        base.clone()
    }
}

impl Job<'_> {
    pub fn run_seed(&self, seed: u64) -> AppResult<RegretTrace> {
        self.run_seed_observed(seed, |_, _, _| {})
    }

    /// Runs one seed and returns its trace together with the rank-broken win
    /// counts of every observed round.
    pub fn run_seed_with_wins(&self, seed: u64) -> AppResult<(RegretTrace, WinMatrix)> {
        let mut wins = WinMatrix::new(self.instance.k());
        let mut failure = None;
        let trace = self.run_seed_observed(seed, |_, s, fb| {
            let r = match fb {
                Feedback::Winner(w) => wins.rank_break_winner(s, *w),
                Feedback::Ranking(sigma) => wins.rank_break_topk(s, sigma),
            };
            if let Err(e) = r {
                failure.get_or_insert(e);
            }
        })?;
        match failure {
            Some(e) => Err(e.into()),
            None => Ok((trace, wins)),
        }
    }

    fn run_seed_observed<F>(&self, seed: u64, observer: F) -> AppResult<RegretTrace>
    where
        F: FnMut(u64, &rankbreak_core::Assortment, &Feedback),
    {
        let inst = episode_instance(self.instance, self.shuffle, seed);
        let mut policy = build_policy(self.policy, &inst, self.horizon)?;
        let trace = run_episode_observed(&inst, policy.as_mut(), self.horizon, seed, self.schedule, observer)?;
        Ok(trace)
    }

    /// Runs every seed on `pool` and aggregates. Configuration problems are
    /// reported before any episode starts.
    pub fn run_batch(&self, seeds: &[u64], pool: &ThreadPool, fingerprint: u64) -> AppResult<BatchOutput> {
        if seeds.is_empty() {
            return Err(AppError::Config("seeds: must not be empty".into()));
        }
        check_compatible(self.policy, self.instance, self.horizon)?;
        let mut traces = pool.install(|| {
            seeds
                .par_iter()
                .map(|&seed| self.run_seed(seed))
                .collect::<AppResult<Vec<_>>>()
        })?;
        traces.sort_by_key(|t| t.seed);
        let result = aggregate(&traces, fingerprint)?;
        Ok(BatchOutput { traces, result })
    }
}
