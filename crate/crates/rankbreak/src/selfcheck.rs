//! Numerical self-tests: optimizer against exhaustive search, sampler against
//! closed-form probabilities, and confidence-bound coverage on simulated
//! streams. Each returns a report; callers decide what counts as failure.

use rand::seq::index;
use rand::Rng;
use rankbreak_core::assort::revenue;
use rankbreak_core::estimate::default_x;
use rankbreak_core::{
    brute_force_assortment, rng_for, Assortment, Feedback, FeedbackKind, ParametricSolver, PlInstance, SimRng,
    UcbParams, WinMatrix,
};
use rayon::prelude::*;

/// Largest item count accepted by [`optimizer_equivalence`].
pub const ORACLE_MAX_K: usize = 12;

/// Absolute revenue gap still counted as a match.
pub const REVENUE_TOLERANCE: f64 = 1e-9;

// Streams private to the self-tests, disjoint from the simulation streams.
const STREAM_OPTIMIZER: u64 = 100;
const STREAM_SAMPLER: u64 = 101;
const STREAM_COVERAGE: u64 = 102;

fn log_uniform(rng: &mut SimRng, lo_exp: f64, hi_exp: f64) -> f64 {
    10f64.powf(rng.random_range(lo_exp..hi_exp))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub matches: usize,
    pub total: usize,
    pub worst_gap: f64,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.matches == self.total
    }
}

/// Compares the parametric solver (bisection stopped at `tolerance`) with
/// exhaustive search on `count` random instances of up to `k_max` items.
pub fn optimizer_equivalence(count: usize, k_max: usize, tolerance: f64, seed: u64) -> EquivalenceReport {
    assert!((1..=ORACLE_MAX_K).contains(&k_max), "k_max must be in 1..={ORACLE_MAX_K}");
    let solver = ParametricSolver::with_tolerance(tolerance);
    let mut rng = rng_for(seed, STREAM_OPTIMIZER);
    let mut report = EquivalenceReport {
        matches: 0,
        total: count,
        worst_gap: 0.0,
    };
    for _ in 0..count {
        let k = rng.random_range(1..=k_max);
        let m = rng.random_range(1..=k);
        let scores: Vec<f64> = (0..k).map(|_| log_uniform(&mut rng, -3.0, 3.0)).collect();
        let weights: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
        let theta0 = log_uniform(&mut rng, -3.0, 3.0);

        let fast = solver.solve(&scores, &weights, m, theta0);
        let (_, best) = brute_force_assortment(&scores, &weights, m, theta0).expect("k within limit");
        let gap = best - revenue(&scores, &weights, theta0, fast.items());
        report.worst_gap = report.worst_gap.max(gap);
        if gap <= REVENUE_TOLERANCE {
            report.matches += 1;
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerReport {
    /// Largest |empirical − exact| winner frequency.
    pub winner_deviation: f64,
    /// Largest |empirical − exact| ranking frequency.
    pub ranking_deviation: f64,
}

fn random_instance(rng: &mut SimRng, k_max: usize) -> PlInstance {
    let k = rng.random_range(1..=k_max);
    let theta = (0..k).map(|_| log_uniform(rng, -1.0, 1.0)).collect();
    let theta0 = log_uniform(rng, -1.0, 1.0);
    PlInstance::new(theta, theta0, vec![1.0; k], k, FeedbackKind::Winner).expect("positive scores")
}

fn random_subset(rng: &mut SimRng, k: usize, max_len: usize) -> Assortment {
    let len = rng.random_range(1..=k.min(max_len));
    let items = index::sample(rng, k, len).into_iter().map(|i| i + 1).collect();
    Assortment::new(items, k, k).expect("distinct in-range items")
}

/// Every ordered selection of `len` distinct entries of `pool`.
fn arrangements(pool: &[usize], len: usize) -> Vec<Vec<usize>> {
    if len == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (a, &head) in pool.iter().enumerate() {
        let rest: Vec<usize> = pool.iter().enumerate().filter(|(b, _)| *b != a).map(|(_, &x)| x).collect();
        for mut tail in arrangements(&rest, len - 1) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Winner frequencies on `pairs` random (instance, assortment) pairs and the
/// joint top-k law on `pairs` random assortments of at most three items, each
/// estimated from `draws` samples.
pub fn sampler_fidelity(pairs: usize, draws: usize, seed: u64) -> SamplerReport {
    let cases: Vec<(u64, usize)> = (0..pairs as u64).map(|c| (c, 0)).chain((0..pairs as u64).map(|c| (c, 1))).collect();
    let devs: Vec<(f64, f64)> = cases
        .par_iter()
        .map(|&(case, part)| {
            let mut rng = rng_for(seed.wrapping_mul(1_000_003).wrapping_add(case * 2 + part as u64), STREAM_SAMPLER);
            if part == 0 {
                (winner_deviation(&mut rng, draws), 0.0)
            } else {
                (0.0, ranking_deviation(&mut rng, draws))
            }
        })
        .collect();
    SamplerReport {
        winner_deviation: devs.iter().map(|d| d.0).fold(0.0, f64::max),
        ranking_deviation: devs.iter().map(|d| d.1).fold(0.0, f64::max),
    }
}

fn winner_deviation(rng: &mut SimRng, draws: usize) -> f64 {
    let inst = random_instance(rng, 8);
    let s = random_subset(rng, inst.k(), inst.k());
    let mut counts = vec![0usize; inst.k() + 1];
    for _ in 0..draws {
        if let Feedback::Winner(w) = inst.sample_winner(&s, rng) {
            counts[w] += 1;
        }
    }
    s.pool()
        .map(|i| (counts[i] as f64 / draws as f64 - inst.choice_prob(&s, i).unwrap()).abs())
        .fold(0.0, f64::max)
}

fn ranking_deviation(rng: &mut SimRng, draws: usize) -> f64 {
    let inst = random_instance(rng, 6);
    let s = random_subset(rng, inst.k(), 3);
    let pool: Vec<usize> = s.pool().collect();
    let len = rng.random_range(1..=pool.len());
    let outcomes = arrangements(&pool, len);
    let mut counts = vec![0usize; outcomes.len()];
    for _ in 0..draws {
        let Ok(Feedback::Ranking(r)) = inst.sample_topk(&s, len, rng) else {
            unreachable!("length within pool size")
        };
        counts[outcomes.iter().position(|o| *o == r).expect("ranking is an arrangement")] += 1;
    }
    outcomes
        .iter()
        .zip(&counts)
        .map(|(o, &c)| (c as f64 / draws as f64 - inst.ranking_prob(&s, o).unwrap()).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub repetitions: usize,
    pub horizon: u64,
    /// Worst any-round violation frequency of `p ≤ p_ucb` over the Bernoulli
    /// streams.
    pub pairwise: f64,
    /// Any-round violation frequency of pairwise and score bounds (both
    /// pivots) on winner feedback from a fixed instance.
    pub scores: f64,
}

impl CoverageReport {
    pub fn worst(&self) -> f64 {
        self.pairwise.max(self.scores)
    }
}

const BERNOULLI_MEANS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

/// Instance used for score coverage: four items, two offered per round.
pub fn coverage_instance() -> PlInstance {
    PlInstance::new(vec![1.0, 0.7, 0.4, 0.2], 0.5, vec![1.0; 4], 2, FeedbackKind::Winner).expect("valid instance")
}

/// Confidence-bound coverage with `x = 2 ln horizon`.
pub fn ucb_coverage(horizon: u64, repetitions: usize, seed: u64) -> CoverageReport {
    let params = UcbParams::new(default_x(horizon), UcbParams::DEFAULT_THETA_CAP).expect("positive x");
    let pairwise = BERNOULLI_MEANS
        .iter()
        .enumerate()
        .map(|(c, &p)| {
            let bad = (0..repetitions as u64)
                .into_par_iter()
                .filter(|&rep| {
                    let mut rng = rng_for(seed ^ (rep << 8 | c as u64), STREAM_COVERAGE);
                    bernoulli_violates(p, horizon, &params, &mut rng)
                })
                .count();
            bad as f64 / repetitions as f64
        })
        .fold(0.0, f64::max);

    let inst = coverage_instance();
    let bad = (0..repetitions as u64)
        .into_par_iter()
        .filter(|&rep| {
            let mut rng = rng_for(seed ^ (rep << 8 | 0xff), STREAM_COVERAGE);
            stream_violates(&inst, horizon, &params, &mut rng)
        })
        .count();

    CoverageReport {
        repetitions,
        horizon,
        pairwise,
        scores: bad as f64 / repetitions as f64,
    }
}

fn bernoulli_violates(p: f64, horizon: u64, params: &UcbParams, rng: &mut SimRng) -> bool {
    let mut w = WinMatrix::new(1);
    for _ in 0..horizon {
        let (a, b) = if rng.random::<f64>() < p { (1, 0) } else { (0, 1) };
        w.add_wins(a, b, 1).expect("indices in range");
        if w.p_ucb(1, 0, params) < p {
            return true;
        }
    }
    false
}

fn stream_violates(inst: &PlInstance, horizon: u64, params: &UcbParams, rng: &mut SimRng) -> bool {
    let k = inst.k();
    let score = |i: usize| inst.score(i);
    let mut w = WinMatrix::new(k);
    for _ in 0..horizon {
        let s = random_subset_of_len(rng, k, inst.m());
        let Feedback::Winner(winner) = inst.sample_winner(&s, rng) else {
            unreachable!()
        };
        w.rank_break_winner(&s, winner).expect("winner from pool");

        for i in 0..=k {
            for j in 0..=k {
                if i != j && w.comparisons(i, j) > 0 && w.p_ucb(i, j, params) < score(i) / (score(i) + score(j)) {
                    return true;
                }
            }
        }
        let truth: Vec<f64> = (1..=k).map(|i| score(i) / inst.theta0()).collect();
        let plain = w.theta_ucb_all(params);
        let adaptive = w.adaptive_theta_ucb_all(params);
        if truth.iter().zip(plain.iter().zip(&adaptive)).any(|(t, (p, a))| t > p || t > a) {
            return true;
        }
    }
    false
}

fn random_subset_of_len(rng: &mut SimRng, k: usize, len: usize) -> Assortment {
    let items = index::sample(rng, k, len).into_iter().map(|i| i + 1).collect();
    Assortment::new(items, k, len).expect("distinct in-range items")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_equivalence_run_matches() {
        let r = optimizer_equivalence(200, 8, 1e-10, 3);
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn coarse_tolerance_is_detected() {
        let r = optimizer_equivalence(300, 12, 1e-1, 3);
        assert!(r.matches < r.total, "{r:?}");
    }

    #[test]
    fn arrangements_count() {
        assert_eq!(arrangements(&[0, 1, 2, 3], 2).len(), 12);
        assert_eq!(arrangements(&[0, 1, 2], 3).len(), 6);
    }
}
