//! Rank-breaking statistics and the UCB estimators derived from them.
//!
//! Every observed winner or top-k ranking is broken into pairwise wins and
//! accumulated in a [`WinMatrix`]. From the counts we form empirical pairwise
//! preferences `p̂_ij = w_ij / n_ij`, Bernstein-style upper confidence bounds
//! on them, and score bounds via the odds transform `p / (1 - p)`.
//!
//! Pairs that were never compared are treated with maximal optimism: their
//! bound is `1`, and any odds bound whose `p` reaches `1` is replaced by the
//! finite `theta_cap`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{Assortment, NO_CHOICE};

/// Confidence parameter and the finite stand-in for an infinite score bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UcbParams {
    pub x: f64,
    pub theta_cap: f64,
}

impl UcbParams {
    pub const DEFAULT_THETA_CAP: f64 = 1e6;

    pub fn new(x: f64, theta_cap: f64) -> Result<Self> {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::Config(format!("confidence parameter x = {x} must be positive")));
        }
        if !(theta_cap.is_finite() && theta_cap > 0.0) {
            return Err(Error::Config(format!("theta_cap = {theta_cap} must be positive")));
        }
        Ok(UcbParams { x, theta_cap })
    }

    /// `x = 2 ln T`. Horizons below 2 are treated as 2 so `x` stays positive.
    pub fn for_horizon(horizon: u64) -> Self {
        UcbParams {
            x: default_x(horizon),
            theta_cap: Self::DEFAULT_THETA_CAP,
        }
    }
}

pub fn default_x(horizon: u64) -> f64 {
    2.0 * libm::log(horizon.max(2) as f64)
}

/// Pairwise win counts over `{0, 1, ..., K}`; `w[i][j]` counts wins of `i`
/// over `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WinMatrix {
    dim: usize,
    w: Vec<u64>,
}

impl WinMatrix {
    /// An all-zero matrix for `k` items plus the no-choice item.
    pub fn new(k: usize) -> Self {
        let dim = k + 1;
        WinMatrix {
            dim,
            w: vec![0; dim * dim],
        }
    }

    pub fn k(&self) -> usize {
        self.dim - 1
    }

    pub fn wins(&self, i: usize, j: usize) -> u64 {
        self.w[i * self.dim + j]
    }

    /// `n_ij = w_ij + w_ji`.
    pub fn comparisons(&self, i: usize, j: usize) -> u64 {
        self.wins(i, j) + self.wins(j, i)
    }

    /// Sum of all counts.
    pub fn total(&self) -> u64 {
        self.w.iter().sum()
    }

    /// Iterates `(i, j, count)` over every cell, row-major.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.w
            .iter()
            .enumerate()
            .map(move |(idx, &c)| (idx / self.dim, idx % self.dim, c))
    }

    /// Adds `count` wins of `i` over `j`; used to build matrices directly.
    pub fn add_wins(&mut self, i: usize, j: usize, count: u64) -> Result<()> {
        if i == j || i >= self.dim || j >= self.dim {
            return Err(Error::Domain(format!("no cell ({i}, {j})")));
        }
        self.w[i * self.dim + j] += count;
        Ok(())
    }

    fn bump(&mut self, i: usize, j: usize) {
        self.w[i * self.dim + j] += 1;
    }

    fn check_set(&self, s: &Assortment) -> Result<()> {
        match s.items().last() {
            Some(&top) if top < self.dim => Ok(()),
            _ => Err(Error::Domain(format!("assortment exceeds {} items", self.k()))),
        }
    }

    /// The winner beats every other member of `S ∪ {0}`.
    pub fn rank_break_winner(&mut self, s: &Assortment, winner: usize) -> Result<()> {
        self.check_set(s)?;
        if !s.contains_with_no_choice(winner) {
            return Err(Error::Domain(format!("winner {winner} is not in S ∪ {{0}}")));
        }
        for j in s.pool() {
            if j != winner {
                self.bump(winner, j);
            }
        }
        Ok(())
    }

    /// Each ranked entry beats every member of `S ∪ {0}` not ranked at or
    /// above it.
    pub fn rank_break_topk(&mut self, s: &Assortment, sigma: &[usize]) -> Result<()> {
        self.check_set(s)?;
        if sigma.len() > s.len() + 1 {
            return Err(Error::Domain(format!("ranking of length {} from {} candidates", sigma.len(), s.len() + 1)));
        }
        for (a, &i) in sigma.iter().enumerate() {
            if !s.contains_with_no_choice(i) {
                return Err(Error::Domain(format!("ranked index {i} is not in S ∪ {{0}}")));
            }
            if sigma[..a].contains(&i) {
                return Err(Error::Domain(format!("index {i} ranked twice")));
            }
        }
        for (pos, &winner) in sigma.iter().enumerate() {
            let above = &sigma[..=pos];
            for j in s.pool() {
                if !above.contains(&j) {
                    self.bump(winner, j);
                }
            }
        }
        Ok(())
    }

    /// Empirical preference of `i` over `j`; `None` for a never-compared pair.
    /// The diagonal is `1/2` by convention.
    pub fn p_hat(&self, i: usize, j: usize) -> Option<f64> {
        if i == j {
            return Some(0.5);
        }
        let n = self.comparisons(i, j);
        (n > 0).then(|| self.wins(i, j) as f64 / n as f64)
    }

    /// `p̂ + sqrt(2 p̂ (1 - p̂) x / n) + 3x / n`, unclipped. Unseen pairs give `1`.
    pub fn p_ucb(&self, i: usize, j: usize, params: &UcbParams) -> f64 {
        if i == j {
            return 0.5;
        }
        let n = self.comparisons(i, j);
        if n == 0 {
            return 1.0;
        }
        let n = n as f64;
        let p = self.wins(i, j) as f64 / n;
        let x = params.x;
        p + libm::sqrt(2.0 * p * (1.0 - p) * x / n) + 3.0 * x / n
    }

    /// Upper bound on `theta_i / theta_j`; exactly `1` on the diagonal.
    pub fn gamma_ucb(&self, i: usize, j: usize, params: &UcbParams) -> f64 {
        if i == j {
            return 1.0;
        }
        odds_capped(self.p_ucb(i, j, params), params.theta_cap)
    }

    /// Upper bound on `theta_i / theta_0` with the no-choice item as pivot.
    pub fn theta_ucb(&self, i: usize, params: &UcbParams) -> f64 {
        self.gamma_ucb(i, NO_CHOICE, params)
    }

    /// `min_j γ_ij · γ_j0` over every pivot `j ∈ {0, ..., K}`, capped.
    pub fn adaptive_theta_ucb(&self, i: usize, params: &UcbParams) -> f64 {
        let to_zero: Vec<f64> = (0..self.dim)
            .map(|j| self.gamma_ucb(j, NO_CHOICE, params))
            .collect();
        self.adaptive_with_pivots(i, &to_zero, params)
    }

    pub(crate) fn adaptive_with_pivots(&self, i: usize, to_zero: &[f64], params: &UcbParams) -> f64 {
        let mut best = params.theta_cap;
        for (j, &g_j0) in to_zero.iter().enumerate() {
            let v = (self.gamma_ucb(i, j, params) * g_j0).min(params.theta_cap);
            if v < best {
                best = v;
            }
        }
        best
    }

    /// No-choice-pivot bounds for items `1..=K`.
    pub fn theta_ucb_all(&self, params: &UcbParams) -> Vec<f64> {
        (1..self.dim).map(|i| self.theta_ucb(i, params)).collect()
    }

    /// Adaptive-pivot bounds for items `1..=K`.
    pub fn adaptive_theta_ucb_all(&self, params: &UcbParams) -> Vec<f64> {
        let to_zero: Vec<f64> = (0..self.dim)
            .map(|j| self.gamma_ucb(j, NO_CHOICE, params))
            .collect();
        (1..self.dim)
            .map(|i| self.adaptive_with_pivots(i, &to_zero, params))
            .collect()
    }
}

/// `p / (1 - p)_+`, replaced by `cap` once `p >= 1` and clamped to `cap`.
pub fn odds_capped(p: f64, cap: f64) -> f64 {
    if p >= 1.0 {
        cap
    } else {
        (p / (1.0 - p)).min(cap)
    }
}
