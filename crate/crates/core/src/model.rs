//! Ground-truth Plackett-Luce choice model.
//!
//! A [`PlInstance`] holds the item scores `theta_1..theta_K`, the no-choice
//! score `theta_0`, item weights `r_i` and the assortment cap `m`. Offering an
//! [`Assortment`] `S` yields either a single winner from `S ∪ {0}` or a top-k
//! ranking drawn sequentially without replacement from the same pool.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Index of the virtual "select nothing" item.
pub const NO_CHOICE: usize = 0;

/// What the learner observes after each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackKind {
    Winner,
    /// First `k` entries of a Plackett-Luce ranking over `S ∪ {0}`.
    TopK(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feedback {
    Winner(usize),
    Ranking(Vec<usize>),
}

impl Feedback {
    /// The first-ranked index (the winner for either variant).
    pub fn winner(&self) -> Option<usize> {
        match self {
            Feedback::Winner(w) => Some(*w),
            Feedback::Ranking(r) => r.first().copied(),
        }
    }
}

/// A nonempty set of distinct item indices in `1..=K`, stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assortment(Vec<usize>);

impl Assortment {
    /// Validates `items` against item count `k` and cap `m`.
    pub fn new(mut items: Vec<usize>, k: usize, m: usize) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::InvalidAssortment("empty assortment".into()));
        }
        if items.len() > m {
            return Err(Error::InvalidAssortment(format!(
                "{} items offered, cap is {m}",
                items.len()
            )));
        }
        items.sort_unstable();
        if let Some(bad) = items.iter().find(|&&i| i == NO_CHOICE || i > k) {
            return Err(Error::InvalidAssortment(format!(
                "item {bad} outside 1..={k}"
            )));
        }
        if items.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidAssortment("duplicate item".into()));
        }
        Ok(Assortment(items))
    }

    /// Caller guarantees the items are sorted, distinct and nonzero.
    pub(crate) fn from_sorted(items: Vec<usize>) -> Self {
        debug_assert!(!items.is_empty());
        debug_assert!(items.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(items[0] != NO_CHOICE);
        Assortment(items)
    }

    pub fn items(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// `true` for the no-choice index or any offered item.
    pub fn contains_with_no_choice(&self, i: usize) -> bool {
        i == NO_CHOICE || self.contains(i)
    }

    /// The candidate pool `{0} ∪ S`, no-choice first.
    pub fn pool(&self) -> impl Iterator<Item = usize> + '_ {
        core::iter::once(NO_CHOICE).chain(self.0.iter().copied())
    }
}

/// Ground-truth problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct PlInstance {
    name: String,
    theta: Vec<f64>,
    theta0: f64,
    weights: Vec<f64>,
    m: usize,
    feedback: FeedbackKind,
}

fn check_positive(theta: &[f64]) -> Result<()> {
    if theta.is_empty() {
        return Err(Error::InvalidInstance("no items".into()));
    }
    if let Some((i, s)) = theta
        .iter()
        .enumerate()
        .find(|(_, s)| !(s.is_finite() && **s > 0.0))
    {
        return Err(Error::InvalidInstance(format!(
            "score of item {} is {s}, must be positive",
            i + 1
        )));
    }
    Ok(())
}

impl PlInstance {
    pub fn new(
        theta: Vec<f64>,
        theta0: f64,
        weights: Vec<f64>,
        m: usize,
        feedback: FeedbackKind,
    ) -> Result<Self> {
        check_positive(&theta)?;
        let inst = PlInstance {
            name: String::from("instance"),
            theta,
            theta0: 1.0,
            weights: Vec::new(),
            m: 1,
            feedback: FeedbackKind::Winner,
        };
        inst.with_theta0(theta0)?
            .with_weights(weights)?
            .with_m(m)?
            .with_feedback(feedback)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_theta0(mut self, theta0: f64) -> Result<Self> {
        if !(theta0.is_finite() && theta0 > 0.0) {
            return Err(Error::InvalidInstance(format!(
                "no-choice score {theta0} must be positive"
            )));
        }
        self.theta0 = theta0;
        Ok(self)
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.theta.len() {
            return Err(Error::InvalidInstance(format!(
                "{} weights for {} items",
                weights.len(),
                self.theta.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::InvalidInstance(format!("weight {w} outside [0, 1]")));
        }
        self.weights = weights;
        Ok(self)
    }

    pub fn with_m(mut self, m: usize) -> Result<Self> {
        if m == 0 || m > self.theta.len() {
            return Err(Error::InvalidInstance(format!(
                "assortment cap {m} outside 1..={}",
                self.theta.len()
            )));
        }
        if let FeedbackKind::TopK(k) = self.feedback {
            if k > m + 1 {
                return Err(Error::InvalidInstance(format!("top-{k} feedback needs m + 1 >= {k}")));
            }
        }
        self.m = m;
        Ok(self)
    }

    pub fn with_feedback(mut self, feedback: FeedbackKind) -> Result<Self> {
        if let FeedbackKind::TopK(k) = feedback {
            if k == 0 || k > self.m + 1 {
                return Err(Error::InvalidInstance(format!(
                    "top-{k} feedback requires 1 <= k <= m + 1 = {}",
                    self.m
                )));
            }
        }
        self.feedback = feedback;
        Ok(self)
    }

    /// Relabels items: new item `a + 1` is old item `perm[a] + 1`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let k = self.k();
        let mut seen = alloc::vec![false; k];
        if perm.len() != k {
            return Err(Error::Domain(format!("permutation of length {} for {k} items", perm.len())));
        }
        for &p in perm {
            if p >= k || seen[p] {
                return Err(Error::Domain("not a permutation".into()));
            }
            seen[p] = true;
        }
        let mut out = self.clone();
        out.theta = perm.iter().map(|&p| self.theta[p]).collect();
        out.weights = perm.iter().map(|&p| self.weights[p]).collect();
        Ok(out)
    }

    /// A uniformly random relabelling of the items.
    pub fn shuffled<R: Rng + ?Sized>(&self, rng: &mut R) -> Self {
        let mut perm: Vec<usize> = (0..self.k()).collect();
        perm.shuffle(rng);
        self.permuted(&perm).expect("shuffle yields a permutation")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn k(&self) -> usize {
        self.theta.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn feedback(&self) -> FeedbackKind {
        self.feedback
    }

    /// Score of index `i`, with `0` meaning the no-choice item.
    pub fn score(&self, i: usize) -> f64 {
        if i == NO_CHOICE {
            self.theta0
        } else {
            self.theta[i - 1]
        }
    }

    /// `Θ_S`, the total score of the offered items.
    pub fn total_score(&self, s: &Assortment) -> f64 {
        s.items().iter().map(|&i| self.theta[i - 1]).sum()
    }

    /// Probability that `i` wins when `S` is offered.
    pub fn choice_prob(&self, s: &Assortment, i: usize) -> Result<f64> {
        if !s.contains_with_no_choice(i) {
            return Err(Error::Domain(format!("index {i} is not in S ∪ {{0}}")));
        }
        Ok(self.score(i) / (self.theta0 + self.total_score(s)))
    }

    /// Draws a single winner from `S ∪ {0}`.
    pub fn sample_winner<R: Rng + ?Sized>(&self, s: &Assortment, rng: &mut R) -> Feedback {
        let pool: Vec<(usize, f64)> = s.pool().map(|i| (i, self.score(i))).collect();
        let total = pool.iter().map(|p| p.1).sum();
        Feedback::Winner(draw(&pool, total, rng))
    }

    /// Draws the first `k` entries of a ranking over `S ∪ {0}` without
    /// replacement. With `k = 1` this consumes the generator exactly like
    /// [`sample_winner`](Self::sample_winner).
    pub fn sample_topk<R: Rng + ?Sized>(
        &self,
        s: &Assortment,
        k: usize,
        rng: &mut R,
    ) -> Result<Feedback> {
        if k == 0 || k > s.len() + 1 {
            return Err(Error::Domain(format!(
                "cannot draw top-{k} from a pool of {}",
                s.len() + 1
            )));
        }
        let mut pool: Vec<(usize, f64)> = s.pool().map(|i| (i, self.score(i))).collect();
        let mut ranking = Vec::with_capacity(k);
        for _ in 0..k {
            let total = pool.iter().map(|p| p.1).sum();
            let pick = draw(&pool, total, rng);
            let pos = pool.iter().position(|p| p.0 == pick).unwrap();
            pool.remove(pos);
            ranking.push(pick);
        }
        Ok(Feedback::Ranking(ranking))
    }

    /// Samples whatever this instance's feedback mode produces. Top-k is
    /// truncated to the pool size when the played set is small.
    pub fn sample_feedback<R: Rng + ?Sized>(&self, s: &Assortment, rng: &mut R) -> Feedback {
        match self.feedback {
            FeedbackKind::Winner => self.sample_winner(s, rng),
            FeedbackKind::TopK(k) => self
                .sample_topk(s, k.min(s.len() + 1), rng)
                .expect("k clamped to pool size"),
        }
    }

    /// Exact probability of observing the (partial) ranking `sigma` from `S`.
    pub fn ranking_prob(&self, s: &Assortment, sigma: &[usize]) -> Result<f64> {
        for (a, &i) in sigma.iter().enumerate() {
            if !s.contains_with_no_choice(i) || sigma[..a].contains(&i) {
                return Err(Error::Domain(format!("bad ranking entry {i}")));
            }
        }
        let mut remaining = self.theta0 + self.total_score(s);
        let mut p = 1.0;
        for &i in sigma {
            p *= self.score(i) / remaining;
            remaining -= self.score(i);
        }
        Ok(p)
    }

    /// Expected weighted revenue `Σ_{i∈S} r_i θ_i / (θ_0 + Θ_S)`.
    pub fn expected_revenue(&self, s: &Assortment) -> f64 {
        crate::assort::revenue(&self.theta, &self.weights, self.theta0, s.items())
    }
}

fn draw<R: Rng + ?Sized>(pool: &[(usize, f64)], total: f64, rng: &mut R) -> usize {
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for &(i, w) in pool {
        acc += w;
        if u < acc {
            return i;
        }
    }
    // u can only reach here through rounding at the top end.
    pool.last().unwrap().0
}

fn uniform_instance(theta: Vec<f64>) -> Result<PlInstance> {
    let k = theta.len();
    PlInstance::new(theta, 1.0, alloc::vec![1.0; k], 1, FeedbackKind::Winner)
}

/// Arithmetic scores `theta_i = top - (i - 1) * gap`, with `theta_0 = 1`,
/// unit weights and `m = 1` until overridden.
pub fn make_arith(k: usize, top: f64, gap: f64) -> Result<PlInstance> {
    let theta = (0..k).map(|i| top - i as f64 * gap).collect();
    Ok(uniform_instance(theta)?.with_name(format!("arith{k}")))
}

/// Flat scores `base` except one `spike` at the 1-based `spike_index`.
pub fn make_bad(k: usize, base: f64, spike_index: usize, spike: f64) -> Result<PlInstance> {
    if spike_index == 0 || spike_index > k {
        return Err(Error::InvalidInstance(format!(
            "spike index {spike_index} outside 1..={k}"
        )));
    }
    let mut theta = alloc::vec![base; k];
    theta[spike_index - 1] = spike;
    Ok(uniform_instance(theta)?.with_name(format!("bad{k}")))
}
