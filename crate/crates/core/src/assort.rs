//! Static assortment optimization for a known score vector.
//!
//! Scores are indexed from zero (`scores[i - 1]` belongs to item `i`); the
//! returned [`Assortment`]s use 1-based item indices. Ties always resolve
//! toward smaller item indices.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::Assortment;

/// Largest item count [`brute_force_assortment`] accepts.
pub const BRUTE_FORCE_LIMIT: usize = 20;

/// `Σ_{i∈S} r_i s_i / (θ_0 + Σ_{j∈S} s_j)` for 1-based `items`.
pub fn revenue(scores: &[f64], weights: &[f64], theta0: f64, items: &[usize]) -> f64 {
    let mut num = 0.0;
    let mut den = theta0;
    for &i in items {
        num += weights[i - 1] * scores[i - 1];
        den += scores[i - 1];
    }
    num / den
}

/// Indices (0-based) sorted by descending value, ties by ascending index.
fn argsort_desc(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx
}

/// The `m` items with the largest scores.
pub fn top_m_select(scores: &[f64], m: usize) -> Assortment {
    assert!(m >= 1 && m <= scores.len(), "top-m needs 1 <= m <= K");
    let mut items: Vec<usize> = argsort_desc(scores)[..m].iter().map(|&i| i + 1).collect();
    items.sort_unstable();
    Assortment::from_sorted(items)
}

/// Bisection on the revenue level `λ`.
///
/// For a fixed `λ`, `F(λ) = max_{|S|≤m} Σ_{i∈S} s_i (r_i − λ)` is attained by the
/// up-to-`m` largest positive terms, and `R(S) ≥ λ` holds exactly when
/// `Σ_{i∈S} s_i (r_i − λ) ≥ λ θ_0`. The optimal revenue is the root of
/// `F(λ) − λ θ_0`, which is strictly decreasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParametricSolver {
    /// Bisection stops once the bracket on `λ` is at most this wide.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for ParametricSolver {
    fn default() -> Self {
        ParametricSolver {
            tolerance: 1e-10,
            max_iterations: 200,
        }
    }
}

impl ParametricSolver {
    pub fn with_tolerance(tolerance: f64) -> Self {
        ParametricSolver {
            tolerance,
            ..Default::default()
        }
    }

    /// Maximizer of `F(λ)` (possibly empty) and its value.
    fn best_at(&self, scores: &[f64], weights: &[f64], m: usize, lambda: f64, buf: &mut Vec<(f64, usize)>) -> (Vec<usize>, f64) {
        buf.clear();
        buf.extend(
            scores
                .iter()
                .zip(weights)
                .enumerate()
                .map(|(i, (&s, &r))| (s * (r - lambda), i))
                .filter(|(v, _)| *v > 0.0),
        );
        buf.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        buf.truncate(m);
        let value = buf.iter().map(|p| p.0).sum();
        let mut items: Vec<usize> = buf.iter().map(|p| p.1 + 1).collect();
        items.sort_unstable();
        (items, value)
    }

    pub fn solve(&self, scores: &[f64], weights: &[f64], m: usize, theta0: f64) -> Assortment {
        let k = scores.len();
        assert!(k >= 1 && weights.len() == k && m >= 1, "malformed optimizer input");
        let m = m.min(k);
        let mut buf = Vec::with_capacity(k);

        let (at_zero, f0) = self.best_at(scores, weights, m, 0.0, &mut buf);
        if at_zero.is_empty() || f0 <= 0.0 {
            return degenerate_singleton(scores, weights);
        }

        let mut lo = 0.0;
        let mut lo_set = at_zero;
        let mut hi = weights.iter().copied().fold(0.0, f64::max);
        let mut hi_set = Vec::new();
        for _ in 0..self.max_iterations {
            if hi - lo <= self.tolerance {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let (set, f) = self.best_at(scores, weights, m, mid, &mut buf);
            if !set.is_empty() && f >= mid * theta0 {
                lo = mid;
                lo_set = set;
            } else {
                hi = mid;
                hi_set = set;
            }
        }

        // The lower bracket's set earns at least `lo`; the upper one may still
        // be better after rounding, so keep whichever scores higher.
        if !hi_set.is_empty()
            && revenue(scores, weights, theta0, &hi_set) > revenue(scores, weights, theta0, &lo_set)
        {
            lo_set = hi_set;
        }
        Assortment::from_sorted(lo_set)
    }
}

fn degenerate_singleton(scores: &[f64], weights: &[f64]) -> Assortment {
    let products: Vec<f64> = scores.iter().zip(weights).map(|(s, r)| s * r).collect();
    Assortment::from_sorted(alloc::vec![argsort_desc(&products)[0] + 1])
}

/// Revenue-maximizing assortment of at most `m` items, via [`ParametricSolver`]
/// with its default tolerance.
pub fn max_weighted_assortment(scores: &[f64], weights: &[f64], m: usize, theta0: f64) -> Assortment {
    ParametricSolver::default().solve(scores, weights, m, theta0)
}

/// Exhaustive maximum of the revenue over every nonempty subset of size at
/// most `m`. The first maximizer in lexicographic order of sorted index lists
/// wins ties.
pub fn brute_force_assortment(
    scores: &[f64],
    weights: &[f64],
    m: usize,
    theta0: f64,
) -> Result<(Assortment, f64)> {
    let k = scores.len();
    if k > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            k,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    if k == 0 || m == 0 || weights.len() != k {
        return Err(Error::Domain("empty or mismatched optimizer input".into()));
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut stack = Vec::with_capacity(m);
    visit(scores, weights, theta0, m.min(k), 1, &mut stack, &mut best);
    let (items, value) = best.expect("at least one subset");
    Ok((Assortment::from_sorted(items), value))
}

// Depth-first preorder emits subsets in lexicographic order.
fn visit(
    scores: &[f64],
    weights: &[f64],
    theta0: f64,
    m: usize,
    next: usize,
    stack: &mut Vec<usize>,
    best: &mut Option<(Vec<usize>, f64)>,
) {
    for i in next..=scores.len() {
        stack.push(i);
        let value = revenue(scores, weights, theta0, stack);
        if best.as_ref().map_or(true, |b| value > b.1) {
            *best = Some((stack.clone(), value));
        }
        if stack.len() < m {
            visit(scores, weights, theta0, m, i + 1, stack, best);
        }
        stack.pop();
    }
}
