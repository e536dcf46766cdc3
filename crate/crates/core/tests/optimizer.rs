use proptest::prelude::*;
use rand::Rng;
use rankbreak_core::assort::revenue;
use rankbreak_core::{brute_force_assortment, max_weighted_assortment, rng_for, top_m_select, ParametricSolver};

fn log_uniform(rng: &mut impl Rng) -> f64 {
    10f64.powf(rng.random_range(-3.0..3.0))
}

struct Case {
    scores: Vec<f64>,
    weights: Vec<f64>,
    m: usize,
    theta0: f64,
}

fn random_case(rng: &mut impl Rng, k_max: usize) -> Case {
    let k = rng.random_range(1..=k_max);
    Case {
        scores: (0..k).map(|_| log_uniform(rng)).collect(),
        weights: (0..k).map(|_| rng.random::<f64>()).collect(),
        m: rng.random_range(1..=k),
        theta0: log_uniform(rng),
    }
}

#[test]
fn parametric_matches_exhaustive_search() {
    let mut rng = rng_for(2024, 0);
    for n in 0..1000 {
        let c = random_case(&mut rng, 12);
        let s = max_weighted_assortment(&c.scores, &c.weights, c.m, c.theta0);
        assert!(s.len() <= c.m && !s.is_empty());
        let (_, best) = brute_force_assortment(&c.scores, &c.weights, c.m, c.theta0).unwrap();
        let got = revenue(&c.scores, &c.weights, c.theta0, s.items());
        assert!(best - got <= 1e-9, "case {n}: {got} < {best}");
    }
}

#[test]
fn coarse_bisection_is_caught_by_the_oracle() {
    let solver = ParametricSolver::with_tolerance(1e-1);
    let mut rng = rng_for(2024, 0);
    let misses = (0..1000)
        .filter(|_| {
            let c = random_case(&mut rng, 12);
            let s = solver.solve(&c.scores, &c.weights, c.m, c.theta0);
            let (_, best) = brute_force_assortment(&c.scores, &c.weights, c.m, c.theta0).unwrap();
            best - revenue(&c.scores, &c.weights, c.theta0, s.items()) > 1e-9
        })
        .count();
    assert!(misses > 0);
}

#[test]
fn unit_weights_reduce_to_top_m() {
    let mut rng = rng_for(7, 0);
    for _ in 0..500 {
        let mut c = random_case(&mut rng, 10);
        c.weights = vec![1.0; c.scores.len()];
        let s = max_weighted_assortment(&c.scores, &c.weights, c.m, c.theta0);
        let top = top_m_select(&c.scores, c.m);
        let (_, best) = brute_force_assortment(&c.scores, &c.weights, c.m, c.theta0).unwrap();
        assert!((revenue(&c.scores, &c.weights, c.theta0, top.items()) - best).abs() <= 1e-12);
        assert!(best - revenue(&c.scores, &c.weights, c.theta0, s.items()) <= 1e-9);
    }
}

#[test]
fn capped_score_with_a_competitive_weight_is_selected() {
    let mut rng = rng_for(8, 0);
    for _ in 0..200 {
        let mut c = random_case(&mut rng, 10);
        let k = c.scores.len();
        let capped = rng.random_range(0..k);
        c.scores[capped] = 1e6;
        c.weights[capped] = c.weights.iter().copied().fold(0.0, f64::max).max(0.01);
        let s = max_weighted_assortment(&c.scores, &c.weights, c.m, c.theta0);
        let best_other = c
            .weights
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != capped)
            .any(|(_, &w)| w == c.weights[capped]);
        if !best_other {
            assert!(s.contains(capped + 1), "{:?} misses {}", s.items(), capped + 1);
        }
    }
}

#[test]
fn exhaustive_search_refuses_large_inputs() {
    assert!(brute_force_assortment(&[1.0; 21], &[1.0; 21], 2, 1.0).is_err());
    assert!(brute_force_assortment(&[1.0; 20], &[1.0; 20], 1, 1.0).is_ok());
}

proptest! {
    #[test]
    fn top_m_ignores_monotone_transforms(
        scores in prop::collection::vec(-50.0f64..50.0, 1..15),
        m_frac in 0.0f64..1.0,
    ) {
        let m = 1 + (m_frac * scores.len() as f64) as usize % scores.len();
        let transformed: Vec<f64> = scores.iter().map(|s| (s / 10.0).exp() * 3.0 + 1.0).collect();
        prop_assert_eq!(top_m_select(&scores, m), top_m_select(&transformed, m));
    }

    #[test]
    fn optimizer_ignores_joint_rescaling(seed in any::<u64>(), exp in -10i32..10, c in 1e-3f64..1e3) {
        let mut rng = rng_for(seed, 0);
        let case = random_case(&mut rng, 12);
        let base = max_weighted_assortment(&case.scores, &case.weights, case.m, case.theta0);
        let best = revenue(&case.scores, &case.weights, case.theta0, base.items());

        // Powers of two rescale without rounding, so the set itself is unchanged.
        let p = 2f64.powi(exp);
        let scaled: Vec<f64> = case.scores.iter().map(|s| s * p).collect();
        prop_assert_eq!(&base, &max_weighted_assortment(&scaled, &case.weights, case.m, case.theta0 * p));

        let scaled: Vec<f64> = case.scores.iter().map(|s| s * c).collect();
        let other = max_weighted_assortment(&scaled, &case.weights, case.m, case.theta0 * c);
        let value = revenue(&case.scores, &case.weights, case.theta0, other.items());
        prop_assert!((best - value).abs() <= 1e-9);
    }

    #[test]
    fn optimizer_is_never_beaten(seed in any::<u64>()) {
        let mut rng = rng_for(seed, 1);
        let c = random_case(&mut rng, 9);
        let s = max_weighted_assortment(&c.scores, &c.weights, c.m, c.theta0);
        let (b, best) = brute_force_assortment(&c.scores, &c.weights, c.m, c.theta0).unwrap();
        prop_assert!(best - revenue(&c.scores, &c.weights, c.theta0, s.items()) <= 1e-9);
        prop_assert!(b.len() <= c.m);
    }
}
