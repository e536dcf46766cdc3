use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::Rng;
use rankbreak_core::model::{make_arith, make_bad};
use rankbreak_core::{rng_for, Assortment, Feedback, FeedbackKind, PlInstance};

fn instance(theta: Vec<f64>, theta0: f64) -> PlInstance {
    let k = theta.len();
    PlInstance::new(theta, theta0, vec![1.0; k], k, FeedbackKind::Winner).unwrap()
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for a in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(a);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

#[test]
fn winner_frequencies_match_choice_probabilities() {
    let mut rng = rng_for(11, 7);
    for case in 0..20 {
        let k = rng.random_range(2..=8);
        let theta: Vec<f64> = (0..k).map(|_| 10f64.powf(rng.random_range(-1.0..1.0))).collect();
        let inst = instance(theta, 10f64.powf(rng.random_range(-1.0..1.0)));
        let len = rng.random_range(1..=k);
        let items = rand::seq::index::sample(&mut rng, k, len).into_iter().map(|i| i + 1).collect();
        let s = Assortment::new(items, k, k).unwrap();

        let n = 300_000;
        let mut counts = vec![0usize; k + 1];
        for _ in 0..n {
            counts[inst.sample_winner(&s, &mut rng).winner().unwrap()] += 1;
        }
        for i in s.pool() {
            let freq = counts[i] as f64 / n as f64;
            let p = inst.choice_prob(&s, i).unwrap();
            assert!((freq - p).abs() <= 0.01, "case {case}, item {i}: {freq} vs {p}");
        }
        for i in (1..=k).filter(|i| !s.contains(*i)) {
            assert_eq!(counts[i], 0);
        }
    }
}

#[test]
fn topk_joint_law_matches_closed_form() {
    let inst = instance(vec![2.0, 1.0, 0.5, 3.0], 0.7);
    let mut rng = rng_for(5, 9);
    for items in [vec![1], vec![2, 3], vec![1, 2, 4]] {
        let s = Assortment::new(items, 4, 4).unwrap();
        let pool: Vec<usize> = s.pool().collect();
        for k in 1..=pool.len() {
            let n = 300_000;
            let mut counts = std::collections::HashMap::<Vec<usize>, usize>::new();
            for _ in 0..n {
                let Feedback::Ranking(r) = inst.sample_topk(&s, k, &mut rng).unwrap() else {
                    panic!("expected a ranking")
                };
                *counts.entry(r).or_default() += 1;
            }
            let mut total = 0.0;
            for perm in permutations(&pool) {
                let prefix = &perm[..k];
                if perm[k..].windows(2).any(|w| w[0] > w[1]) {
                    continue;
                }
                let p = inst.ranking_prob(&s, prefix).unwrap();
                total += p;
                let freq = *counts.get(prefix).unwrap_or(&0) as f64 / n as f64;
                assert!((freq - p).abs() <= 0.01, "{prefix:?}: {freq} vs {p}");
            }
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
        }
    }
}

#[test]
fn full_rankings_sum_to_one() {
    let inst = instance(vec![0.3, 4.0, 1.5], 0.05);
    for items in [vec![1], vec![1, 3], vec![1, 2, 3]] {
        let s = Assortment::new(items, 3, 3).unwrap();
        let pool: Vec<usize> = s.pool().collect();
        let total: f64 = permutations(&pool).iter().map(|p| inst.ranking_prob(&s, p).unwrap()).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
    }
}

#[test]
fn first_ranking_entry_matches_winner_law() {
    let inst = instance(vec![1.0, 0.6, 0.2], 0.4);
    let s = Assortment::new(vec![1, 2, 3], 3, 3).unwrap();
    let mut rng = rng_for(21, 0);
    let n = 300_000;
    let mut counts = [0usize; 4];
    for _ in 0..n {
        let Feedback::Ranking(r) = inst.sample_topk(&s, 3, &mut rng).unwrap() else {
            unreachable!()
        };
        counts[r[0]] += 1;
    }
    // Chi-square with 3 degrees of freedom; 16.27 is the 0.999 quantile.
    let chi2: f64 = s
        .pool()
        .map(|i| {
            let expected = n as f64 * inst.choice_prob(&s, i).unwrap();
            (counts[i] as f64 - expected).powi(2) / expected
        })
        .sum();
    assert!(chi2 < 16.27, "chi2 = {chi2}");
}

#[test]
fn top1_consumes_randomness_like_winner_sampling() {
    let inst = make_arith(6, 1.0, 0.1).unwrap().with_m(3).unwrap();
    let s = Assortment::new(vec![2, 4, 5], 6, 3).unwrap();
    let mut a = rng_for(3, 0);
    let mut b = rng_for(3, 0);
    for _ in 0..1000 {
        let w = inst.sample_winner(&s, &mut a).winner();
        let r = inst.sample_topk(&s, 1, &mut b).unwrap();
        assert_eq!(w, r.winner());
    }
}

#[test]
fn generators_follow_their_formulas() {
    let bad = make_bad(50, 0.6, 25, 0.8).unwrap();
    assert_eq!(bad.theta()[24], 0.8);
    assert!(bad.theta().iter().enumerate().all(|(i, &t)| i == 24 || t == 0.6));

    let arith = make_arith(50, 1.0, 0.02).unwrap();
    assert_eq!(arith.theta()[0], 1.0);
    assert_abs_diff_eq!(arith.theta()[49], 0.02, epsilon = 1e-12);

    assert!(make_arith(3, 1.0, 0.5).is_err());
    assert!(make_arith(50, 1.0, 0.2).is_err());
}

fn scores(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-3f64..1e3, 1..=max_len)
}

proptest! {
    #[test]
    fn probabilities_sum_to_one(theta in scores(10), theta0 in 1e-3f64..1e3, mask in any::<u16>()) {
        let k = theta.len();
        let inst = instance(theta, theta0);
        let mut items: Vec<usize> = (1..=k).filter(|i| mask >> (i - 1) & 1 == 1).collect();
        if items.is_empty() {
            items.push(1);
        }
        let s = Assortment::new(items, k, k).unwrap();
        let total: f64 = s.pool().map(|i| inst.choice_prob(&s, i).unwrap()).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn joint_scaling_leaves_probabilities_unchanged(
        theta in scores(8),
        theta0 in 1e-3f64..1e3,
        c in 1e-3f64..1e3,
        weights_seed in any::<u64>(),
    ) {
        let k = theta.len();
        let mut rng = rng_for(weights_seed, 0);
        let weights: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
        let a = instance(theta.clone(), theta0).with_weights(weights.clone()).unwrap();
        let b = instance(theta.iter().map(|t| t * c).collect(), theta0 * c).with_weights(weights).unwrap();
        let s = Assortment::new((1..=k).collect(), k, k).unwrap();
        for i in s.pool() {
            let (pa, pb) = (a.choice_prob(&s, i).unwrap(), b.choice_prob(&s, i).unwrap());
            prop_assert!((pa - pb).abs() <= 1e-12 * pa.max(1.0));
        }
        let (ra, rb) = (a.expected_revenue(&s), b.expected_revenue(&s));
        prop_assert!((ra - rb).abs() <= 1e-12 * ra.max(1.0));
    }

    #[test]
    fn sampled_feedback_stays_in_pool(theta in scores(8), seed in any::<u64>(), k_rank in 1usize..5) {
        let k = theta.len();
        let inst = instance(theta, 1.0).with_feedback(FeedbackKind::TopK(k_rank.min(k + 1))).unwrap();
        let mut rng = rng_for(seed, 0);
        let len = rng.random_range(1..=k);
        let items = rand::seq::index::sample(&mut rng, k, len).into_iter().map(|i| i + 1).collect();
        let s = Assortment::new(items, k, k).unwrap();
        let Feedback::Ranking(r) = inst.sample_feedback(&s, &mut rng) else { panic!() };
        prop_assert_eq!(r.len(), k_rank.min(k + 1).min(s.len() + 1));
        let mut seen = std::collections::HashSet::new();
        for i in r {
            prop_assert!(s.contains_with_no_choice(i));
            prop_assert!(seen.insert(i));
        }
    }
}
