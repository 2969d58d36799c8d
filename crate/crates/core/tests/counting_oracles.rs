use std::collections::BTreeMap;

use fpplab_core::combinat::{delta_exact_small, for_each_path, intersection_profile, path_count};
use fpplab_core::experiments::{count_light_paths_mc, exponential_sum_tail_mc, joint_weight_mc};
use fpplab_core::theory::{
    expected_light_paths_exact, joint_weight_bound, joint_weight_exact, large_dev_rate, poisson_gamma_identity,
    second_moment_defect,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

#[test]
fn joint_weight_matches_direct_sampling() {
    let mc = joint_weight_mc(4, 2, 1.0, 1_000_000, 2024).unwrap();
    let exact = joint_weight_exact(4, 2, 1.0).unwrap();
    assert!((mc.estimate - exact).abs() <= 3.0 * mc.std_err, "{mc:?} vs {exact}");
}

/// `P(w(P) <= s, w(Q) <= s)` with an independent exponential on every edge
/// of `P ∪ Q`.
fn both_light_frequency(p: &[usize], q: &[usize], s: f64, draws: usize, seed: u64) -> (f64, f64) {
    let mut edges: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut index = |a: usize, b: usize| {
        let key = (a.min(b), a.max(b));
        let next = edges.len();
        *edges.entry(key).or_insert(next)
    };
    let pe: Vec<usize> = p.windows(2).map(|e| index(e[0], e[1])).collect();
    let qe: Vec<usize> = q.windows(2).map(|e| index(e[0], e[1])).collect();
    let m = edges.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = vec![0.0; m];
    let mut hits = 0usize;
    for _ in 0..draws {
        for x in w.iter_mut() {
            *x = rng.sample(Exp1);
        }
        if pe.iter().map(|&e| w[e]).sum::<f64>() <= s && qe.iter().map(|&e| w[e]).sum::<f64>() <= s {
            hits += 1;
        }
    }
    let f = hits as f64 / draws as f64;
    (f, (f * (1.0 - f) / draws as f64).sqrt())
}

#[test]
fn joint_probability_ignores_component_structure() {
    let s = 2.0;
    let exact = joint_weight_exact(3, 2, s).unwrap();
    let p = [0, 1, 2, 3];
    for (q, j) in [(vec![0, 1, 2, 4], 1), (vec![1, 0, 3, 2], 2)] {
        let profile = intersection_profile(&p, &q);
        assert_eq!((profile.shared_edges, profile.components), (2, j));
        let (f, se) = both_light_frequency(&p, &q, s, 400_000, 31 + j as u64);
        assert!((f - exact).abs() <= 4.0 * se, "j = {j}: {f} vs {exact}");
    }
}

#[test]
fn delta_total_matches_monte_carlo_pair_count() {
    let (n, k, eps) = (20, 3, 0.1);
    let table = delta_exact_small(n, k, eps).unwrap();
    let mc = count_light_paths_mc(n, k, eps, 100_000, 77, 1).unwrap();
    let diff = (mc.mean_intersecting_pairs - table.total()).abs();
    assert!(
        diff <= 3.0 * mc.intersecting_pairs_std_err,
        "MC {} ± {} vs exact {}",
        mc.mean_intersecting_pairs,
        mc.intersecting_pairs_std_err,
        table.total()
    );
}

#[test]
fn second_moment_bound_covers_empty_probability() {
    let (n, k, eps) = (30, 3, 0.1);
    let delta = delta_exact_small(n, k, eps).unwrap().total();
    let expectation = expected_light_paths_exact(n, k, eps).unwrap().exact;
    let bound = second_moment_defect(delta, expectation).unwrap();
    let mc = count_light_paths_mc(n, k, eps, 10_000, 5, 1).unwrap();
    let se = (mc.fraction_empty * (1.0 - mc.fraction_empty) / 1e4).sqrt();
    assert!(bound >= mc.fraction_empty - 3.0 * se, "{bound} vs {}", mc.fraction_empty);
}

#[test]
fn single_edges_are_a_bernoulli_sum() {
    let (n, eps) = (20, 0.2);
    let s = (1.0 - eps) * (n as f64).ln() / n as f64;
    let closed = (n * (n - 1) / 2) as f64 * (1.0 - (-s).exp());
    let e = expected_light_paths_exact(n, 1, eps).unwrap();
    assert!((e.exact - closed).abs() < 1e-9 * closed);
    let mc = count_light_paths_mc(n, 1, eps, 20_000, 3, 1).unwrap();
    assert!((mc.mean_count - closed).abs() <= 3.0 * mc.std_err);
}

#[test]
fn nearly_unit_eps_leaves_no_light_paths() {
    let e = expected_light_paths_exact(30, 3, 0.999).unwrap();
    assert!(e.exact < 1e-6);
    let mc = count_light_paths_mc(30, 3, 0.999, 2000, 4, 1).unwrap();
    assert_eq!(mc.mean_count, 0.0);
}

#[test]
fn exponential_sum_tail_below_large_deviation_bound() {
    let x = 2.0; // sqrt(c) with c = 4
    let bound = (-20.0 * large_dev_rate(x).unwrap()).exp();
    let mc = exponential_sum_tail_mc(20, x, 1_000_000, 9);
    assert!(mc.estimate <= bound, "{mc:?} vs {bound}");
}

fn random_path(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    for i in 0..=k {
        let j = rng.random_range(i..n);
        v.swap(i, j);
    }
    v.truncate(k + 1);
    v
}

#[test]
fn path_counts_match_enumeration() {
    for n in 2..=7 {
        for k in 1..n {
            let mut count = 0u128;
            for_each_path(n, k, |_| count += 1);
            assert_eq!(count, path_count(n, k));
        }
    }
}

proptest! {
    #[test]
    fn joint_weight_below_its_bound(k in 2u32..=12, i_frac in 0.0f64..1.0, s in 0.001f64..3.0) {
        let i = 1 + ((k - 1) as f64 * i_frac) as u32 % (k - 1);
        let exact = joint_weight_exact(k, i, s).unwrap();
        prop_assert!(exact <= joint_weight_bound(k, i, s).unwrap() * (1.0 + 1e-9));
        prop_assert!(exact >= 0.0);
    }

    #[test]
    fn poisson_and_gamma_sides_agree(w in 0.05f64..12.0, k in 1u32..=50) {
        let (a, b) = poisson_gamma_identity(w, k).unwrap();
        prop_assert!((a - b).abs() <= 1e-10);
    }

    #[test]
    fn profiles_are_symmetric_and_orientation_free(seed in any::<u64>(), n in 4usize..9, k in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = k.min(n - 1);
        let p = random_path(n, k, &mut rng);
        let q = random_path(n, k, &mut rng);
        let a = intersection_profile(&p, &q);
        prop_assert_eq!(a, intersection_profile(&q, &p));
        let rp: Vec<usize> = p.iter().rev().copied().collect();
        prop_assert_eq!(a, intersection_profile(&rp, &q));
        prop_assert!(a.shared_edges as usize <= k);
        prop_assert!(a.components <= a.shared_edges);
    }
}
