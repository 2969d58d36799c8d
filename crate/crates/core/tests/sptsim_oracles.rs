use fpplab_core::combinat::for_each_path;
use fpplab_core::sptsim::{
    all_pairs_hop_stats, dijkstra_spt, dijkstra_truncated, extract_path, rrt_height, simulate_growth,
    simulate_growth_until,
};
use fpplab_core::stats::{ks_one_sample, ks_two_sample, Summary};
use fpplab_core::weights::{derive_trial_seed, EdgeWeights, WeightOracle};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Exact `E[height]` of a random recursive tree on `m` nodes. `y_h`, the
/// exponential generating function of trees of height at most `h`, obeys
/// `y_h' = exp(y_{h-1})` with `y_0 = z`, and `P(H <= h) = m [z^m] y_h`.
fn exact_rrt_mean_height(m: usize) -> f64 {
    let mut c = vec![0.0; m + 1];
    c[1] = 1.0;
    let mut mean = 0.0;
    loop {
        let p = m as f64 * c[m];
        mean += 1.0 - p;
        if p > 1.0 - 1e-15 {
            return mean;
        }
        let mut e = vec![0.0; m];
        e[0] = 1.0;
        for j in 1..m {
            let s: f64 = (1..=j).map(|k| k as f64 * c[k] * e[j - k]).sum();
            e[j] = s / j as f64;
        }
        for j in 1..=m {
            c[j] = e[j - 1] / j as f64;
        }
    }
}

#[test]
fn exact_height_recursion_small_cases() {
    assert!((exact_rrt_mean_height(2) - 1.0).abs() < 1e-12);
    assert!((exact_rrt_mean_height(3) - 1.5).abs() < 1e-12);
    // Six increasing trees on four nodes: heights 1, 2, 2, 2, 2, 3.
    assert!((exact_rrt_mean_height(4) - 2.0).abs() < 1e-12);
}

#[test]
fn rrt_mean_height_matches_exact_law() {
    let m = 1000;
    let exact = exact_rrt_mean_height(m);
    let mut r = rng(17);
    let mut scratch = Vec::new();
    let s: Summary = (0..20_000).map(|_| rrt_height(m, &mut r, &mut scratch) as f64).collect();
    assert!((s.mean - exact).abs() < 4.0 * s.std_err(), "mean {} exact {exact}", s.mean);
    // Still far below e ln m at this size.
    assert!(exact / (m as f64).ln() < 2.1);
}

#[test]
fn first_interarrival_mean() {
    let n = 100;
    let mut r = rng(1);
    let mean = (0..100_000)
        .map(|_| simulate_growth(n, &mut r).interarrival()[0])
        .sum::<f64>()
        / 1e5;
    let expected = 1.0 / (n - 1) as f64;
    assert!((mean / expected - 1.0).abs() < 0.02, "{mean} vs {expected}");
}

#[test]
fn completion_time_mean() {
    let n = 1000;
    let mut r = rng(2);
    let mean = (0..10_000)
        .map(|_| *simulate_growth(n, &mut r).arrival_times().last().unwrap())
        .sum::<f64>()
        / 1e4;
    let expected: f64 = (1..n).map(|k| 1.0 / (k as f64 * (n - k) as f64)).sum();
    assert!((mean / expected - 1.0).abs() < 0.05);
}

#[test]
fn interarrival_laws() {
    let n = 100;
    let mut r = rng(3);
    let traces: Vec<_> = (0..10_000).map(|_| simulate_growth(n, &mut r)).collect();
    for k in [1, n / 2, n - 1] {
        let rate = (k * (n - k)) as f64;
        let scaled: Vec<f64> = traces.iter().map(|t| t.interarrival()[k - 1] * rate).collect();
        let ks = ks_one_sample(&scaled, |x| 1.0 - (-x.max(0.0)).exp(), 0.001);
        assert!(!ks.rejected, "k = {k}: {ks:?}");
    }
}

#[test]
fn root_degree_follows_stirling_numbers() {
    // Root degree of a recursive tree on k nodes is a sum of independent
    // Bernoulli(1/j), j = 1..k-1, with law |s(k-1, d)| / (k-1)!.
    let k = 6;
    let mut stirling = vec![vec![0u64; k]; k];
    stirling[0][0] = 1;
    for a in 1..k {
        for d in 1..=a {
            stirling[a][d] = stirling[a - 1][d - 1] + (a as u64 - 1) * stirling[a - 1][d];
        }
    }
    let total: u64 = stirling[k - 1].iter().sum();
    assert_eq!(total, 120);
    let samples = 200_000;
    let mut hist = vec![0u64; k];
    let mut r = rng(4);
    for _ in 0..samples {
        let t = simulate_growth(k, &mut r);
        hist[t.attach_to().iter().filter(|&&p| p == 0).count()] += 1;
    }
    for d in 1..k {
        let p = stirling[k - 1][d] as f64 / total as f64;
        let f = hist[d] as f64 / samples as f64;
        let se = (p * (1.0 - p) / samples as f64).sqrt();
        assert!((f - p).abs() < 4.0 * se, "degree {d}: {f} vs {p}");
    }
    assert_eq!(hist[0], 0);
}

#[test]
fn dijkstra_size_and_growth_size_agree_in_law() {
    let n = 200;
    let t = (n as f64).ln() / n as f64;
    let mut from_dijkstra = Vec::new();
    let mut from_growth = Vec::new();
    let mut r = rng(5);
    for i in 0..10_000u64 {
        let oracle = WeightOracle::exponential(derive_trial_seed(99, i));
        from_dijkstra.push(dijkstra_truncated(n, 0, &oracle, t).size() as f64);
        from_growth.push(simulate_growth_until(n, t, &mut r).size_at_time(t) as f64);
    }
    let ks = ks_two_sample(&from_dijkstra, &from_growth, 0.001);
    assert!(!ks.rejected, "{ks:?}");
}

#[test]
fn dijkstra_matches_exhaustive_path_search() {
    for n in 3..=7 {
        for s in 0..20u64 {
            let oracle = WeightOracle::exponential(derive_trial_seed(7, s));
            let tree = dijkstra_spt(n, 0, &oracle);
            let mut best = vec![(f64::INFINITY, 0u32); n];
            best[0] = (0.0, 0);
            for k in 1..n {
                for_each_path(n, k, |p| {
                    if p[0] != 0 {
                        return;
                    }
                    let w: f64 = p.windows(2).map(|e| oracle.weight(e[0], e[1])).sum();
                    let end = p[k];
                    if w < best[end].0 {
                        best[end] = (w, k as u32);
                    }
                });
            }
            for v in 0..n {
                assert!((tree.dist(v) - best[v].0).abs() < 1e-12, "n {n} seed {s} v {v}");
                assert_eq!(tree.depth(v), Some(best[v].1));
            }
        }
    }
}

#[test]
fn arrival_order_sorts_distances() {
    for s in 0..10 {
        let oracle = WeightOracle::exponential(s);
        let tree = dijkstra_spt(300, 5, &oracle);
        let order = tree.arrival_order();
        assert_eq!(order.len(), 300);
        for w in order.windows(2) {
            assert!(tree.dist(w[0] as usize) <= tree.dist(w[1] as usize));
        }
    }
}

#[test]
fn shortest_distances_are_symmetric() {
    let n = 100;
    let oracle = WeightOracle::exponential(8);
    let trees: Vec<_> = (0..n).map(|s| dijkstra_spt(n, s, &oracle)).collect();
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (trees[i].dist(j), trees[j].dist(i));
            assert!((a - b).abs() <= 1e-9 * a.max(b).max(1e-300));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tree_invariants(seed in any::<u64>(), n in 2usize..60, source in 0usize..60) {
        let source = source % n;
        let oracle = WeightOracle::exponential(seed);
        let tree = dijkstra_spt(n, source, &oracle);
        prop_assert_eq!(tree.dist(source), 0.0);
        prop_assert_eq!(tree.depth(source), Some(0));
        for v in 0..n {
            if let Some(p) = tree.parent(v) {
                prop_assert_eq!(tree.dist(v), tree.dist(p) + oracle.weight(p, v));
                prop_assert_eq!(tree.depth(v).unwrap(), tree.depth(p).unwrap() + 1);
            }
            let path = extract_path(&tree, v, &oracle).unwrap();
            prop_assert_eq!(path.edges() as u32, tree.depth(v).unwrap());
            let resummed: f64 = path.edge_weights().iter().sum();
            prop_assert!((resummed - tree.dist(v)).abs() <= 1e-12);
        }
    }

    #[test]
    fn hop_statistics_are_ordered(seed in any::<u64>(), n in 2usize..40) {
        let s = all_pairs_hop_stats(n, &WeightOracle::exponential(seed));
        prop_assert!(s.hops_12 <= s.max_hops_from_1 && s.max_hops_from_1 <= s.max_hops_all_pairs);
        prop_assert!(s.weight_12 <= s.max_weight_from_1 && s.max_weight_from_1 <= s.max_weight_all_pairs);
    }

    #[test]
    fn growth_sizes_are_monotone(seed in any::<u64>(), n in 2usize..200) {
        let trace = simulate_growth(n, &mut rng(seed));
        let last = *trace.arrival_times().last().unwrap();
        let mut prev = 0;
        for i in 0..=50 {
            let size = trace.size_at_time(last * i as f64 / 50.0);
            prop_assert!(size >= prev);
            prev = size;
        }
        prop_assert_eq!(trace.size_at_time(0.0), 1);
        prop_assert_eq!(trace.size_at_time(last), n);
    }
}
