use fpplab_core::experiments::{
    expected_spt_weight, run_single_source, verify_coupling, verify_lightest_given_light, verify_max_hops_tail,
    verify_spt_tail, verify_uniform_order_stats,
};
use fpplab_core::theory::zeta2;

#[test]
fn planted_single_edges_are_usually_shortest() {
    // eps = 0.6 exceeds 2 ln ln n / ln n at n = 1000, so the bound is informative.
    let row = verify_lightest_given_light(1000, 1, 0.6, 2000, 6, 1).unwrap();
    assert!(!row.vacuous);
    assert!(row.pass, "{row:?}");
    assert!(1.0 - row.empirical_frequency >= 1.0 - row.theoretical_bound);
}

#[test]
fn large_planted_paths_give_vacuous_rows() {
    let row = verify_lightest_given_light(200, 5, 0.3, 50, 6, 1).unwrap();
    assert!(row.vacuous && row.pass);
}

#[test]
fn more_trials_do_not_break_passing_tail_rows() {
    let small = verify_spt_tail(2000, &[0.3, 0.5], &[2.0, 4.0], 5_000, 12, 1).unwrap();
    let large = verify_spt_tail(2000, &[0.3, 0.5], &[2.0, 4.0], 10_000, 12, 1).unwrap();
    assert!(small.iter().all(|r| r.pass));
    assert!(large.iter().all(|r| r.pass));
    for r in &small {
        assert!(r.m.unwrap() as f64 >= r.t.unwrap().exp());
    }
}

#[test]
fn max_hops_tail_decreases_in_t() {
    let rows = verify_max_hops_tail(150, &[0.0, 2.0, 4.0], 40, 3, 1).unwrap();
    for w in rows.windows(2) {
        assert!(w[0].empirical_frequency >= w[1].empirical_frequency);
    }
    assert!(rows.iter().all(|r| r.vacuous && r.pass));
}

#[test]
fn coupling_discrepancy_within_bound() {
    let rep = verify_coupling(300, 20, 50, 1, 1).unwrap();
    assert_eq!(rep.paths_checked, 1000);
    assert!(rep.pass, "{rep:?}");
}

#[test]
fn first_spacing_has_mean_one_over_n() {
    let rep = verify_uniform_order_stats(100, 1000, 3, 1, 0.001).unwrap();
    assert!((rep.mean_first - 0.01).abs() <= 3.0 * rep.mean_first_std_err);
    assert!(!rep.pooled.rejected && !rep.first.rejected);
    assert_eq!(rep.pooled.effective_n, 99_000.0);
}

#[test]
fn tree_weight_near_finite_n_expectation() {
    let exp = run_single_source(1000, 200, 4, 1).unwrap();
    let s = exp
        .aggregates
        .iter()
        .find(|a| a.statistic == "spt1_total_weight_over_n")
        .unwrap();
    let expected = expected_spt_weight(1000);
    let se = s.std_dev / (s.trials as f64).sqrt();
    assert!((s.mean - expected).abs() <= 4.0 * se, "{} vs {expected}", s.mean);
    assert!((expected - zeta2()).abs() < 0.02);
}
