//! One function per subcommand. Each prints a human summary, writes the
//! requested files and reports whether its checks passed.

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use fpplab_core::combinat::{count_pairs, count_pairs_by_symmetry, counting_formula_upper, PairCountTable, MAX_ENUMERATION_N};
use fpplab_core::experiments::{self as ex, BoundCheckRow, StatAggregate};
use fpplab_core::predicates::{calibrate_c, verify_key_lemma};
use fpplab_core::theory::{alpha_star, pair_count_bound, EpsilonFamily, TheoryTable};

use crate::config::{resolve, Resolved};
use crate::output::{to_value, write_csv, write_json, write_summary};
use crate::{Failure, Flags, Kind};

pub fn run(kind: Kind, flags: &Flags) -> Result<bool, Failure> {
    let r = resolve(kind, flags)?;
    let mut shown = r.echo.clone();
    shown.workers = Some(r.workers);
    shown.out = r.out.clone();
    println!("config: {}", serde_json::to_string(&shown).unwrap_or_default());
    match kind {
        Kind::Constants => constants(&r),
        Kind::Simulate => simulate(&r),
        Kind::Hops => hops(&r),
        Kind::VerifySptTail => {
            let rows = ex::verify_spt_tail(r.n, &[0.3, 0.5, 0.7], &[2.0, 4.0, 8.0], r.trials, r.seed, r.workers)?;
            bound_rows(&r, &rows)
        }
        Kind::VerifyRrtHeight => {
            let suite = ex::verify_rrt_height(
                r.n,
                &[2.5, 3.0, 3.5, std::f64::consts::E],
                r.trials,
                r.seed,
                r.workers,
            )?;
            println!(
                "mean height / ln m = {:.4} (s.e. {:.4}; limit e = {:.4})",
                suite.mean_height_over_log_m,
                suite.std_err_over_log_m,
                std::f64::consts::E
            );
            let pass = print_rows(&suite.rows);
            finish(&r, &suite.rows, to_value(&suite), pass)
        }
        Kind::VerifyMaxTail => {
            let rows = ex::verify_max_hops_tail(r.n, &[0.0, 2.0, 4.0], r.trials, r.seed, r.workers)?;
            bound_rows(&r, &rows)
        }
        Kind::CountPairs => count(&r),
        Kind::LightPaths => light_paths(&r),
        Kind::LightestGivenLight => {
            let row = ex::verify_lightest_given_light(r.n, r.k, r.eps, r.trials, r.seed, r.workers)?;
            bound_rows(&r, &[row])
        }
        Kind::Predicates => predicates(&r),
        Kind::KeyLemma => key_lemma(&r),
        Kind::Coupling => coupling(&r),
        Kind::OrderStats => order_stats(&r),
        Kind::EstimateAlpha => estimate_alpha(&r),
    }
}

fn finish<T: Serialize>(r: &Resolved, rows: &[T], results: Value, pass: bool) -> Result<bool, Failure> {
    if let Some(out) = &r.out {
        write_csv(Path::new(out), rows)?;
        write_summary(out, &r.echo, r.seed, results, pass)?;
    }
    Ok(pass)
}

fn print_aggregates(aggregates: &[StatAggregate]) {
    for a in aggregates {
        println!(
            "n={:<6} {:<30} {:>9.4}  95% CI [{:.4}, {:.4}]  reference {:.4}",
            a.n, a.statistic, a.mean, a.ci_low, a.ci_high, a.reference
        );
    }
}

fn print_rows(rows: &[BoundCheckRow]) -> bool {
    for row in rows {
        let params = [
            row.n.map(|v| format!("n={v}")),
            row.m.map(|v| format!("m={v}")),
            row.k.map(|v| format!("k={v}")),
            row.t.map(|v| format!("t={v:.3}")),
            row.x.map(|v| format!("x={v:.3}")),
            row.eps.map(|v| format!("eps={v}")),
        ]
        .into_iter()
        .flatten()
        .collect::<Vec<_>>()
        .join(" ");
        println!(
            "{:<32} freq {:.6}  wilson95 {:.6}  bound {:.6}{}  {}",
            params,
            row.empirical_frequency,
            row.wilson_upper_95,
            row.theoretical_bound,
            if row.vacuous { " (vacuous)" } else { "" },
            if row.pass { "PASS" } else { "FAIL" }
        );
    }
    ex::all_pass(rows)
}

fn bound_rows(r: &Resolved, rows: &[BoundCheckRow]) -> Result<bool, Failure> {
    let pass = print_rows(rows);
    finish(r, rows, to_value(&rows), pass)
}

fn constants(r: &Resolved) -> Result<bool, Failure> {
    let table = TheoryTable::compute();
    let family = EpsilonFamily::new(r.eps)?;
    let value = json!({
        "theory": table,
        "epsilon_family": family,
        "n": r.n,
        "k_eps": family.k_eps(r.n as f64),
    });
    println!("{}", serde_json::to_string_pretty(&value).unwrap_or_default());
    if let Some(out) = &r.out {
        write_json(Path::new(out), &value)?;
    }
    Ok(true)
}

fn simulate(r: &Resolved) -> Result<bool, Failure> {
    let exp = ex::run_single_source(r.n, r.trials, r.seed, r.workers)?;
    print_aggregates(&exp.aggregates);
    println!("finite-n expected tree weight / n = {:.4}", exp.expected_tree_weight);
    let results = json!({
        "aggregates": exp.aggregates,
        "expected_tree_weight": exp.expected_tree_weight,
    });
    finish(r, &exp.trials, results, true)
}

fn hops(r: &Resolved) -> Result<bool, Failure> {
    for &n in &r.n_grid {
        if n > ex::MAX_ALL_PAIRS_N {
            continue;
        }
        println!(
            "n={n}: estimated runtime {:.1} s on one core",
            ex::all_pairs_runtime_model(n, r.trials)
        );
    }
    let exp = ex::run_hop_experiment(&r.n_grid, r.trials, r.seed, r.workers)?;
    print_aggregates(&exp.aggregates);
    finish(r, &exp.trials, json!({ "aggregates": exp.aggregates }), true)
}

#[derive(Serialize)]
struct PairRow {
    n: usize,
    k: usize,
    i: u32,
    j: u32,
    count: u128,
    formula_bound: f64,
    lemma_bound: f64,
}

/// Exhaustive pair counts with the vanishing rule and both upper bounds.
fn count(r: &Resolved) -> Result<bool, Failure> {
    let table: PairCountTable = if r.n <= MAX_ENUMERATION_N {
        count_pairs(r.n, r.k)?
    } else {
        count_pairs_by_symmetry(r.n, r.k)?
    };
    let mut rows = Vec::new();
    let (mut vanishing_bad, mut formula_bad, mut lemma_bad) = (0, 0, 0);
    for (&(i, j), &count) in &table.counts {
        let formula_bound = counting_formula_upper(r.n, r.k, i as usize, j as usize);
        let lemma_bound = pair_count_bound(r.n as u64, r.k as u32, i, j)?;
        let c = count as f64;
        if count > 0 && (r.k as i64) < i as i64 + 2 * j as i64 - 2 {
            vanishing_bad += 1;
        }
        if c > formula_bound {
            formula_bad += 1;
        }
        if c > lemma_bound * (1.0 + 1e-12) {
            lemma_bad += 1;
        }
        println!(
            "i={i} j={j} count={count} formula={formula_bound:.4e} lemma={lemma_bound:.4e}"
        );
        rows.push(PairRow {
            n: r.n,
            k: r.k,
            i,
            j,
            count,
            formula_bound,
            lemma_bound,
        });
    }
    println!(
        "entries {}: vanishing-rule violations {vanishing_bad}, formula-bound violations {formula_bad}, lemma-bound violations {lemma_bad}",
        rows.len()
    );
    let pass = vanishing_bad == 0 && formula_bad == 0 && lemma_bad == 0;
    let results = json!({
        "entries": rows.len(),
        "total_ordered_pairs": table.total_ordered.to_string(),
        "vertex_disjoint": table.vertex_disjoint.to_string(),
        "vertex_only": table.vertex_only.to_string(),
        "vanishing_rule_violations": vanishing_bad,
        "formula_bound_violations": formula_bad,
        "lemma_bound_violations": lemma_bad,
    });
    finish(r, &rows, results, pass)
}

fn light_paths(r: &Resolved) -> Result<bool, Failure> {
    let res = ex::count_light_paths_mc(r.n, r.k, r.eps, r.trials, r.seed, r.workers)?;
    println!(
        "mean light paths {:.4} (s.e. {:.4})  exact expectation {:.4}  asymptotic {:.4}  z = {:.3}",
        res.mean_count, res.std_err, res.exact_expectation, res.asymptotic_expectation, res.z_score
    );
    let pass = res.z_score.abs() <= 3.0;
    finish(r, &[&res], to_value(&res), pass)
}

fn predicates(r: &Resolved) -> Result<bool, Failure> {
    let pilot = ex::predicate_pilot(r.n, r.k, r.eps, r.c, r.bonsai_eps_variant, r.trials, r.seed, r.workers)?;
    let calibration = calibrate_c(r.delta, r.k, r.trials.max(1000), r.seed)?;
    println!(
        "planted light paths: legal {:.4}  bonsai {:.4}  both {:.4}",
        pilot.fraction_legal, pilot.fraction_bonsai, pilot.fraction_both
    );
    println!(
        "calibrated C = {:.4} for delta = {} (legal fraction {:.4}, 95% CI [{:.4}, {:.4}])",
        calibration.c, calibration.delta, calibration.fraction_legal, calibration.wilson_low, calibration.wilson_high
    );
    let results = json!({
        "fraction_legal": pilot.fraction_legal,
        "fraction_bonsai": pilot.fraction_bonsai,
        "fraction_both": pilot.fraction_both,
        "calibration": calibration,
    });
    finish(r, &pilot.rows, results, true)
}

#[derive(Serialize)]
struct CounterexampleRow {
    trial: usize,
    seed: u64,
    path: String,
    path_weight: f64,
    witness: String,
    witness_weight: f64,
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("-")
}

fn key_lemma(r: &Resolved) -> Result<bool, Failure> {
    let report = verify_key_lemma(r.n, r.trials, r.c, r.seed, r.workers)?;
    println!(
        "paths in window {}  legal {}  bonsai {}  legal and bonsai {}  counterexamples {} (expected 0)",
        report.in_window,
        report.legal,
        report.bonsai,
        report.candidates,
        report.counterexamples.len()
    );
    let rows: Vec<CounterexampleRow> = report
        .counterexamples
        .iter()
        .map(|c| CounterexampleRow {
            trial: c.trial,
            seed: c.seed,
            path: join(&c.path),
            path_weight: c.path_weight,
            witness: join(&c.witness),
            witness_weight: c.witness_weight,
        })
        .collect();
    for row in rows.iter().take(5) {
        println!(
            "  trial {} path {} ({:.4}) beaten by {} ({:.4})",
            row.trial, row.path, row.path_weight, row.witness, row.witness_weight
        );
    }
    let results = json!({
        "in_window": report.in_window,
        "legal": report.legal,
        "bonsai": report.bonsai,
        "candidates": report.candidates,
        "counterexamples": rows.len(),
    });
    let pass = rows.is_empty();
    finish(r, &rows, results, pass)
}

fn coupling(r: &Resolved) -> Result<bool, Failure> {
    let rep = ex::verify_coupling(r.n, r.trials, 100, r.seed, r.workers)?;
    println!(
        "paths {}  max |w'(P) - sum U| = {:.3e}  bound {:.3e}  longest path {} edges, weight {:.3}  {}",
        rep.paths_checked,
        rep.max_discrepancy,
        rep.bound,
        rep.max_edges,
        rep.max_path_weight,
        if rep.pass { "PASS" } else { "FAIL" }
    );
    finish(r, &[&rep], to_value(&rep), rep.pass)
}

#[derive(Serialize)]
struct KsRow {
    test: &'static str,
    statistic: f64,
    effective_n: f64,
    p_value: f64,
    critical_value: f64,
    rejected: bool,
}

fn order_stats(r: &Resolved) -> Result<bool, Failure> {
    let rep = ex::verify_uniform_order_stats(r.n, r.trials, r.seed, r.workers, 0.001)?;
    let rows = [("pooled_vs_uniform", rep.pooled), ("first_vs_beta", rep.first)].map(|(test, o)| KsRow {
        test,
        statistic: o.statistic,
        effective_n: o.effective_n,
        p_value: o.p_value,
        critical_value: o.critical_value,
        rejected: o.rejected,
    });
    for row in &rows {
        println!(
            "{:<18} D = {:.5}  p = {:.4}  critical {:.5}  {}",
            row.test,
            row.statistic,
            row.p_value,
            row.critical_value,
            if row.rejected { "rejected" } else { "not rejected" }
        );
    }
    println!(
        "mean S_1/S_n = {:.6} (s.e. {:.6}; reference 1/n = {:.6})",
        rep.mean_first,
        rep.mean_first_std_err,
        1.0 / r.n as f64
    );
    let pass = rows.iter().all(|row| !row.rejected);
    finish(r, &rows, to_value(&rep), pass)
}

fn estimate_alpha(r: &Resolved) -> Result<bool, Failure> {
    let est = ex::estimate_alpha(&r.n_grid, r.trials, r.seed, r.workers)?;
    for p in &est.points {
        println!(
            "n={:<6} max hops all pairs / ln n {:.4} (alpha* {:.4})  height from 1 / ln n {:.4} (e {:.4})",
            p.n,
            p.normalized_all_pairs,
            alpha_star(),
            p.normalized_from_1,
            std::f64::consts::E
        );
    }
    println!(
        "slope all pairs {:.4} (s.e. {:.4}), slope from 1 {:.4} (s.e. {:.4})",
        est.all_pairs_fit.slope, est.all_pairs_fit.slope_std_err, est.from_1_fit.slope, est.from_1_fit.slope_std_err
    );
    finish(r, &est.points, to_value(&est), true)
}
