//! Monte Carlo experiments: hop and weight asymptotics, tail-bound suites,
//! light-path counts and the exponential/uniform coupling.
//!
//! Weight statistics are reported in the n scale, where edges have mean
//! `n`; internally every weight has mean 1. Trials are seeded with
//! [`derive_trial_seed`](crate::weights::derive_trial_seed) and folded in
//! index order, so results do not depend on the worker count.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::combinat::{intersecting_ordered_pairs, light_paths};
use crate::error::{domain, Error, Result};
use crate::runner::run_trials;
use crate::sptsim::{
    all_pairs_hop_stats_pruned, default_threshold, dijkstra_spt, dijkstra_truncated, extract_path,
    rrt_height, HopStats,
};
use crate::stats::{ks_one_sample, least_squares, wilson_upper_95, KsOutcome, LinearFit, Summary};
use crate::theory::{
    alpha_star, expected_light_paths_exact, gamma_cdf, ln_gamma_cdf, max_hops_tail_bound, rrt_height_bound,
    spt_tail_bound, zeta2, coupling_bound, lightest_path_bound,
};
use crate::weights::{to_n_scale, EdgeWeights, PlantedWeights, WeightDistribution, WeightOracle};

pub const SCHEMA_VERSION: u32 = 1;
/// Largest `n` for all-pairs experiments.
pub const MAX_ALL_PAIRS_N: usize = 4000;
/// Largest `n` for the light-path enumeration experiment.
pub const MAX_LIGHT_PATH_N: usize = 40;
/// Largest `n` for the planted-path experiment.
pub const MAX_PLANTED_N: usize = 2000;
/// Largest `n` for the max-hops tail suite.
pub const MAX_TAIL_SUITE_N: usize = 1000;

/// Rough wall-clock estimate of `trials` all-pairs runs on one core.
pub fn all_pairs_runtime_model(n: usize, trials: usize) -> f64 {
    let nf = n as f64;
    trials as f64 * 5.7e-8 * nf * nf * nf.ln().max(1.0)
}

fn guard(what: &str, n: usize, max: usize, estimate: Option<f64>) -> Result<()> {
    if n > max {
        let model = estimate
            .map(|s| format!("; estimated runtime {s:.0} s"))
            .unwrap_or_default();
        return Err(Error::ResourceGuard(format!("{what} allows n <= {max}, got {n}{model}")));
    }
    Ok(())
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    Ok(())
}

/// One all-pairs trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub n: usize,
    pub seed: u64,
    pub hops_12: u32,
    pub max_hops_from_1: u32,
    pub max_hops_all_pairs: u32,
    pub w12_over_logn: f64,
    pub maxw_from1_over_logn: f64,
    pub maxw_allpairs_over_logn: f64,
    pub spt1_total_weight_over_n: f64,
    /// Wall-clock time; kept out of output files so they stay reproducible.
    #[serde(skip_serializing)]
    pub runtime_ms: f64,
}

impl TrialResult {
    fn from_stats(seed: u64, s: &HopStats, runtime_ms: f64) -> Self {
        let n = s.n;
        let logn = (n as f64).ln();
        Self {
            n,
            seed,
            hops_12: s.hops_12,
            max_hops_from_1: s.max_hops_from_1,
            max_hops_all_pairs: s.max_hops_all_pairs,
            w12_over_logn: to_n_scale(s.weight_12, n) / logn,
            maxw_from1_over_logn: to_n_scale(s.max_weight_from_1, n) / logn,
            maxw_allpairs_over_logn: to_n_scale(s.max_weight_all_pairs, n) / logn,
            spt1_total_weight_over_n: s.spt1_total_weight,
            runtime_ms,
        }
    }
}

/// Mean, spread and 95% interval of one statistic, with its limiting value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatAggregate {
    pub n: usize,
    pub statistic: String,
    pub trials: u64,
    pub mean: f64,
    pub std_dev: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub reference: f64,
}

impl StatAggregate {
    fn new(n: usize, statistic: &str, values: impl Iterator<Item = f64>, reference: f64) -> Self {
        let s: Summary = values.collect();
        let (ci_low, ci_high) = s.ci95();
        Self {
            n,
            statistic: statistic.to_string(),
            trials: s.count,
            mean: s.mean,
            std_dev: s.std_dev(),
            ci_low,
            ci_high,
            reference,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HopExperiment {
    pub trials: Vec<TrialResult>,
    pub aggregates: Vec<StatAggregate>,
}

impl HopExperiment {
    pub fn aggregate(&self, n: usize, statistic: &str) -> Option<&StatAggregate> {
        self.aggregates
            .iter()
            .find(|a| a.n == n && a.statistic == statistic)
    }
}

/// All-pairs hop and weight statistics of `K_n` for every `n` in `n_values`.
/// Trial `t` of the `r`-th size uses trial index `r * trials + t`.
pub fn run_hop_experiment(n_values: &[usize], trials: usize, master_seed: u64, workers: usize) -> Result<HopExperiment> {
    check_trials(trials)?;
    for &n in n_values {
        if n < 2 {
            return Err(Error::InvalidConfig(format!("n must be at least 2, got {n}")));
        }
        guard("all-pairs", n, MAX_ALL_PAIRS_N, Some(all_pairs_runtime_model(n, trials)))?;
    }
    let jobs: Vec<usize> = n_values
        .iter()
        .flat_map(|&n| std::iter::repeat(n).take(trials))
        .collect();
    let results = run_trials(workers, jobs.len(), master_seed, |idx, seed| {
        let n = jobs[idx];
        let start = Instant::now();
        let oracle = WeightOracle::exponential(seed);
        let stats = all_pairs_hop_stats_pruned(n, &oracle, default_threshold(n));
        TrialResult::from_stats(seed, &stats, start.elapsed().as_secs_f64() * 1e3)
    })?;
    let mut aggregates = Vec::new();
    let a = alpha_star();
    let e = std::f64::consts::E;
    for &n in n_values {
        let logn = (n as f64).ln();
        let rows: Vec<&TrialResult> = results.iter().filter(|r| r.n == n).collect();
        let hop = |f: fn(&TrialResult) -> u32| rows.iter().map(move |r| f(r) as f64 / logn);
        let real = |f: fn(&TrialResult) -> f64| rows.iter().map(move |r| f(r));
        aggregates.push(StatAggregate::new(n, "hops_12_over_logn", hop(|r| r.hops_12), 1.0));
        aggregates.push(StatAggregate::new(n, "max_hops_from_1_over_logn", hop(|r| r.max_hops_from_1), e));
        aggregates.push(StatAggregate::new(n, "max_hops_all_pairs_over_logn", hop(|r| r.max_hops_all_pairs), a));
        aggregates.push(StatAggregate::new(n, "w12_over_logn", real(|r| r.w12_over_logn), 1.0));
        aggregates.push(StatAggregate::new(n, "maxw_from1_over_logn", real(|r| r.maxw_from1_over_logn), 2.0));
        aggregates.push(StatAggregate::new(n, "maxw_allpairs_over_logn", real(|r| r.maxw_allpairs_over_logn), 3.0));
        aggregates.push(StatAggregate::new(
            n,
            "spt1_total_weight_over_n",
            real(|r| r.spt1_total_weight_over_n),
            zeta2(),
        ));
    }
    Ok(HopExperiment {
        trials: results,
        aggregates,
    })
}

/// Single-source statistics from vertex 1 (index 0).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleSourceTrial {
    pub n: usize,
    pub seed: u64,
    pub hops_12: u32,
    pub max_hops_from_1: u32,
    pub w12_over_logn: f64,
    pub maxw_from1_over_logn: f64,
    pub spt1_total_weight_over_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleSourceExperiment {
    pub trials: Vec<SingleSourceTrial>,
    pub aggregates: Vec<StatAggregate>,
    /// Finite-`n` expectation of the tree weight (internal scale).
    pub expected_tree_weight: f64,
}

/// `E[sum of SPT edge weights]` for mean-1 weights:
/// `sum_{m=1}^{n-1} (H_{n-1} - H_{m-1}) / (n - m)`.
pub fn expected_spt_weight(n: usize) -> f64 {
    let mut harmonic = vec![0.0; n];
    for j in 1..n {
        harmonic[j] = harmonic[j - 1] + 1.0 / j as f64;
    }
    (1..n)
        .map(|m| (harmonic[n - 1] - harmonic[m - 1]) / (n - m) as f64)
        .sum()
}

/// Shortest path tree from vertex 1 only: hop count and weight to vertex 2,
/// the tree height and radius, and the total tree weight.
pub fn run_single_source(n: usize, trials: usize, master_seed: u64, workers: usize) -> Result<SingleSourceExperiment> {
    check_trials(trials)?;
    if n < 2 {
        return Err(Error::InvalidConfig(format!("n must be at least 2, got {n}")));
    }
    let logn = (n as f64).ln();
    let rows = run_trials(workers, trials, master_seed, |_, seed| {
        let oracle = WeightOracle::exponential(seed);
        let tree = dijkstra_spt(n, 0, &oracle);
        SingleSourceTrial {
            n,
            seed,
            hops_12: tree.depth(1).unwrap_or(0),
            max_hops_from_1: tree.height(),
            w12_over_logn: to_n_scale(tree.dist(1), n) / logn,
            maxw_from1_over_logn: to_n_scale(tree.radius(), n) / logn,
            spt1_total_weight_over_n: tree.total_weight(&oracle),
        }
    })?;
    let aggregates = vec![
        StatAggregate::new(n, "hops_12_over_logn", rows.iter().map(|r| r.hops_12 as f64 / logn), 1.0),
        StatAggregate::new(
            n,
            "max_hops_from_1_over_logn",
            rows.iter().map(|r| r.max_hops_from_1 as f64 / logn),
            std::f64::consts::E,
        ),
        StatAggregate::new(n, "w12_over_logn", rows.iter().map(|r| r.w12_over_logn), 1.0),
        StatAggregate::new(n, "maxw_from1_over_logn", rows.iter().map(|r| r.maxw_from1_over_logn), 2.0),
        StatAggregate::new(n, "spt1_total_weight_over_n", rows.iter().map(|r| r.spt1_total_weight_over_n), zeta2()),
    ];
    Ok(SingleSourceExperiment {
        trials: rows,
        aggregates,
        expected_tree_weight: expected_spt_weight(n),
    })
}

/// Empirical frequency against a theoretical upper bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheckRow {
    pub suite: String,
    pub n: Option<usize>,
    pub m: Option<u64>,
    pub k: Option<usize>,
    pub t: Option<f64>,
    pub x: Option<f64>,
    pub eps: Option<f64>,
    pub trials: u64,
    pub successes: u64,
    pub empirical_frequency: f64,
    pub wilson_upper_95: f64,
    pub theoretical_bound: f64,
    pub vacuous: bool,
    pub pass: bool,
}

impl BoundCheckRow {
    fn new(suite: &str, successes: u64, trials: u64, bound: f64) -> Self {
        let upper = wilson_upper_95(successes, trials);
        let vacuous = bound >= 1.0;
        Self {
            suite: suite.to_string(),
            n: None,
            m: None,
            k: None,
            t: None,
            x: None,
            eps: None,
            trials,
            successes,
            empirical_frequency: successes as f64 / trials as f64,
            wilson_upper_95: upper,
            theoretical_bound: bound,
            vacuous,
            pass: vacuous || upper <= bound,
        }
    }
}

pub fn all_pass(rows: &[BoundCheckRow]) -> bool {
    rows.iter().all(|r| r.pass)
}

/// Arrival times `t_1, t_2, ...` of the growth process (internal scale),
/// stopped once `max_arrivals` are recorded or the time passes `horizon`.
fn arrival_times<R: Rng>(n: usize, max_arrivals: usize, horizon: f64, rng: &mut R, out: &mut Vec<f64>) {
    out.clear();
    let mut t = 0.0;
    for k in 1..n {
        if out.len() >= max_arrivals {
            break;
        }
        let rate = (k as f64) * ((n - k) as f64);
        t += rng.sample::<f64, _>(Exp1) / rate;
        out.push(t);
        if t > horizon {
            break;
        }
    }
}

/// Tail of the tree size: `P(|SPT(t)| >= m)` with `t = f ln n` (n
/// scale) and `m = ceil(c e^t)`, for every `f` in `t_factors` and `c` in
/// `c_values`.
pub fn verify_spt_tail(
    n: usize,
    t_factors: &[f64],
    c_values: &[f64],
    trials: usize,
    master_seed: u64,
    workers: usize,
) -> Result<Vec<BoundCheckRow>> {
    check_trials(trials)?;
    if n < 2 {
        return Err(domain("n", "need n >= 2"));
    }
    let logn = (n as f64).ln();
    let mut grid = Vec::new();
    for &f in t_factors {
        let t = f * logn;
        for &c in c_values {
            let m = (c * t.exp()).ceil() as u64;
            grid.push((t, m));
        }
    }
    let max_m = grid.iter().map(|g| g.1).max().unwrap_or(1).min(n as u64) as usize;
    let horizon = grid.iter().map(|g| g.0).fold(0.0, f64::max) / n as f64;
    let hits = run_trials(workers, trials, master_seed, |_, seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut times = Vec::new();
        arrival_times(n, max_m.saturating_sub(1), horizon, &mut rng, &mut times);
        grid.iter()
            .map(|&(t, m)| {
                // |SPT(t)| >= m iff the (m-1)-th arrival happened by t.
                m <= 1 || (m as usize <= n && times.get(m as usize - 2).is_some_and(|&tm| tm <= t / n as f64))
            })
            .collect::<Vec<bool>>()
    })?;
    Ok(grid
        .iter()
        .enumerate()
        .map(|(g, &(t, m))| {
            let successes = hits.iter().filter(|h| h[g]).count() as u64;
            let mut row = BoundCheckRow::new("spt-tail", successes, trials as u64, spt_tail_bound(t, m as f64));
            row.n = Some(n);
            row.t = Some(t);
            row.m = Some(m);
            row
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RrtHeightSuite {
    pub m: usize,
    pub trials: usize,
    pub rows: Vec<BoundCheckRow>,
    pub mean_height_over_log_m: f64,
    pub std_err_over_log_m: f64,
}

/// Height tail of random recursive trees on `m` nodes:
/// `P(h >= x ln m)` against `e^{x-1} m^{x - x ln x}`.
pub fn verify_rrt_height(m: usize, xs: &[f64], trials: usize, master_seed: u64, workers: usize) -> Result<RrtHeightSuite> {
    check_trials(trials)?;
    if m < 2 {
        return Err(domain("m", "need m >= 2"));
    }
    for &x in xs {
        rrt_height_bound(m as f64, x)?;
    }
    let heights = run_trials(workers, trials, master_seed, |_, seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut scratch = Vec::with_capacity(m);
        rrt_height(m, &mut rng, &mut scratch)
    })?;
    let logm = (m as f64).ln();
    let rows = xs
        .iter()
        .map(|&x| {
            let successes = heights.iter().filter(|&&h| h as f64 >= x * logm).count() as u64;
            let mut row = BoundCheckRow::new("rrt-height", successes, trials as u64, rrt_height_bound(m as f64, x).unwrap_or(1.0));
            row.m = Some(m as u64);
            row.x = Some(x);
            row
        })
        .collect();
    let s: Summary = heights.iter().map(|&h| h as f64 / logm).collect();
    Ok(RrtHeightSuite {
        m,
        trials,
        rows,
        mean_height_over_log_m: s.mean,
        std_err_over_log_m: s.std_err(),
    })
}

/// `P(max_{i,j} |P_ij| >= alpha* ln n + t)` against its exponential bound.
pub fn verify_max_hops_tail(n: usize, ts: &[f64], trials: usize, master_seed: u64, workers: usize) -> Result<Vec<BoundCheckRow>> {
    check_trials(trials)?;
    guard("max-hops tail suite", n, MAX_TAIL_SUITE_N, Some(all_pairs_runtime_model(n, trials)))?;
    for &t in ts {
        max_hops_tail_bound(n as f64, t)?;
    }
    let exp = run_hop_experiment(&[n], trials, master_seed, workers)?;
    let level = alpha_star() * (n as f64).ln();
    Ok(ts
        .iter()
        .map(|&t| {
            let successes = exp
                .trials
                .iter()
                .filter(|r| r.max_hops_all_pairs as f64 >= level + t)
                .count() as u64;
            let mut row = BoundCheckRow::new("max-hops-tail", successes, trials as u64, max_hops_tail_bound(n as f64, t).unwrap_or(1.0));
            row.n = Some(n);
            row.t = Some(t);
            row
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LightPathCount {
    pub n: usize,
    pub k: usize,
    pub eps: f64,
    pub trials: usize,
    pub mean_count: f64,
    pub std_err: f64,
    pub exact_expectation: f64,
    pub asymptotic_expectation: f64,
    /// `(mean - exact) / std_err`.
    pub z_score: f64,
    /// Ordered pairs of distinct light paths sharing an edge.
    pub mean_intersecting_pairs: f64,
    pub intersecting_pairs_std_err: f64,
    /// Fraction of trials without any light path.
    pub fraction_empty: f64,
}

/// Counts `k`-edge paths of n-scale weight at most `(1-eps) ln n` by
/// enumeration in every trial.
pub fn count_light_paths_mc(n: usize, k: usize, eps: f64, trials: usize, master_seed: u64, workers: usize) -> Result<LightPathCount> {
    check_trials(trials)?;
    guard("light-path enumeration", n, MAX_LIGHT_PATH_N, None)?;
    let expectation = expected_light_paths_exact(n, k, eps)?;
    let nf = n as f64;
    let threshold = (1.0 - eps) * nf.ln() / nf;
    let per_trial = run_trials(workers, trials, master_seed, |_, seed| {
        let oracle = WeightOracle::exponential(seed);
        let paths = light_paths(n, k, threshold, &oracle);
        (paths.len() as f64, intersecting_ordered_pairs(&paths) as f64)
    })?;
    let counts: Summary = per_trial.iter().map(|p| p.0).collect();
    let pairs: Summary = per_trial.iter().map(|p| p.1).collect();
    let empty = per_trial.iter().filter(|p| p.0 == 0.0).count();
    let se = counts.std_err();
    Ok(LightPathCount {
        n,
        k,
        eps,
        trials,
        mean_count: counts.mean,
        std_err: se,
        exact_expectation: expectation.exact,
        asymptotic_expectation: expectation.asymptotic,
        z_score: if se > 0.0 { (counts.mean - expectation.exact) / se } else { 0.0 },
        mean_intersecting_pairs: pairs.mean,
        intersecting_pairs_std_err: pairs.std_err(),
        fraction_empty: empty as f64 / trials as f64,
    })
}

/// Draw from Gamma(k, 1) conditioned on `[lo, hi]` by inverting the CDF in
/// log space.
pub fn sample_truncated_gamma<R: Rng>(k: u32, lo: f64, hi: f64, rng: &mut R) -> f64 {
    let lo = lo.max(0.0);
    let ln_hi = ln_gamma_cdf(k, hi);
    let ln_lo = ln_gamma_cdf(k, lo);
    let ratio = (ln_lo - ln_hi).exp();
    let u: f64 = rng.random();
    let target = ln_hi + (ratio + u * (1.0 - ratio)).ln();
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if ln_gamma_cdf(k, mid) < target {
            a = mid;
        } else {
            b = mid;
        }
        if b - a <= 1e-15 * b {
            break;
        }
    }
    0.5 * (a + b)
}

/// Planted-path test: a `k`-edge path with total weight drawn from its
/// conditional law on the window `[(1-2eps) ln n, (1-eps) ln n]` (n
/// scale), split by uniform spacings; success means some other path between
/// its endpoints is shorter.
pub fn verify_lightest_given_light(
    n: usize,
    k: usize,
    eps: f64,
    trials: usize,
    master_seed: u64,
    workers: usize,
) -> Result<BoundCheckRow> {
    check_trials(trials)?;
    guard("planted-path suite", n, MAX_PLANTED_N, None)?;
    if k == 0 || k >= n {
        return Err(domain("k", format!("need 1 <= k <= n-1, got {k}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(domain("eps", format!("{eps} not in (0, 1)")));
    }
    let nf = n as f64;
    let lo = (1.0 - 2.0 * eps) * nf.ln() / nf;
    let hi = (1.0 - eps) * nf.ln() / nf;
    let vertices: Vec<usize> = (0..=k).collect();
    let failures = run_trials(workers, trials, master_seed, |_, seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let total = sample_truncated_gamma(k as u32, lo, hi, &mut rng);
        let spacings: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let sum: f64 = spacings.iter().sum();
        let edges: Vec<f64> = spacings.iter().map(|s| total * s / sum).collect();
        let oracle = WeightOracle::exponential(seed);
        let planted = PlantedWeights::along_path(&oracle, &vertices, &edges);
        let weight: f64 = vertices.windows(2).map(|e| planted.weight(e[0], e[1])).sum();
        let tree = dijkstra_truncated(n, 0, &planted, weight * (1.0 + 1e-12));
        tree.path_to(k).as_deref() != Some(vertices.as_slice())
    })?;
    let successes = failures.iter().filter(|&&f| f).count() as u64;
    let mut row = BoundCheckRow::new("lightest-given-light", successes, trials as u64, lightest_path_bound(nf, k as f64, eps));
    row.n = Some(n);
    row.k = Some(k);
    row.eps = Some(eps);
    Ok(row)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingReport {
    pub n: usize,
    pub paths_checked: usize,
    /// Internal scale.
    pub max_discrepancy: f64,
    pub bound: f64,
    pub max_edges: usize,
    /// Paper scale.
    pub max_path_weight: f64,
    /// Largest single-edge `|x - u| - x^2/2`; never positive.
    pub worst_edge_slack: f64,
    pub pass: bool,
}

/// Shortest paths under coupled weights `x_e = -ln(1 - U_e)` compared with
/// the sum of the underlying uniforms. Paths come from `sources` shortest
/// path trees, `targets_per_source` random targets each; only paths with at
/// most `12 ln n` edges and n-scale weight at most `12 ln n` are kept.
pub fn verify_coupling(
    n: usize,
    sources: usize,
    targets_per_source: usize,
    master_seed: u64,
    workers: usize,
) -> Result<CouplingReport> {
    check_trials(sources)?;
    if n < 2 {
        return Err(domain("n", "need n >= 2"));
    }
    let nf = n as f64;
    let limit = 12.0 * nf.ln();
    let per_source = run_trials(workers, sources, master_seed, |_, seed| -> Result<(usize, f64, usize, f64, f64)> {
        let coupled = WeightOracle::new(seed, WeightDistribution::CoupledExponential);
        let uniform = coupled.with_distribution(WeightDistribution::Uniform01);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let source = rng.random_range(0..n);
        let tree = dijkstra_spt(n, source, &coupled);
        let (mut kept, mut worst, mut max_edges, mut max_w, mut slack) = (0, 0.0f64, 0, 0.0f64, f64::NEG_INFINITY);
        for _ in 0..targets_per_source {
            let mut target = rng.random_range(0..n - 1);
            if target >= source {
                target += 1;
            }
            let path = extract_path(&tree, target, &coupled).ok_or_else(|| domain("path", "unreachable"))?;
            let scaled_weight = path.weight() * nf;
            if path.edges() as f64 > limit || scaled_weight > limit {
                continue;
            }
            let mut u_sum = 0.0;
            for e in path.vertices().windows(2) {
                let u = uniform.weight(e[0], e[1]);
                let x = coupled.weight(e[0], e[1]);
                slack = slack.max((x - u).abs() - x * x / 2.0);
                u_sum += u;
            }
            let x_sum: f64 = path.edge_weights().iter().sum();
            worst = worst.max((x_sum - u_sum).abs());
            kept += 1;
            max_edges = max_edges.max(path.edges());
            max_w = max_w.max(scaled_weight);
        }
        Ok((kept, worst, max_edges, max_w, slack))
    })?;
    let mut report = CouplingReport {
        n,
        paths_checked: 0,
        max_discrepancy: 0.0,
        bound: coupling_bound(nf),
        max_edges: 0,
        max_path_weight: 0.0,
        worst_edge_slack: f64::NEG_INFINITY,
        pass: false,
    };
    for r in per_source {
        let (kept, worst, edges, w, slack) = r?;
        report.paths_checked += kept;
        report.max_discrepancy = report.max_discrepancy.max(worst);
        report.max_edges = report.max_edges.max(edges);
        report.max_path_weight = report.max_path_weight.max(w);
        report.worst_edge_slack = report.worst_edge_slack.max(slack);
    }
    report.pass = report.max_discrepancy <= report.bound && report.worst_edge_slack <= 1e-15;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderStatsReport {
    pub n: usize,
    pub trials: usize,
    /// Pooled `S_k / S_n`, `k < n`, against the uniform law.
    pub pooled: KsOutcome,
    /// `S_1 / S_n` against Beta(1, n-1).
    pub first: KsOutcome,
    pub mean_first: f64,
    pub mean_first_std_err: f64,
}

/// Normalized partial sums of `n` i.i.d. exponentials behave like uniform
/// order statistics.
pub fn verify_uniform_order_stats(n: usize, trials: usize, master_seed: u64, workers: usize, alpha: f64) -> Result<OrderStatsReport> {
    check_trials(trials)?;
    if n < 2 {
        return Err(domain("n", "need n >= 2"));
    }
    let per_trial = run_trials(workers, trials, master_seed, |_, seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut partial = Vec::with_capacity(n);
        let mut s = 0.0;
        for _ in 0..n {
            s += rng.sample::<f64, _>(Exp1);
            partial.push(s);
        }
        partial.pop();
        partial.iter().map(|p| p / s).collect::<Vec<f64>>()
    })?;
    let pooled: Vec<f64> = per_trial.iter().flatten().copied().collect();
    let first: Vec<f64> = per_trial.iter().map(|v| v[0]).collect();
    let summary: Summary = first.iter().copied().collect();
    let exponent = (n - 1) as i32;
    Ok(OrderStatsReport {
        n,
        trials,
        pooled: ks_one_sample(&pooled, |x| x.clamp(0.0, 1.0), alpha),
        first: ks_one_sample(&first, |x| 1.0 - (1.0 - x.clamp(0.0, 1.0)).powi(exponent), alpha),
        mean_first: summary.mean,
        mean_first_std_err: summary.std_err(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaPoint {
    pub n: usize,
    pub log_n: f64,
    pub mean_max_hops_all_pairs: f64,
    pub mean_max_hops_from_1: f64,
    pub normalized_all_pairs: f64,
    pub normalized_from_1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaEstimate {
    pub points: Vec<AlphaPoint>,
    pub all_pairs_fit: LinearFit,
    pub from_1_fit: LinearFit,
    pub alpha_star: f64,
}

/// Least-squares slope of the mean longest hop count against `ln n`.
pub fn estimate_alpha(n_grid: &[usize], trials: usize, master_seed: u64, workers: usize) -> Result<AlphaEstimate> {
    if n_grid.len() < 3 {
        return Err(Error::InvalidConfig(format!("need at least 3 grid points, got {}", n_grid.len())));
    }
    let exp = run_hop_experiment(n_grid, trials, master_seed, workers)?;
    let points: Vec<AlphaPoint> = n_grid
        .iter()
        .map(|&n| {
            let rows: Vec<&TrialResult> = exp.trials.iter().filter(|r| r.n == n).collect();
            let len = rows.len() as f64;
            let all = rows.iter().map(|r| r.max_hops_all_pairs as f64).sum::<f64>() / len;
            let from1 = rows.iter().map(|r| r.max_hops_from_1 as f64).sum::<f64>() / len;
            let log_n = (n as f64).ln();
            AlphaPoint {
                n,
                log_n,
                mean_max_hops_all_pairs: all,
                mean_max_hops_from_1: from1,
                normalized_all_pairs: all / log_n,
                normalized_from_1: from1 / log_n,
            }
        })
        .collect();
    let xs: Vec<f64> = points.iter().map(|p| p.log_n).collect();
    let all: Vec<f64> = points.iter().map(|p| p.mean_max_hops_all_pairs).collect();
    let from1: Vec<f64> = points.iter().map(|p| p.mean_max_hops_from_1).collect();
    Ok(AlphaEstimate {
        all_pairs_fit: least_squares(&xs, &all),
        from_1_fit: least_squares(&xs, &from1),
        points,
        alpha_star: alpha_star(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_err: f64,
    pub draws: usize,
}

/// `P(w(P) <= s, w(Q) <= s)` for two `k`-edge paths sharing `i` edges, by
/// drawing the `2k - i` edge weights directly.
pub fn joint_weight_mc(k: usize, i: usize, s: f64, draws: usize, seed: u64) -> Result<McEstimate> {
    if !(1 <= i && i < k) || draws == 0 {
        return Err(domain("joint weight", format!("k = {k}, i = {i}, draws = {draws}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..draws {
        let shared: f64 = (0..i).map(|_| rng.sample::<f64, _>(Exp1)).sum();
        let p: f64 = (0..k - i).map(|_| rng.sample::<f64, _>(Exp1)).sum();
        let q: f64 = (0..k - i).map(|_| rng.sample::<f64, _>(Exp1)).sum();
        if shared + p <= s && shared + q <= s {
            hits += 1;
        }
    }
    let p = hits as f64 / draws as f64;
    Ok(McEstimate {
        estimate: p,
        std_err: (p * (1.0 - p) / draws as f64).sqrt(),
        draws,
    })
}

/// `P(S_k >= k x)` for a sum of `k` mean-1 exponentials.
pub fn exponential_sum_tail_mc(k: usize, x: f64, draws: usize, seed: u64) -> McEstimate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let level = k as f64 * x;
    let hits = (0..draws)
        .filter(|_| (0..k).map(|_| rng.sample::<f64, _>(Exp1)).sum::<f64>() >= level)
        .count();
    let p = hits as f64 / draws as f64;
    McEstimate {
        estimate: p,
        std_err: (p * (1.0 - p) / draws as f64).sqrt(),
        draws,
    }
}

/// Exact `P(Gamma(k) <= s)`, convenient for comparisons.
pub fn light_probability(k: usize, s: f64) -> f64 {
    gamma_cdf(k as u32, s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredicateRow {
    pub trial: usize,
    pub seed: u64,
    /// Paper scale.
    pub path_weight: f64,
    pub minimal_c: f64,
    pub legal: bool,
    pub bonsai: bool,
    pub first_violation_vertex: Option<usize>,
    pub first_violation_ell: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredicatePilot {
    pub n: usize,
    pub k: usize,
    pub eps: f64,
    pub c: f64,
    pub threshold_variant: bool,
    pub rows: Vec<PredicateRow>,
    pub fraction_legal: f64,
    pub fraction_bonsai: f64,
    pub fraction_both: f64,
}

/// Legality and bonsai status of a planted light path `0, 1, ..., k`. Its
/// weight is drawn as in [`verify_lightest_given_light`]; the bonsai check
/// resamples the path edges. With `threshold_variant` the height allowance
/// uses `(1 - eps) ln n` in place of the path weight.
pub fn predicate_pilot(
    n: usize,
    k: usize,
    eps: f64,
    c: f64,
    threshold_variant: bool,
    trials: usize,
    master_seed: u64,
    workers: usize,
) -> Result<PredicatePilot> {
    use crate::predicates::{is_bonsai, is_legal, minimal_legal_c, BonsaiWeight};
    use crate::sptsim::PathRecord;

    check_trials(trials)?;
    guard("predicate pilot", n, MAX_PLANTED_N, None)?;
    if k == 0 || k >= n {
        return Err(domain("k", format!("need 1 <= k <= n-1, got {k}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(domain("eps", format!("{eps} not in (0, 1)")));
    }
    let nf = n as f64;
    let lo = (1.0 - 2.0 * eps) * nf.ln() / nf;
    let hi = (1.0 - eps) * nf.ln() / nf;
    let allowance = if threshold_variant {
        BonsaiWeight::Threshold { eps }
    } else {
        BonsaiWeight::PathWeight
    };
    let vertices: Vec<usize> = (0..=k).collect();
    let rows = run_trials(workers, trials, master_seed, |trial, seed| -> Result<PredicateRow> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let total = sample_truncated_gamma(k as u32, lo, hi, &mut rng);
        let spacings: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let sum: f64 = spacings.iter().sum();
        let edges: Vec<f64> = spacings.iter().map(|s| total * s / sum).collect();
        let path = PathRecord::with_edge_weights(vertices.clone(), edges)?;
        let oracle = WeightOracle::exponential(seed);
        let legal = is_legal(&path, c)?.legal;
        let bonsai = is_bonsai(&path, c, n, &oracle, allowance)?;
        let first = bonsai.violations.first();
        Ok(PredicateRow {
            trial,
            seed,
            path_weight: path.weight() * nf,
            minimal_c: minimal_legal_c(path.edge_weights())?,
            legal,
            bonsai: bonsai.bonsai,
            first_violation_vertex: first.map(|v| v.vertex_index),
            first_violation_ell: first.map(|v| v.ell),
        })
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let frac = |f: &dyn Fn(&PredicateRow) -> bool| rows.iter().filter(|r| f(r)).count() as f64 / trials as f64;
    Ok(PredicatePilot {
        n,
        k,
        eps,
        c,
        threshold_variant,
        fraction_legal: frac(&|r| r.legal),
        fraction_bonsai: frac(&|r| r.bonsai),
        fraction_both: frac(&|r| r.legal && r.bonsai),
        rows,
    })
}

/// Resolved experiment settings; every field optional so that an empty file
/// means "all defaults". Unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_version: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, rename = "C", alias = "c", skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<SeedValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bonsai_eps_variant: Option<bool>,
}

/// A seed written as a JSON number or as a decimal / `0x` hex string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedValue {
    Number(u64),
    Text(String),
}

impl SeedValue {
    pub fn resolve(&self) -> Result<u64> {
        match self {
            SeedValue::Number(v) => Ok(*v),
            SeedValue::Text(t) => crate::weights::parse_seed(t),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(v) = self.schema_version {
            if v != SCHEMA_VERSION {
                return Err(Error::InvalidConfig(format!("schema_version {v}, expected {SCHEMA_VERSION}")));
            }
        }
        if let Some(n) = self.n {
            if n < 2 {
                return Err(Error::InvalidConfig(format!("n must be at least 2, got {n}")));
            }
        }
        if let Some(grid) = &self.n_grid {
            if let Some(&bad) = grid.iter().find(|&&n| n < 2) {
                return Err(Error::InvalidConfig(format!("n_grid entries must be at least 2, got {bad}")));
            }
        }
        if self.trials == Some(0) {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        if self.k == Some(0) {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        if let Some(eps) = self.eps {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(Error::InvalidConfig(format!("eps must lie in (0, 1), got {eps}")));
            }
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d <= 1.0) {
                return Err(Error::InvalidConfig(format!("delta must lie in (0, 1], got {d}")));
            }
        }
        if let Some(c) = self.c {
            if !(c >= 0.0) {
                return Err(Error::InvalidConfig(format!("C must be nonnegative, got {c}")));
            }
        }
        if let Some(seed) = &self.seed {
            seed.resolve()
                .map_err(|e| Error::InvalidConfig(format!("seed: {e}")))?;
        }
        Ok(())
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overridden_by(mut self, other: &ExperimentConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => {$( if other.$f.is_some() { self.$f = other.$f.clone(); } )*};
        }
        take!(schema_version, experiment, n, n_grid, k, eps, c, delta, trials, seed, workers, out, bonsai_eps_variant);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_vertices() {
        let exp = run_hop_experiment(&[2], 3, 7, 1).unwrap();
        for r in &exp.trials {
            assert_eq!((r.hops_12, r.max_hops_from_1, r.max_hops_all_pairs), (1, 1, 1));
            assert_eq!(r.w12_over_logn, r.maxw_from1_over_logn);
            assert_eq!(r.w12_over_logn, r.maxw_allpairs_over_logn);
        }
    }

    #[test]
    fn guards() {
        assert!(matches!(run_hop_experiment(&[5000], 1, 1, 1), Err(Error::ResourceGuard(_))));
        assert!(matches!(count_light_paths_mc(41, 2, 0.1, 1, 1, 1), Err(Error::ResourceGuard(_))));
        assert!(run_hop_experiment(&[10], 0, 1, 1).is_err());
    }

    #[test]
    fn ordering_holds_in_every_trial() {
        let exp = run_hop_experiment(&[60, 90], 10, 3, 2).unwrap();
        assert_eq!(exp.trials.len(), 20);
        for r in &exp.trials {
            assert!(r.hops_12 <= r.max_hops_from_1 && r.max_hops_from_1 <= r.max_hops_all_pairs);
            assert!(r.w12_over_logn <= r.maxw_from1_over_logn && r.maxw_from1_over_logn <= r.maxw_allpairs_over_logn);
        }
    }

    #[test]
    fn worker_count_does_not_matter() {
        let a = run_hop_experiment(&[40], 6, 5, 1).unwrap();
        let b = run_hop_experiment(&[40], 6, 5, 3).unwrap();
        let strip = |e: &HopExperiment| e.trials.iter().map(|t| (t.seed, t.max_hops_all_pairs, t.spt1_total_weight_over_n.to_bits())).collect::<Vec<_>>();
        assert_eq!(strip(&a), strip(&b));
        assert_eq!(a.aggregates, b.aggregates);
    }

    #[test]
    fn expected_spt_weight_small() {
        // n = 2: a single edge of mean 1.
        assert!((expected_spt_weight(2) - 1.0).abs() < 1e-15);
        // n = 3: first edge mean 1/2, second edge from the later arrival's
        // perspective: mean 1/2 + 1/4.
        assert!((expected_spt_weight(3) - 1.25).abs() < 1e-12);
        assert!((expected_spt_weight(100_000) - zeta2()).abs() < 1e-3);
    }

    #[test]
    fn truncated_gamma_stays_in_window() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in [1u32, 3, 5, 10] {
            for _ in 0..200 {
                let x = sample_truncated_gamma(k, 0.001, 0.0048, &mut rng);
                assert!((0.001..=0.0048).contains(&x));
            }
        }
    }

    #[test]
    fn vacuous_rows_pass() {
        let row = BoundCheckRow::new("x", 10, 10, 1.5);
        assert!(row.vacuous && row.pass);
        let row = BoundCheckRow::new("x", 10, 10, 0.5);
        assert!(!row.pass);
    }

    #[test]
    fn config_validation() {
        let empty: ExperimentConfig = ExperimentConfig::default();
        assert!(empty.validate().is_ok());
        let bad = ExperimentConfig { n: Some(1), ..Default::default() };
        assert!(bad.validate().is_err());
        let base = ExperimentConfig { trials: Some(5), n: Some(10), ..Default::default() };
        let flags = ExperimentConfig { trials: Some(9), ..Default::default() };
        let merged = base.overridden_by(&flags);
        assert_eq!((merged.trials, merged.n), (Some(9), Some(10)));
        assert_eq!(SeedValue::Text("0x10".into()).resolve().unwrap(), 16);
    }
}
