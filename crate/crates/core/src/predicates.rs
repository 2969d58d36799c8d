//! Structural predicates on paths: legality of the partial weight sums,
//! short shortest path trees around the path ("bonsai"), single-component
//! intersections and local optimality.
//!
//! Thresholds in these definitions live in the n weight scale (mean-`n`
//! edges). Functions taking a `unit` convert: a n-scale length `x` is
//! `x * unit` in the scale of the supplied weights, so `unit = 1/n` for the
//! internal mean-1 weights and `unit = 1` for n-scale weights.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use crate::combinat::{for_each_path, intersection_profile};
use crate::error::{domain, Error, Result};
use crate::runner::run_trials;
use crate::sptsim::{dijkstra_truncated, PathRecord};
use crate::stats::wilson_interval;
use crate::stats::Z_TWO_SIDED_95;
use crate::theory::loglog;
use crate::weights::{DenseWeights, EdgeWeights, ResampledPath, WeightOracle};

/// Absolute slack for floating-point comparisons of normalized sums.
const SLACK: f64 = 1e-9;

/// `(m(i,k), m(j,k), s(i,j,k))` with `m(i,k) = min(i-1, k+1-i)` and
/// `s = max(m(i,k), m(j,k))`; vertices are numbered `1..=k+1`.
pub fn m_and_s(i: usize, j: usize, k: usize) -> Result<(usize, usize, usize)> {
    if !(1 <= i && i < j && j <= k + 1) {
        return Err(domain("m/s", format!("need 1 <= i < j <= k+1, got i = {i}, j = {j}, k = {k}")));
    }
    let mi = m_of(i, k);
    let mj = m_of(j, k);
    Ok((mi, mj, mi.max(mj)))
}

/// `m(i,k) = min(i-1, k+1-i)` for `1 <= i <= k+1`.
pub fn m_of(i: usize, k: usize) -> usize {
    (i - 1).min(k + 1 - i)
}

fn lil_radius(i: usize) -> f64 {
    let x = i as f64;
    (2.0 * x * loglog(x)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LegalityReport {
    pub vertices: Vec<usize>,
    pub c: f64,
    /// Entry `i-1`: `|k/w * (X_1 + ... + X_i) - i| - C sqrt(2 i loglog i)`.
    pub forward_margins: Vec<f64>,
    /// Same for the last `i` edges.
    pub backward_margins: Vec<f64>,
    pub legal: bool,
}

fn normalized_deviations(edge_weights: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let k = edge_weights.len();
    let w: f64 = edge_weights.iter().sum();
    if k == 0 || !(w > 0.0) {
        return Err(domain("legality", "path needs at least one edge and positive weight"));
    }
    let scale = k as f64 / w;
    let mut forward = Vec::with_capacity(k);
    let mut backward = Vec::with_capacity(k);
    let (mut f, mut b) = (0.0, 0.0);
    for i in 1..=k {
        f += edge_weights[i - 1];
        b += edge_weights[k - i];
        forward.push((scale * f - i as f64).abs());
        backward.push((scale * b - i as f64).abs());
    }
    Ok((forward, backward))
}

/// Legality of a path for constant `C`: prefix and suffix sums of the
/// normalized edge weights stay within `C sqrt(2 i loglog i)` of `i`.
pub fn is_legal(path: &PathRecord, c: f64) -> Result<LegalityReport> {
    let (forward, backward) = normalized_deviations(path.edge_weights())?;
    let margin = |dev: &Vec<f64>| -> Vec<f64> {
        dev.iter()
            .enumerate()
            .map(|(idx, d)| d - c * lil_radius(idx + 1))
            .collect()
    };
    let forward_margins = margin(&forward);
    let backward_margins = margin(&backward);
    let legal = forward_margins
        .iter()
        .chain(&backward_margins)
        .all(|&m| m <= SLACK);
    Ok(LegalityReport {
        vertices: path.vertices().to_vec(),
        c,
        forward_margins,
        backward_margins,
        legal,
    })
}

/// Smallest `C` for which the path is legal.
pub fn minimal_legal_c(edge_weights: &[f64]) -> Result<f64> {
    let (forward, backward) = normalized_deviations(edge_weights)?;
    Ok(forward
        .iter()
        .chain(&backward)
        .enumerate()
        .map(|(idx, d)| d / lil_radius(idx % forward.len() + 1))
        .fold(0.0, f64::max))
}

/// Deviation of the subpath `v_i .. v_j` from its share of the weight, and
/// the bound `2C sqrt(2 s loglog s)` that legality implies for it.
pub fn subpath_deviation(path: &PathRecord, i: usize, j: usize, c: f64) -> Result<(f64, f64)> {
    let k = path.edges();
    let (_, _, s) = m_and_s(i, j, k)?;
    let w = path.weight();
    if !(w > 0.0) {
        return Err(domain("subpath", "zero-weight path"));
    }
    let part: f64 = path.edge_weights()[i - 1..j - 1].iter().sum();
    let deviation = (k as f64 / w * part - (j - i) as f64).abs();
    let sf = s as f64;
    Ok((deviation, 2.0 * c * (2.0 * sf * loglog(sf)).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BonsaiViolation {
    /// 1-based position of the vertex along the path.
    pub vertex_index: usize,
    pub ell: u64,
    pub observed_height: u32,
    pub allowed_height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BonsaiReport {
    pub vertices: Vec<usize>,
    pub c: f64,
    /// First violating level for each offending vertex.
    pub violations: Vec<BonsaiViolation>,
    pub bonsai: bool,
    /// Levels `ell >= ell_max_used` are vacuous: the allowed height reaches `n`.
    pub ell_max_used: u64,
}

/// How the weight in the height allowance `9k / (10 W)` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BonsaiWeight {
    /// The path's own n-scale weight.
    PathWeight,
    /// `(1 - eps) ln n` instead of the path's weight.
    Threshold { eps: f64 },
}

/// Paper-scale search radius at level `ell`: `ell + 2C sqrt(500 ell loglog ell)`.
pub fn bonsai_budget(ell: u64, c: f64) -> f64 {
    let l = ell as f64;
    l + 2.0 * c * (500.0 * l * loglog(l)).sqrt()
}

/// Core bonsai check. `weights` must already carry the resampled weights on
/// the path's edges (the graph `K_n^P`); `scaled_weight` is the path's weight
/// in the n scale and `unit` converts n-scale budgets to the scale of
/// `weights`.
pub fn bonsai_check<W: EdgeWeights>(
    vertices: &[usize],
    scaled_weight: f64,
    c: f64,
    n: usize,
    weights: &W,
    unit: f64,
    allowance_weight: BonsaiWeight,
    stop_at_first: bool,
) -> Result<BonsaiReport> {
    let k = vertices.len().saturating_sub(1);
    if k == 0 {
        return Err(domain("bonsai", "path needs at least one edge"));
    }
    let big_w = match allowance_weight {
        BonsaiWeight::PathWeight => scaled_weight,
        BonsaiWeight::Threshold { eps } => (1.0 - eps) * (n as f64).ln(),
    };
    if !(big_w > 0.0) {
        return Err(domain("bonsai", format!("allowance weight {big_w}")));
    }
    let slope = 9.0 * k as f64 / (10.0 * big_w);
    // Smallest ell with slope * ell >= n.
    let mut ell_max = ((n as f64) / slope).ceil().max(1.0) as u64;
    while ell_max > 1 && slope * ((ell_max - 1) as f64) >= n as f64 {
        ell_max -= 1;
    }
    while slope * (ell_max as f64) < n as f64 {
        ell_max += 1;
    }
    let mut violations = Vec::new();
    for (pos, &v) in vertices.iter().enumerate() {
        let index = pos + 1;
        let ell_min = ((m_of(index, k) as f64) / 40.0).ceil().max(1.0) as u64;
        if ell_min >= ell_max {
            continue;
        }
        let widest = bonsai_budget(ell_max - 1, c) * unit;
        let tree = dijkstra_truncated(n, v, weights, widest);
        let heights = tree.prefix_heights();
        for ell in ell_min..ell_max {
            let budget = bonsai_budget(ell, c) * unit;
            let size = tree.size_within(budget);
            let height = heights[size - 1];
            let allowed = slope * ell as f64;
            if (height as f64) >= allowed {
                violations.push(BonsaiViolation {
                    vertex_index: index,
                    ell,
                    observed_height: height,
                    allowed_height: allowed,
                });
                break;
            }
        }
        if stop_at_first && !violations.is_empty() {
            break;
        }
    }
    Ok(BonsaiReport {
        vertices: vertices.to_vec(),
        c,
        bonsai: violations.is_empty(),
        violations,
        ell_max_used: ell_max,
    })
}

/// Bonsai check against the oracle: layer 1 on the path's edges, layer 0
/// elsewhere, internal scale.
pub fn is_bonsai(
    path: &PathRecord,
    c: f64,
    n: usize,
    oracle: &WeightOracle,
    allowance_weight: BonsaiWeight,
) -> Result<BonsaiReport> {
    let graph = ResampledPath::from_oracle(oracle, path.vertices());
    let nf = n as f64;
    bonsai_check(
        path.vertices(),
        path.weight() * nf,
        c,
        n,
        &graph,
        1.0 / nf,
        allowance_weight,
        false,
    )
}

/// True iff the paths share at least one edge and the shared edges form a
/// single connected piece.
pub fn intersects_once(p: &[usize], q: &[usize]) -> bool {
    let profile = intersection_profile(p, q);
    profile.shared_edges >= 1 && profile.components == 1
}

/// Largest `n` accepted by the local-optimum search.
pub const MAX_LOCAL_OPTIMUM_N: usize = 9;

fn same_path(p: &[usize], q: &[usize]) -> bool {
    p == q || p.iter().rev().eq(q.iter())
}

/// A path `Q != P` with as many edges as `P`, intersecting `P` once, and not
/// strictly heavier than `P`; `None` if `P` is a local optimum.
pub fn local_optimum_witness<W: EdgeWeights>(
    p: &[usize],
    n: usize,
    weights: &W,
) -> Result<Option<(Vec<usize>, f64)>> {
    if n > MAX_LOCAL_OPTIMUM_N {
        return Err(Error::EnumerationLimit(format!(
            "local optimum search needs n <= {MAX_LOCAL_OPTIMUM_N}, got {n}"
        )));
    }
    let k = p.len().saturating_sub(1);
    if k == 0 || k >= n {
        return Err(domain("local optimum", format!("path with {k} edges in K_{n}")));
    }
    let wp: f64 = p.windows(2).map(|e| weights.weight(e[0], e[1])).sum();
    let mut witness = None;
    for_each_path(n, k, |q| {
        if witness.is_some() || same_path(p, q) || !intersects_once(p, q) {
            return;
        }
        let wq: f64 = q.windows(2).map(|e| weights.weight(e[0], e[1])).sum();
        if wq <= wp {
            witness = Some((q.to_vec(), wq));
        }
    });
    Ok(witness)
}

pub fn is_local_optimum<W: EdgeWeights>(p: &[usize], n: usize, weights: &W) -> Result<bool> {
    Ok(local_optimum_witness(p, n, weights)?.is_none())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeyLemmaCounterexample {
    pub trial: usize,
    pub seed: u64,
    pub path: Vec<usize>,
    /// Paper scale.
    pub path_weight: f64,
    pub witness: Vec<usize>,
    pub witness_weight: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct KeyLemmaReport {
    pub n: usize,
    pub trials: usize,
    pub c: f64,
    /// Paths with `w <= k <= 4w`.
    pub in_window: u64,
    pub legal: u64,
    pub bonsai: u64,
    /// In the window, legal and bonsai.
    pub candidates: u64,
    pub counterexamples: Vec<KeyLemmaCounterexample>,
}

/// Largest `n` for the exhaustive key-lemma check.
pub const MAX_KEY_LEMMA_N: usize = 8;

/// Exhaustive check that every path with `w(P) <= k <= 4 w(P)` (n
/// scale) that is legal and bonsai is a local optimum.
pub fn verify_key_lemma(n: usize, trials: usize, c: f64, master_seed: u64, workers: usize) -> Result<KeyLemmaReport> {
    if n > MAX_KEY_LEMMA_N {
        return Err(Error::EnumerationLimit(format!(
            "key lemma check needs n <= {MAX_KEY_LEMMA_N}, got {n}"
        )));
    }
    if n < 2 {
        return Err(domain("n", "need n >= 2"));
    }
    let mut paths_by_k: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n];
    for (k, slot) in paths_by_k.iter_mut().enumerate().skip(1) {
        for_each_path(n, k, |p| slot.push(p.to_vec()));
    }
    let nf = n as f64;
    let per_trial = run_trials(workers, trials, master_seed, |trial, seed| -> Result<KeyLemmaReport> {
        let oracle = WeightOracle::exponential(seed);
        let base = DenseWeights::from_weights(n, &oracle);
        let resampled = DenseWeights::from_weights(n, &oracle.layer(1));
        let mut r = KeyLemmaReport::default();
        for (k, paths) in paths_by_k.iter().enumerate().skip(1) {
            let kf = k as f64;
            for p in paths {
                let record = PathRecord::from_weights(p.clone(), &base)?;
                let scaled_w = record.weight() * nf;
                if !(scaled_w <= kf && kf <= 4.0 * scaled_w) {
                    continue;
                }
                r.in_window += 1;
                let legal = is_legal(&record, c)?.legal;
                let graph = ResampledPath::new(&base, &resampled, p);
                let bonsai = bonsai_check(p, scaled_w, c, n, &graph, 1.0 / nf, BonsaiWeight::PathWeight, true)?
                    .bonsai;
                r.legal += legal as u64;
                r.bonsai += bonsai as u64;
                if !(legal && bonsai) {
                    continue;
                }
                r.candidates += 1;
                if let Some((witness, wq)) = local_optimum_witness(p, n, &base)? {
                    r.counterexamples.push(KeyLemmaCounterexample {
                        trial,
                        seed,
                        path: p.clone(),
                        path_weight: scaled_w,
                        witness,
                        witness_weight: wq * nf,
                    });
                }
            }
        }
        Ok(r)
    })?;
    let mut total = KeyLemmaReport {
        n,
        trials,
        c,
        ..Default::default()
    };
    for r in per_trial {
        let r = r?;
        total.in_window += r.in_window;
        total.legal += r.legal;
        total.bonsai += r.bonsai;
        total.candidates += r.candidates;
        total.counterexamples.extend(r.counterexamples);
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub delta: f64,
    pub k: usize,
    pub samples: usize,
    pub c: f64,
    pub fraction_legal: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

/// `0` followed by `0.01 * 1.05^t` up to about 100.
pub fn c_grid() -> Vec<f64> {
    let mut grid = vec![0.0];
    let mut c: f64 = 0.01;
    while c <= 100.0 {
        grid.push(c);
        c *= 1.05;
    }
    grid
}

/// Minimal legality constant of `samples` independent `k`-edge paths with
/// mean-1 exponential edges, in sample order.
pub fn sample_minimal_c(k: usize, samples: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = vec![0.0; k];
    (0..samples)
        .map(|_| {
            for e in edges.iter_mut() {
                *e = Exp1.sample(&mut rng);
            }
            minimal_legal_c(&edges)
        })
        .collect()
}

/// Smallest grid `C` with at least a `1 - delta` fraction of sampled `k`-edge
/// paths legal.
pub fn calibrate_c(delta: f64, k: usize, samples: usize, seed: u64) -> Result<CalibrationReport> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(domain("delta", format!("{delta} not in (0, 1]")));
    }
    if k == 0 || samples == 0 {
        return Err(domain("calibration", "need k >= 1 and samples >= 1"));
    }
    let mut minimal = sample_minimal_c(k, samples, seed)?;
    minimal.sort_by(f64::total_cmp);
    let target = 1.0 - delta;
    for c in c_grid() {
        let legal = minimal.partition_point(|&m| m <= c + SLACK);
        let fraction = legal as f64 / samples as f64;
        if fraction >= target {
            let (lo, hi) = wilson_interval(legal as u64, samples as u64, Z_TWO_SIDED_95);
            return Ok(CalibrationReport {
                delta,
                k,
                samples,
                c,
                fraction_legal: fraction,
                wilson_low: lo,
                wilson_high: hi,
            });
        }
    }
    Err(Error::NoConvergence("legality constant beyond grid"))
}
