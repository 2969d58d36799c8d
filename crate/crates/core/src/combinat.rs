//! Exhaustive path enumeration and pair-intersection counting on small `K_n`.
//!
//! Paths are undirected and stored once, oriented so that the first vertex is
//! smaller than the last. Pair counts are over *ordered* pairs of distinct
//! paths.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::theory::joint_weight_exact;
use crate::weights::EdgeWeights;

/// Largest `n` accepted by the exhaustive enumerators.
pub const MAX_ENUMERATION_N: usize = 10;
/// Ordered pairs examined by [`count_pairs`] before it refuses.
pub const MAX_PAIR_WORK: u128 = 400_000_000;
/// Paths examined by [`count_pairs_by_symmetry`] before it refuses.
pub const MAX_SYMMETRY_PATHS: u128 = 20_000_000;

/// Number of undirected `k`-edge paths in `K_n`: `(n)_{k+1} / 2`.
pub fn path_count(n: usize, k: usize) -> u128 {
    if k == 0 || k >= n {
        return 0;
    }
    (0..=k).map(|r| (n - r) as u128).product::<u128>() / 2
}

/// Flat list of equal-length vertex sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathList {
    k: usize,
    vertices: Vec<u8>,
}

impl PathList {
    pub fn edges_per_path(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.vertices.len() / (self.k + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn get(&self, idx: usize) -> &[u8] {
        &self.vertices[idx * (self.k + 1)..(idx + 1) * (self.k + 1)]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u8]> + '_ {
        self.vertices.chunks_exact(self.k + 1)
    }

    pub fn to_vecs(&self) -> Vec<Vec<usize>> {
        self.iter()
            .map(|p| p.iter().map(|&v| v as usize).collect())
            .collect()
    }
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if n < 2 || k < 1 || k >= n {
        return Err(domain("path length", format!("need 1 <= k <= n-1, got n = {n}, k = {k}")));
    }
    Ok(())
}

/// Visits every self-avoiding `k`-edge path of `K_n` once, in canonical
/// orientation (first vertex < last vertex), in lexicographic order.
pub fn for_each_path<F: FnMut(&[usize])>(n: usize, k: usize, mut visit: F) {
    fn extend<F: FnMut(&[usize])>(n: usize, k: usize, path: &mut Vec<usize>, used: &mut [bool], visit: &mut F) {
        if path.len() == k + 1 {
            if path[0] < path[k] {
                visit(path);
            }
            return;
        }
        for v in 0..n {
            if used[v] {
                continue;
            }
            // The last vertex must exceed the first.
            if path.len() == k && v < path[0] {
                continue;
            }
            used[v] = true;
            path.push(v);
            extend(n, k, path, used, visit);
            path.pop();
            used[v] = false;
        }
    }
    if k == 0 || k >= n {
        return;
    }
    let mut path = Vec::with_capacity(k + 1);
    let mut used = vec![false; n];
    for start in 0..n {
        used[start] = true;
        path.push(start);
        extend(n, k, &mut path, &mut used, &mut visit);
        path.pop();
        used[start] = false;
    }
}

/// All undirected `k`-edge paths of `K_n`, `n <= 10`.
pub fn enumerate_paths(n: usize, k: usize) -> Result<PathList> {
    check_nk(n, k)?;
    if n > MAX_ENUMERATION_N {
        return Err(Error::EnumerationLimit(format!(
            "path enumeration needs n <= {MAX_ENUMERATION_N}, got {n}"
        )));
    }
    let mut vertices = Vec::with_capacity(path_count(n, k) as usize * (k + 1));
    for_each_path(n, k, |p| vertices.extend(p.iter().map(|&v| v as u8)));
    Ok(PathList { k, vertices })
}

/// `i` shared edges forming `j` edge-components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PairIntersectionProfile {
    pub shared_edges: u32,
    pub components: u32,
}

fn canonical(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Shared edges of `p` and `q` and the number of connected components they
/// form. `P ∩ Q` is a subgraph of the path `P`, so its edge-components are
/// the maximal runs of consecutive shared edges along `P`; isolated shared
/// vertices are ignored.
pub fn intersection_profile(p: &[usize], q: &[usize]) -> PairIntersectionProfile {
    let mut q_edges: Vec<(usize, usize)> = q.windows(2).map(|e| canonical(e[0], e[1])).collect();
    q_edges.sort_unstable();
    let mut shared = 0;
    let mut components = 0;
    let mut in_run = false;
    for e in p.windows(2) {
        if q_edges.binary_search(&canonical(e[0], e[1])).is_ok() {
            shared += 1;
            if !in_run {
                components += 1;
            }
            in_run = true;
        } else {
            in_run = false;
        }
    }
    PairIntersectionProfile {
        shared_edges: shared,
        components,
    }
}

/// Counts `N_{k,i,j}` together with the pairs that share no edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairCountTable {
    pub n: usize,
    pub k: usize,
    /// `(i, j) -> N_{k,i,j}` over ordered pairs of distinct paths, `i >= 1`.
    pub counts: BTreeMap<(u32, u32), u128>,
    /// Ordered pairs with no common vertex.
    pub vertex_disjoint: u128,
    /// Ordered pairs with common vertices but no common edge.
    pub vertex_only: u128,
    /// All ordered pairs of distinct paths.
    pub total_ordered: u128,
}

impl PairCountTable {
    pub fn get(&self, i: u32, j: u32) -> u128 {
        self.counts.get(&(i, j)).copied().unwrap_or(0)
    }

    pub fn intersecting(&self) -> u128 {
        self.counts.values().sum()
    }
}

fn edge_index(n: usize, a: usize, b: usize) -> usize {
    let (u, v) = canonical(a, b);
    u * n + v
}

struct MaskedPath {
    vertex_mask: u128,
    edge_mask: u128,
    edge_bits: Vec<u128>,
}

/// Bit masks for `n <= 10`: edges as `u * n + v < 100`, vertices as bits.
fn masked(n: usize, p: &[u8]) -> MaskedPath {
    let mut vertex_mask = 0u128;
    for &v in p {
        vertex_mask |= 1u128 << v;
    }
    let edge_bits: Vec<u128> = p
        .windows(2)
        .map(|e| 1u128 << edge_index(n, e[0] as usize, e[1] as usize))
        .collect();
    MaskedPath {
        vertex_mask,
        edge_mask: edge_bits.iter().fold(0, |a, b| a | b),
        edge_bits,
    }
}

fn runs_in(edge_bits: &[u128], shared: u128) -> u32 {
    let mut runs = 0;
    let mut in_run = false;
    for &b in edge_bits {
        if b & shared != 0 {
            if !in_run {
                runs += 1;
            }
            in_run = true;
        } else {
            in_run = false;
        }
    }
    runs
}

/// Brute-force `N_{k,i,j}` over every ordered pair of distinct paths.
pub fn count_pairs(n: usize, k: usize) -> Result<PairCountTable> {
    let paths = enumerate_paths(n, k)?;
    let count = paths.len() as u128;
    if count * count > MAX_PAIR_WORK {
        return Err(Error::EnumerationLimit(format!(
            "{count} paths give {} ordered pairs, limit {MAX_PAIR_WORK}",
            count * count
        )));
    }
    let masks: Vec<MaskedPath> = paths.iter().map(|p| masked(n, p)).collect();
    let mut counts = BTreeMap::new();
    let mut vertex_disjoint = 0;
    let mut vertex_only = 0;
    for (a, pa) in masks.iter().enumerate() {
        for (b, pb) in masks.iter().enumerate() {
            if a == b {
                continue;
            }
            let shared = pa.edge_mask & pb.edge_mask;
            if shared == 0 {
                if pa.vertex_mask & pb.vertex_mask == 0 {
                    vertex_disjoint += 1;
                } else {
                    vertex_only += 1;
                }
                continue;
            }
            let i = shared.count_ones();
            let j = runs_in(&pa.edge_bits, shared);
            *counts.entry((i, j)).or_insert(0) += 1;
        }
    }
    Ok(PairCountTable {
        n,
        k,
        counts,
        vertex_disjoint,
        vertex_only,
        total_ordered: count * (count - 1),
    })
}

/// `N_{k,i,j}` from a single reference path: every path looks the same up to
/// relabelling, so the count equals `#paths` times the number of partners of
/// `0-1-...-k`. Handles `n` far beyond the exhaustive limit.
pub fn count_pairs_by_symmetry(n: usize, k: usize) -> Result<PairCountTable> {
    check_nk(n, k)?;
    let paths = path_count(n, k);
    if paths > MAX_SYMMETRY_PATHS {
        return Err(Error::EnumerationLimit(format!(
            "{paths} paths exceed the limit {MAX_SYMMETRY_PATHS}"
        )));
    }
    let reference: Vec<usize> = (0..=k).collect();
    let mut partner_counts: BTreeMap<(u32, u32), u128> = BTreeMap::new();
    let mut vertex_disjoint = 0u128;
    let mut vertex_only = 0u128;
    for_each_path(n, k, |q| {
        if q == reference.as_slice() {
            return;
        }
        let profile = intersection_profile(&reference, q);
        if profile.shared_edges == 0 {
            if q.iter().any(|&v| v <= k) {
                vertex_only += 1;
            } else {
                vertex_disjoint += 1;
            }
        } else {
            *partner_counts
                .entry((profile.shared_edges, profile.components))
                .or_insert(0) += 1;
        }
    });
    Ok(PairCountTable {
        n,
        k,
        counts: partner_counts
            .into_iter()
            .map(|(key, c)| (key, c * paths))
            .collect(),
        vertex_disjoint: vertex_disjoint * paths,
        vertex_only: vertex_only * paths,
        total_ordered: paths * (paths - 1),
    })
}

fn binomial(n: i64, r: i64) -> Option<u128> {
    if r < 0 || n < 0 || r > n {
        return Some(0);
    }
    let r = r.min(n - r) as u128;
    let n = n as u128;
    let mut acc: u128 = 1;
    for t in 0..r {
        acc = acc.checked_mul(n - t)? / (t + 1);
    }
    Some(acc)
}

fn factorial(n: i64) -> Option<u128> {
    if n < 0 {
        return Some(0);
    }
    (1..=n as u128).try_fold(1u128, |a, b| a.checked_mul(b))
}

/// The count bound built in the pair-counting argument:
/// `C(n,k+1)(k+1)! C(i+j,j) C(k-i+1,j)` choices for `P` and its shared
/// pieces, times `j! C(n-i-j, k+1-i-j) (k+1-i-j)! C(k-i-j+1, j)` for `Q`.
/// Undefined binomials are 0. Exact while the product fits in 128 bits.
pub fn counting_formula_upper(n: usize, k: usize, i: usize, j: usize) -> f64 {
    let (n, k, i, j) = (n as i64, k as i64, i as i64, j as i64);
    let factors = [
        binomial(n, k + 1),
        factorial(k + 1),
        binomial(i + j, j),
        binomial(k - i + 1, j),
        factorial(j),
        binomial(n - i - j, k + 1 - i - j),
        factorial(k + 1 - i - j),
        binomial(k - i - j + 1, j),
    ];
    if factors.iter().any(|f| *f == Some(0)) {
        return 0.0;
    }
    let exact = factors
        .iter()
        .try_fold(1u128, |acc, f| f.and_then(|f| acc.checked_mul(f)));
    match exact {
        Some(v) => v as f64,
        None => factors
            .iter()
            .map(|f| f.map(|f| f as f64).unwrap_or(f64::INFINITY))
            .product(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaEntry {
    pub i: u32,
    pub j: u32,
    pub count: u128,
    /// Joint probability that both paths of such a pair are light.
    pub q: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaTable {
    pub n: usize,
    pub k: usize,
    pub eps: f64,
    /// Internal-scale weight threshold `(1-eps) ln n / n`.
    pub threshold: f64,
    pub entries: Vec<DeltaEntry>,
    pub total_single_component: f64,
    pub total_multi_component: f64,
}

impl DeltaTable {
    pub fn total(&self) -> f64 {
        self.total_single_component + self.total_multi_component
    }
}

/// `Delta_{i,j} = N_{k,i,j} * P(both light)` for all profiles, where the
/// joint probability depends only on `(k, i)`.
pub fn delta_exact_small(n: usize, k: usize, eps: f64) -> Result<DeltaTable> {
    if !(0.0..1.0).contains(&eps) {
        return Err(domain("eps", format!("{eps} not in [0, 1)")));
    }
    let table = count_pairs_by_symmetry(n, k)?;
    let nf = n as f64;
    let threshold = (1.0 - eps) * nf.ln() / nf;
    let mut entries = Vec::new();
    let mut single = 0.0;
    let mut multi = 0.0;
    for (&(i, j), &count) in &table.counts {
        // Paths sharing all k edges coincide, so i < k here.
        let q = joint_weight_exact(k as u32, i, threshold)?;
        let delta = count as f64 * q;
        if j == 1 {
            single += delta;
        } else {
            multi += delta;
        }
        entries.push(DeltaEntry { i, j, count, q, delta });
    }
    Ok(DeltaTable {
        n,
        k,
        eps,
        threshold,
        entries,
        total_single_component: single,
        total_multi_component: multi,
    })
}

/// Every undirected `k`-edge path of weight at most `threshold`, found by
/// depth-first search with weight pruning (weights are nonnegative).
pub fn light_paths<W: EdgeWeights>(n: usize, k: usize, threshold: f64, weights: &W) -> Vec<Vec<usize>> {
    fn extend<W: EdgeWeights>(
        n: usize,
        k: usize,
        threshold: f64,
        weights: &W,
        path: &mut Vec<usize>,
        used: &mut [bool],
        acc: f64,
        out: &mut Vec<Vec<usize>>,
    ) {
        let last = *path.last().expect("nonempty");
        for v in 0..n {
            if used[v] {
                continue;
            }
            if path.len() == k && v < path[0] {
                continue;
            }
            let w = acc + weights.weight(last, v);
            if w > threshold {
                continue;
            }
            if path.len() == k {
                let mut p = path.clone();
                p.push(v);
                out.push(p);
                continue;
            }
            used[v] = true;
            path.push(v);
            extend(n, k, threshold, weights, path, used, w, out);
            path.pop();
            used[v] = false;
        }
    }
    let mut out = Vec::new();
    if k == 0 || k >= n {
        return out;
    }
    let mut used = vec![false; n];
    let mut path = Vec::with_capacity(k + 1);
    for start in 0..n {
        used[start] = true;
        path.push(start);
        extend(n, k, threshold, weights, &mut path, &mut used, 0.0, &mut out);
        path.pop();
        used[start] = false;
    }
    out
}

/// Ordered pairs of distinct light paths sharing at least one edge.
pub fn intersecting_ordered_pairs(paths: &[Vec<usize>]) -> u64 {
    let mut count = 0;
    for (a, p) in paths.iter().enumerate() {
        for q in &paths[a + 1..] {
            if intersection_profile(p, q).shared_edges > 0 {
                count += 2;
            }
        }
    }
    count
}
