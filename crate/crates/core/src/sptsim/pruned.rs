//! All-pairs statistics on the light-edge subgraph.
//!
//! Every edge of a shortest path weighs at most the path, hence at most the
//! weighted diameter. If Dijkstra restricted to edges of weight `<= tau`
//! reaches every vertex and finds diameter `D <= tau`, then every true
//! shortest path lies inside the subgraph and the restricted trees are the
//! exact ones. Otherwise `tau` is doubled and the run repeated.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::weights::EdgeWeights;

use super::tree::{HopStats, NO_VERTEX};

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    vertex: u32,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Compressed adjacency of the edges with weight at most `threshold`.
#[derive(Debug, Clone)]
pub struct LightEdgeGraph {
    n: usize,
    threshold: f64,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
}

impl LightEdgeGraph {
    pub fn build<W: EdgeWeights>(n: usize, source: &W, threshold: f64) -> Self {
        let mut lists: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for u in 0..n {
            for v in (u + 1)..n {
                let w = source.weight(u, v);
                if w <= threshold {
                    lists[u].push((v as u32, w));
                    lists[v].push((u as u32, w));
                }
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for list in &mut lists {
            // Same relaxation order as the dense scan for equal distances.
            list.sort_unstable_by_key(|e| e.0);
            for &(v, w) in list.iter() {
                targets.push(v);
                weights.push(w);
            }
            offsets.push(targets.len());
        }
        Self {
            n,
            threshold,
            offsets,
            targets,
            weights,
        }
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }
}

struct Scratch {
    dist: Vec<f64>,
    depth: Vec<u32>,
    parent_weight: Vec<f64>,
    done: Vec<bool>,
    heap: BinaryHeap<Entry>,
}

struct SourceSummary {
    reached: usize,
    height: u32,
    radius: f64,
    total_weight: f64,
}

fn run_source(g: &LightEdgeGraph, source: usize, s: &mut Scratch) -> SourceSummary {
    s.dist.fill(f64::INFINITY);
    s.depth.fill(NO_VERTEX);
    s.done.fill(false);
    s.heap.clear();
    s.dist[source] = 0.0;
    s.depth[source] = 0;
    s.parent_weight[source] = 0.0;
    s.heap.push(Entry {
        dist: 0.0,
        vertex: source as u32,
    });
    let mut summary = SourceSummary {
        reached: 0,
        height: 0,
        radius: 0.0,
        total_weight: 0.0,
    };
    while let Some(Entry { dist, vertex }) = s.heap.pop() {
        let u = vertex as usize;
        if s.done[u] || dist > s.dist[u] {
            continue;
        }
        s.done[u] = true;
        summary.reached += 1;
        summary.height = summary.height.max(s.depth[u]);
        summary.radius = dist;
        summary.total_weight += s.parent_weight[u];
        let next_depth = s.depth[u] + 1;
        for idx in g.offsets[u]..g.offsets[u + 1] {
            let v = g.targets[idx] as usize;
            if s.done[v] {
                continue;
            }
            let w = g.weights[idx];
            let candidate = dist + w;
            if candidate < s.dist[v] {
                s.dist[v] = candidate;
                s.depth[v] = next_depth;
                s.parent_weight[v] = w;
                s.heap.push(Entry {
                    dist: candidate,
                    vertex: v as u32,
                });
            }
        }
    }
    summary
}

fn try_threshold(g: &LightEdgeGraph) -> Option<HopStats> {
    let n = g.n;
    let mut s = Scratch {
        dist: vec![f64::INFINITY; n],
        depth: vec![NO_VERTEX; n],
        parent_weight: vec![0.0; n],
        done: vec![false; n],
        heap: BinaryHeap::with_capacity(n),
    };
    let first = run_source(g, 0, &mut s);
    if first.reached < n {
        return None;
    }
    let mut stats = HopStats {
        n,
        hops_12: s.depth[1],
        max_hops_from_1: first.height,
        max_hops_all_pairs: first.height,
        weight_12: s.dist[1],
        max_weight_from_1: first.radius,
        max_weight_all_pairs: first.radius,
        spt1_total_weight: first.total_weight,
    };
    for source in 1..n {
        let r = run_source(g, source, &mut s);
        if r.reached < n {
            return None;
        }
        stats.max_hops_all_pairs = stats.max_hops_all_pairs.max(r.height);
        stats.max_weight_all_pairs = stats.max_weight_all_pairs.max(r.radius);
    }
    (stats.max_weight_all_pairs <= g.threshold).then_some(stats)
}

/// Same result as [`super::all_pairs_hop_stats`] (up to exact distance ties),
/// computed on the light-edge subgraph. `initial_threshold` is in the weight
/// scale of `weights`.
pub fn all_pairs_hop_stats_pruned<W: EdgeWeights>(
    n: usize,
    weights: &W,
    initial_threshold: f64,
) -> HopStats {
    assert!(n >= 2);
    let mut threshold = initial_threshold.max(f64::MIN_POSITIVE);
    loop {
        let g = LightEdgeGraph::build(n, weights, threshold);
        if let Some(stats) = try_threshold(&g) {
            return stats;
        }
        if g.edge_count() == n * (n - 1) / 2 {
            // Complete already; the diameter check cannot fail for lack of edges.
            return try_threshold(&LightEdgeGraph::build(n, weights, f64::INFINITY))
                .expect("complete graph is connected");
        }
        threshold *= 2.0;
    }
}

/// Starting threshold for mean-1 exponential weights: a little above the
/// typical diameter `3 ln n / n`.
pub fn default_threshold(n: usize) -> f64 {
    let nf = n as f64;
    4.0 * nf.ln().max(1.0) / nf
}
