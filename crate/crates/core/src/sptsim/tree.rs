use serde::Serialize;

use crate::weights::{EdgeWeights, ResampledPath, WeightOracle};

use super::path::PathRecord;

/// Parent/depth marker for vertices outside the tree.
pub const NO_VERTEX: u32 = u32::MAX;

/// Single-source shortest path tree on `K_n`, possibly truncated at a
/// distance budget. Unreached vertices have infinite distance.
#[derive(Debug, Clone, PartialEq)]
pub struct ShortestPathTree {
    n: usize,
    source: usize,
    parent: Vec<u32>,
    dist: Vec<f64>,
    depth: Vec<u32>,
    arrival: Vec<u32>,
}

impl ShortestPathTree {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn source(&self) -> usize {
        self.source
    }

    /// Parent of `v`, `None` for the source and for unreached vertices.
    pub fn parent(&self, v: usize) -> Option<usize> {
        match self.parent[v] {
            NO_VERTEX => None,
            p => Some(p as usize),
        }
    }

    pub fn dist(&self, v: usize) -> f64 {
        self.dist[v]
    }

    pub fn distances(&self) -> &[f64] {
        &self.dist
    }

    /// Hop count from the source, `None` if unreached.
    pub fn depth(&self, v: usize) -> Option<u32> {
        match self.depth[v] {
            NO_VERTEX => None,
            d => Some(d),
        }
    }

    /// Vertices in the order Dijkstra settled them; starts with the source.
    pub fn arrival_order(&self) -> &[u32] {
        &self.arrival
    }

    pub fn contains(&self, v: usize) -> bool {
        self.depth[v] != NO_VERTEX
    }

    pub fn size(&self) -> usize {
        self.arrival.len()
    }

    pub fn height(&self) -> u32 {
        self.arrival
            .iter()
            .map(|&v| self.depth[v as usize])
            .max()
            .unwrap_or(0)
    }

    /// Largest distance among reached vertices.
    pub fn radius(&self) -> f64 {
        self.arrival
            .last()
            .map(|&v| self.dist[v as usize])
            .unwrap_or(0.0)
    }

    /// Vertex sequence from the source to `target`, or `None` if unreached.
    pub fn path_to(&self, target: usize) -> Option<Vec<usize>> {
        if !self.contains(target) {
            return None;
        }
        let mut out = vec![target];
        let mut v = target;
        while let Some(p) = self.parent(v) {
            out.push(p);
            v = p;
        }
        out.reverse();
        Some(out)
    }

    /// Height of the subtree of vertices at distance at most `budget`, for
    /// every prefix of the arrival order. Entry `r` is the height after `r + 1`
    /// arrivals; nondecreasing by construction.
    pub fn prefix_heights(&self) -> Vec<u32> {
        let mut best = 0;
        self.arrival
            .iter()
            .map(|&v| {
                best = best.max(self.depth[v as usize]);
                best
            })
            .collect()
    }

    /// Height of the truncation `SPT(budget)`, read off this tree. Exact when
    /// this tree was grown with a budget at least `budget`.
    pub fn height_within(&self, budget: f64) -> u32 {
        self.arrival
            .iter()
            .take_while(|&&v| self.dist[v as usize] <= budget)
            .map(|&v| self.depth[v as usize])
            .max()
            .unwrap_or(0)
    }

    /// Number of vertices at distance at most `t`.
    pub fn size_within(&self, t: f64) -> usize {
        self.arrival
            .partition_point(|&v| self.dist[v as usize] <= t)
    }

    /// Sum of tree edge weights, recomputed from the weight source.
    pub fn total_weight<W: EdgeWeights>(&self, weights: &W) -> f64 {
        self.arrival
            .iter()
            .skip(1)
            .map(|&v| {
                let v = v as usize;
                weights.weight(self.parent[v] as usize, v)
            })
            .sum()
    }
}

/// Dense-scan Dijkstra on the implicit complete graph, stopped once the next
/// vertex to settle lies beyond `budget`.
///
/// `O(n)` memory and `O(n * size)` weight evaluations. Ties in tentative
/// distance are settled lowest vertex index first; a vertex keeps its first
/// parent on equal relaxations.
pub fn dijkstra_truncated<W: EdgeWeights>(
    n: usize,
    source: usize,
    weights: &W,
    budget: f64,
) -> ShortestPathTree {
    assert!(n >= 1 && source < n, "source {source} out of range for n = {n}");
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![NO_VERTEX; n];
    let mut depth = vec![NO_VERTEX; n];
    let mut arrival = Vec::with_capacity(n);
    let mut open: Vec<u32> = (0..n as u32).filter(|&v| v as usize != source).collect();

    dist[source] = 0.0;
    depth[source] = 0;
    arrival.push(source as u32);
    let mut current = source;

    if budget >= 0.0 {
        loop {
            let base = dist[current];
            let next_depth = depth[current] + 1;
            let mut best = f64::INFINITY;
            let mut best_idx = usize::MAX;
            let mut best_vertex = u32::MAX;
            for (idx, &v) in open.iter().enumerate() {
                let vi = v as usize;
                let candidate = base + weights.weight(current, vi);
                if candidate < dist[vi] {
                    dist[vi] = candidate;
                    parent[vi] = current as u32;
                    depth[vi] = next_depth;
                }
                let d = dist[vi];
                if d < best || (d == best && v < best_vertex) {
                    best = d;
                    best_idx = idx;
                    best_vertex = v;
                }
            }
            if best_idx == usize::MAX || best > budget {
                break;
            }
            current = open.swap_remove(best_idx) as usize;
            arrival.push(current as u32);
        }
    }

    for &v in &open {
        let v = v as usize;
        dist[v] = f64::INFINITY;
        parent[v] = NO_VERTEX;
        depth[v] = NO_VERTEX;
    }

    ShortestPathTree {
        n,
        source,
        parent,
        dist,
        depth,
        arrival,
    }
}

/// Exact single-source shortest path tree.
pub fn dijkstra_spt<W: EdgeWeights>(n: usize, source: usize, weights: &W) -> ShortestPathTree {
    dijkstra_truncated(n, source, weights, f64::INFINITY)
}

/// Shortest path tree in `K_n^P` truncated at `time_budget`: edges of
/// `forbidden_path` read layer 1 of the oracle, all others layer 0.
pub fn spt_restricted(
    n: usize,
    source: usize,
    oracle: &WeightOracle,
    forbidden_path: &PathRecord,
    time_budget: f64,
) -> ShortestPathTree {
    let resampled = ResampledPath::from_oracle(oracle, forbidden_path.vertices());
    dijkstra_truncated(n, source, &resampled, time_budget)
}

/// Hop and weight statistics over all pairs, internal weight scale.
///
/// Vertex "1" and "2" of the classical statement are indices 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HopStats {
    pub n: usize,
    pub hops_12: u32,
    pub max_hops_from_1: u32,
    pub max_hops_all_pairs: u32,
    pub weight_12: f64,
    pub max_weight_from_1: f64,
    pub max_weight_all_pairs: f64,
    pub spt1_total_weight: f64,
}

/// Runs Dijkstra from every source. `O(n^3)` time, `O(n)` extra memory.
pub fn all_pairs_hop_stats<W: EdgeWeights>(n: usize, weights: &W) -> HopStats {
    assert!(n >= 2);
    let first = dijkstra_spt(n, 0, weights);
    let mut stats = HopStats {
        n,
        hops_12: first.depth[1],
        max_hops_from_1: first.height(),
        max_hops_all_pairs: first.height(),
        weight_12: first.dist[1],
        max_weight_from_1: first.radius(),
        max_weight_all_pairs: first.radius(),
        spt1_total_weight: first.total_weight(weights),
    };
    for source in 1..n {
        let tree = dijkstra_spt(n, source, weights);
        stats.max_hops_all_pairs = stats.max_hops_all_pairs.max(tree.height());
        stats.max_weight_all_pairs = stats.max_weight_all_pairs.max(tree.radius());
    }
    stats
}

/// Path from the tree's source to `target`. The source itself gives the
/// trivial path with no edges and weight 0.
pub fn extract_path<W: EdgeWeights>(
    tree: &ShortestPathTree,
    target: usize,
    weights: &W,
) -> Option<PathRecord> {
    let vertices = tree.path_to(target)?;
    Some(PathRecord::from_tree(vertices, tree.dist(target), weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{DenseWeights, WeightOracle};

    /// Floyd–Warshall on the explicit matrix, with hop counts of the
    /// lexicographically chosen paths ignored.
    fn floyd_warshall(n: usize, w: &DenseWeights) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; n]; n];
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    d[u][v] = w.weight(u, v);
                }
            }
        }
        for m in 0..n {
            for u in 0..n {
                for v in 0..n {
                    let via = d[u][m] + d[m][v];
                    if via < d[u][v] {
                        d[u][v] = via;
                    }
                }
            }
        }
        d
    }

    #[test]
    fn two_vertices() {
        let o = WeightOracle::exponential(11);
        let t = dijkstra_spt(2, 0, &o);
        assert_eq!(t.depth(0), Some(0));
        assert_eq!(t.depth(1), Some(1));
        assert_eq!(t.dist(1), o.weight(0, 1));
        assert_eq!(t.parent(1), Some(0));
        assert_eq!(t.parent(0), None);
    }

    #[test]
    fn matches_floyd_warshall_at_five() {
        for seed in 0..20 {
            let o = WeightOracle::exponential(seed);
            let dense = DenseWeights::from_weights(5, &o);
            let fw = floyd_warshall(5, &dense);
            for s in 0..5 {
                let t = dijkstra_spt(5, s, &o);
                for v in 0..5 {
                    assert!((t.dist(v) - fw[s][v]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn tree_consistency_at_thousand() {
        let o = WeightOracle::exponential(2024);
        let t = dijkstra_spt(1000, 17, &o);
        assert_eq!(t.size(), 1000);
        assert_eq!(t.dist(17), 0.0);
        for v in 0..1000 {
            if let Some(p) = t.parent(v) {
                assert_eq!(t.dist(v), t.dist(p) + o.weight(p, v));
                assert_eq!(t.depth(v).unwrap(), t.depth(p).unwrap() + 1);
            }
        }
        let order = t.arrival_order();
        for w in order.windows(2) {
            assert!(t.dist(w[0] as usize) <= t.dist(w[1] as usize));
        }
    }

    #[test]
    fn truncation() {
        let o = WeightOracle::exponential(5);
        let zero = dijkstra_truncated(50, 3, &o, 0.0);
        assert_eq!(zero.size(), 1);
        assert_eq!(zero.height(), 0);
        let full = dijkstra_spt(50, 3, &o);
        let budget = 0.05;
        let cut = dijkstra_truncated(50, 3, &o, budget);
        assert_eq!(cut.size(), full.size_within(budget));
        for v in 0..50 {
            if cut.contains(v) {
                assert!(cut.dist(v) <= budget);
                assert_eq!(cut.dist(v), full.dist(v));
                assert_eq!(cut.depth(v), full.depth(v));
            } else {
                assert!(full.dist(v) > budget);
            }
        }
        assert_eq!(cut.height(), full.height_within(budget));
    }

    #[test]
    fn restricted_with_empty_path_is_plain() {
        let o = WeightOracle::exponential(21);
        let trivial = PathRecord::trivial(4);
        let r = spt_restricted(60, 4, &o, &trivial, f64::INFINITY);
        assert_eq!(r, dijkstra_spt(60, 4, &o));
    }

    #[test]
    fn restricted_replays_identically() {
        let o = WeightOracle::exponential(99);
        let path = PathRecord::from_weights(vec![0, 5, 9, 13], &o).unwrap();
        for budget in [0.01, 0.05, 0.2] {
            let a = spt_restricted(50, 5, &o, &path, budget);
            let b = spt_restricted(50, 5, &o.clone(), &path.clone(), budget);
            assert_eq!(a.size(), b.size());
            assert_eq!(a, b);
        }
    }

    #[test]
    fn extract_paths() {
        let o = WeightOracle::exponential(7);
        let t = dijkstra_spt(200, 0, &o);
        let own = extract_path(&t, 0, &o).unwrap();
        assert_eq!(own.edges(), 0);
        assert_eq!(own.weight(), 0.0);
        for j in [1, 50, 199] {
            let p = extract_path(&t, j, &o).unwrap();
            assert_eq!(p.edges() as u32, t.depth(j).unwrap());
            let resummed: f64 = p.edge_weights().iter().sum();
            assert!((resummed - p.weight()).abs() < 1e-12);
            assert_eq!(p.vertices()[0], 0);
            assert_eq!(*p.vertices().last().unwrap(), j);
        }
    }

    #[test]
    fn hop_stats_ordering_and_symmetry() {
        let o = WeightOracle::exponential(31);
        let s = all_pairs_hop_stats(100, &o);
        assert!(s.hops_12 <= s.max_hops_from_1 && s.max_hops_from_1 <= s.max_hops_all_pairs);
        assert!(s.weight_12 <= s.max_weight_from_1 && s.max_weight_from_1 <= s.max_weight_all_pairs);
        let trees: Vec<_> = (0..100).map(|i| dijkstra_spt(100, i, &o)).collect();
        for i in 0..100 {
            for j in 0..100 {
                let (a, b) = (trees[i].dist(j), trees[j].dist(i));
                assert!((a - b).abs() <= 1e-9 * a.max(b).max(1e-300));
            }
        }
    }

    #[test]
    fn hop_stats_two_vertices() {
        let o = WeightOracle::exponential(8);
        let s = all_pairs_hop_stats(2, &o);
        assert_eq!((s.hops_12, s.max_hops_from_1, s.max_hops_all_pairs), (1, 1, 1));
        let w = o.weight(0, 1);
        assert_eq!(s.weight_12, w);
        assert_eq!(s.max_weight_all_pairs, w);
        assert_eq!(s.spt1_total_weight, w);
    }
}
