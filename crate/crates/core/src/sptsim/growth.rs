use rand::Rng;
use rand_distr::Exp1;

/// Distribution-level simulation of shortest path tree growth on `K_n`.
///
/// With mean-1 edge weights the `k`-th interarrival time is exponential with
/// rate `k (n - k)`, and the `k`-th newcomer (vertex index `k`, the root being
/// 0) attaches to a uniform vertex among the `k` already present.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthTrace {
    n: usize,
    interarrival: Vec<f64>,
    attach_to: Vec<u32>,
    arrival_times: Vec<f64>,
    complete: bool,
}

impl GrowthTrace {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `tau_k` for `k = 1, 2, ...` at index `k - 1`.
    pub fn interarrival(&self) -> &[f64] {
        &self.interarrival
    }

    /// Parent (by arrival index) of the vertex arriving at step `k`, at
    /// index `k - 1`.
    pub fn attach_to(&self) -> &[u32] {
        &self.attach_to
    }

    /// `t_k = tau_1 + ... + tau_k`, strictly increasing.
    pub fn arrival_times(&self) -> &[f64] {
        &self.arrival_times
    }

    /// False when the simulation stopped at a horizon before reaching `n`
    /// vertices.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// Vertices present at time `t`: `1 + #{k : t_k <= t}`.
    ///
    /// For a trace cut at horizon `h`, exact whenever `t <= h`.
    pub fn size_at_time(&self, t: f64) -> usize {
        1 + self.arrival_times.partition_point(|&tk| tk <= t)
    }

    /// Hop depth of every vertex of the recorded tree, in arrival order.
    pub fn depths(&self) -> Vec<u32> {
        depths_from_attachments(&self.attach_to)
    }
}

/// Tree height plus the depth of every node.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeShape {
    pub height: u32,
    pub depths: Vec<u32>,
}

pub fn depths_from_attachments(attach_to: &[u32]) -> Vec<u32> {
    let mut depth = Vec::with_capacity(attach_to.len() + 1);
    depth.push(0);
    for &p in attach_to {
        let d = depth[p as usize] + 1;
        depth.push(d);
    }
    depth
}

/// Anything with a root and per-vertex hop depths.
pub trait RootedTree {
    fn shape(&self) -> TreeShape;
}

impl RootedTree for GrowthTrace {
    fn shape(&self) -> TreeShape {
        let depths = self.depths();
        let height = depths.iter().copied().max().unwrap_or(0);
        TreeShape { height, depths }
    }
}

impl RootedTree for super::ShortestPathTree {
    fn shape(&self) -> TreeShape {
        let depths: Vec<u32> = self
            .arrival_order()
            .iter()
            .map(|&v| self.depth(v as usize).unwrap_or(0))
            .collect();
        TreeShape {
            height: self.height(),
            depths,
        }
    }
}

/// Height and depth array of a rooted tree.
pub fn height_and_depths<T: RootedTree>(tree: &T) -> TreeShape {
    tree.shape()
}

fn grow<R: Rng + ?Sized>(n: usize, horizon: f64, rng: &mut R) -> GrowthTrace {
    assert!(n >= 2, "growth needs n >= 2");
    let mut interarrival = Vec::new();
    let mut attach_to = Vec::new();
    let mut arrival_times = Vec::new();
    let mut t = 0.0;
    let mut complete = true;
    for k in 1..n {
        let rate = (k as f64) * ((n - k) as f64);
        let tau: f64 = rng.sample::<f64, _>(Exp1) / rate;
        t += tau;
        interarrival.push(tau);
        attach_to.push(rng.random_range(0..k as u32));
        arrival_times.push(t);
        if t > horizon && k < n - 1 {
            complete = false;
            break;
        }
    }
    GrowthTrace {
        n,
        interarrival,
        attach_to,
        arrival_times,
        complete,
    }
}

/// Full growth trace up to `n` vertices.
pub fn simulate_growth<R: Rng + ?Sized>(n: usize, rng: &mut R) -> GrowthTrace {
    grow(n, f64::INFINITY, rng)
}

/// Growth trace stopped at the first arrival after `horizon` (internal
/// scale). Sizes are exact for times up to the horizon.
pub fn simulate_growth_until<R: Rng + ?Sized>(n: usize, horizon: f64, rng: &mut R) -> GrowthTrace {
    grow(n, horizon, rng)
}

/// Time at which the tree first holds `m` vertices (`t_{m-1}`), sampled
/// without recording attachments. `P(|SPT(t)| >= m) = P(t_{m-1} <= t)`.
pub fn time_to_reach<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> f64 {
    assert!(m >= 1 && m <= n);
    let mut t = 0.0;
    for k in 1..m {
        let rate = (k as f64) * ((n - k) as f64);
        t += rng.sample::<f64, _>(Exp1) / rate;
    }
    t
}

/// Height of a random recursive tree on `m` nodes; `depth` is scratch space.
pub fn rrt_height<R: Rng + ?Sized>(m: usize, rng: &mut R, depth: &mut Vec<u32>) -> u32 {
    assert!(m >= 1);
    depth.clear();
    depth.push(0);
    let mut height = 0;
    for k in 1..m as u32 {
        let d = depth[rng.random_range(0..k) as usize] + 1;
        height = height.max(d);
        depth.push(d);
    }
    height
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sizes_at_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let trace = simulate_growth(50, &mut rng);
        assert!(trace.is_complete());
        assert_eq!(trace.size_at_time(0.0), 1);
        assert_eq!(trace.size_at_time(*trace.arrival_times().last().unwrap()), 50);
        let mut last = 0;
        for step in 0..200 {
            let s = trace.size_at_time(step as f64 * 0.01);
            assert!(s >= last);
            last = s;
        }
    }

    #[test]
    fn trace_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let trace = simulate_growth(300, &mut rng);
        assert_eq!(trace.interarrival().len(), 299);
        assert!(trace.interarrival().iter().all(|&t| t > 0.0));
        assert!(trace.arrival_times().windows(2).all(|w| w[0] < w[1]));
        for (k, &p) in trace.attach_to().iter().enumerate() {
            assert!((p as usize) <= k);
        }
    }

    #[test]
    fn horizon_cut_is_exact_below_horizon() {
        let full = simulate_growth(1000, &mut ChaCha8Rng::seed_from_u64(3));
        let cut = simulate_growth_until(1000, 0.004, &mut ChaCha8Rng::seed_from_u64(3));
        assert!(!cut.is_complete());
        for t in [0.0, 0.001, 0.002, 0.004] {
            assert_eq!(full.size_at_time(t), cut.size_at_time(t));
        }
    }

    #[test]
    fn shapes() {
        let single = GrowthTrace {
            n: 1,
            interarrival: vec![],
            attach_to: vec![],
            arrival_times: vec![],
            complete: true,
        };
        assert_eq!(height_and_depths(&single).height, 0);
        let line = GrowthTrace {
            n: 6,
            interarrival: vec![1.0; 5],
            attach_to: vec![0, 1, 2, 3, 4],
            arrival_times: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            complete: true,
        };
        let shape = height_and_depths(&line);
        assert_eq!(shape.height, 5);
        assert_eq!(shape.depths, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn rrt_height_matches_trace_height() {
        let mut scratch = Vec::new();
        let h = rrt_height(1, &mut ChaCha8Rng::seed_from_u64(0), &mut scratch);
        assert_eq!(h, 0);
        let h = rrt_height(2, &mut ChaCha8Rng::seed_from_u64(0), &mut scratch);
        assert_eq!(h, 1);
    }
}
