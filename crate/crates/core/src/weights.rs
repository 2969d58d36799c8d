//! Lazily evaluated edge weights for the implicit complete graph.
//!
//! Every weight is a pure function of `(seed, layer, edge)`: a 64-bit
//! avalanche finalizer turns the key into a uniform draw, which is then
//! pushed through the inverse exponential CDF. Nothing is materialized unless
//! a caller asks for a [`DenseWeights`] table.
//!
//! Internal weights are mean-1 exponentials. The classical model uses mean-`n`
//! weights; [`to_n_scale`] and [`to_internal_scale`] are the only
//! conversions between the two.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer. Bijective on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Maps 64 random bits onto the open interval (0, 1).
///
/// Uses the top 52 bits plus a half-step offset, so the result lies on the
/// grid `(j + 1/2) 2^-52` and is never 0 or 1. Both `u` and `1 - u` are then
/// exact, which keeps `-ln(1 - u)` finite and positive.
#[inline]
pub fn bits_to_open_unit(bits: u64) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 52) as f64;
    ((bits >> 12) as f64 + 0.5) * SCALE
}

/// Inverse CDF of the unit-rate exponential, `-ln(1 - u)`.
#[inline]
pub fn inverse_exponential_cdf(u: f64) -> f64 {
    -(-u).ln_1p()
}

/// Converts a mean-1 weight to the mean-`n` scale used in reports.
#[inline]
pub fn to_n_scale(weight: f64, n: usize) -> f64 {
    weight * n as f64
}

/// Converts a mean-`n` weight (or threshold) to the internal mean-1 scale.
#[inline]
pub fn to_internal_scale(weight: f64, n: usize) -> f64 {
    weight / n as f64
}

/// An undirected edge of `K_n`, stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeKey {
    u: u32,
    v: u32,
}

impl EdgeKey {
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidEdge(a, b));
        }
        Ok(Self::canonical(a, b))
    }

    #[inline]
    pub(crate) fn canonical(a: usize, b: usize) -> Self {
        debug_assert_ne!(a, b);
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        Self {
            u: u as u32,
            v: v as u32,
        }
    }

    pub fn u(&self) -> usize {
        self.u as usize
    }

    pub fn v(&self) -> usize {
        self.v as usize
    }

    #[inline]
    fn packed(&self) -> u64 {
        ((self.u as u64) << 32) | self.v as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightDistribution {
    ExponentialMean1,
    Uniform01,
    /// Exponential weights that share their uniform draw with `Uniform01`.
    CoupledExponential,
}

/// Deterministic source of edge weights.
///
/// Layer 0 holds the base weights. Layer 1 holds the independent copies used
/// for the edges of a distinguished path (the graph `K_n^P`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeightOracle {
    seed: u64,
    layer: u32,
    distribution: WeightDistribution,
    stream: u64,
}

impl WeightOracle {
    pub fn new(seed: u64, distribution: WeightDistribution) -> Self {
        Self::with_layer(seed, 0, distribution)
    }

    pub fn exponential(seed: u64) -> Self {
        Self::new(seed, WeightDistribution::ExponentialMean1)
    }

    pub fn with_layer(seed: u64, layer: u32, distribution: WeightDistribution) -> Self {
        let stream = mix64(mix64(seed) ^ (layer as u64 + 1).wrapping_mul(GOLDEN));
        Self {
            seed,
            layer,
            distribution,
            stream,
        }
    }

    /// Same seed and distribution, different layer.
    pub fn layer(&self, layer: u32) -> Self {
        Self::with_layer(self.seed, layer, self.distribution)
    }

    /// Same seed and layer, different distribution. Coupled and uniform
    /// oracles built this way share every uniform draw.
    pub fn with_distribution(&self, distribution: WeightDistribution) -> Self {
        Self::with_layer(self.seed, self.layer, distribution)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn layer_index(&self) -> u32 {
        self.layer
    }

    pub fn distribution(&self) -> WeightDistribution {
        self.distribution
    }

    #[inline]
    fn draw_key(&self, key: EdgeKey) -> f64 {
        bits_to_open_unit(mix64(self.stream ^ key.packed()))
    }

    pub fn uniform_draw(&self, key: EdgeKey) -> f64 {
        self.draw_key(key)
    }

    pub fn edge_weight(&self, key: EdgeKey) -> f64 {
        let u = self.draw_key(key);
        match self.distribution {
            WeightDistribution::Uniform01 => u,
            WeightDistribution::ExponentialMean1 | WeightDistribution::CoupledExponential => {
                inverse_exponential_cdf(u)
            }
        }
    }

    /// Checked lookup by endpoints.
    pub fn weight_of(&self, a: usize, b: usize) -> Result<f64> {
        Ok(self.edge_weight(EdgeKey::new(a, b)?))
    }
}

/// Anything that assigns a weight to every edge of `K_n`.
///
/// Callers guarantee `u != v`; implementations may assume it.
pub trait EdgeWeights: Sync {
    fn weight(&self, u: usize, v: usize) -> f64;
}

impl EdgeWeights for WeightOracle {
    #[inline]
    fn weight(&self, u: usize, v: usize) -> f64 {
        self.edge_weight(EdgeKey::canonical(u, v))
    }
}

impl<W: EdgeWeights + ?Sized> EdgeWeights for &W {
    #[inline]
    fn weight(&self, u: usize, v: usize) -> f64 {
        (**self).weight(u, v)
    }
}

/// Materialized symmetric weight matrix. Used by all-pairs runs, where each
/// weight is read `O(n)` times.
#[derive(Debug, Clone)]
pub struct DenseWeights {
    n: usize,
    data: Vec<f64>,
}

impl DenseWeights {
    pub fn from_weights<W: EdgeWeights>(n: usize, source: &W) -> Self {
        let mut data = vec![0.0; n * n];
        for u in 0..n {
            for v in (u + 1)..n {
                let w = source.weight(u, v);
                data[u * n + v] = w;
                data[v * n + u] = w;
            }
        }
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn row(&self, u: usize) -> &[f64] {
        &self.data[u * self.n..(u + 1) * self.n]
    }

    /// Multiplies every weight by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|w| w * factor).collect(),
        }
    }
}

impl EdgeWeights for DenseWeights {
    #[inline]
    fn weight(&self, u: usize, v: usize) -> f64 {
        self.data[u * self.n + v]
    }
}

fn path_edge_codes(vertices: &[usize]) -> Vec<u64> {
    let mut codes: Vec<u64> = vertices
        .windows(2)
        .map(|e| EdgeKey::canonical(e[0], e[1]).packed())
        .collect();
    codes.sort_unstable();
    codes
}

/// The graph `K_n^P`: edges of a path `P` read from a second weight source
/// (usually layer 1), every other edge from the base.
#[derive(Debug, Clone)]
pub struct ResampledPath<B, R> {
    base: B,
    resampled: R,
    path_edges: Vec<u64>,
}

impl<B: EdgeWeights, R: EdgeWeights> ResampledPath<B, R> {
    pub fn new(base: B, resampled: R, path_vertices: &[usize]) -> Self {
        Self {
            base,
            resampled,
            path_edges: path_edge_codes(path_vertices),
        }
    }
}

impl ResampledPath<WeightOracle, WeightOracle> {
    /// `K_n^P` built from an oracle: path edges draw from layer 1.
    pub fn from_oracle(oracle: &WeightOracle, path_vertices: &[usize]) -> Self {
        Self::new(*oracle, oracle.layer(1), path_vertices)
    }
}

impl<B: EdgeWeights, R: EdgeWeights> EdgeWeights for ResampledPath<B, R> {
    #[inline]
    fn weight(&self, u: usize, v: usize) -> f64 {
        let code = EdgeKey::canonical(u, v).packed();
        if self.path_edges.binary_search(&code).is_ok() {
            self.resampled.weight(u, v)
        } else {
            self.base.weight(u, v)
        }
    }
}

/// Base weights with a handful of edges overridden by fixed values.
#[derive(Debug, Clone)]
pub struct PlantedWeights<B> {
    base: B,
    planted: Vec<(u64, f64)>,
}

impl<B: EdgeWeights> PlantedWeights<B> {
    /// `weights[e]` is planted on the edge `(vertices[e], vertices[e + 1])`.
    pub fn along_path(base: B, vertices: &[usize], weights: &[f64]) -> Self {
        assert_eq!(vertices.len(), weights.len() + 1);
        let mut planted: Vec<(u64, f64)> = vertices
            .windows(2)
            .zip(weights)
            .map(|(e, &w)| (EdgeKey::canonical(e[0], e[1]).packed(), w))
            .collect();
        planted.sort_unstable_by_key(|p| p.0);
        Self { base, planted }
    }
}

impl<B: EdgeWeights> EdgeWeights for PlantedWeights<B> {
    #[inline]
    fn weight(&self, u: usize, v: usize) -> f64 {
        let code = EdgeKey::canonical(u, v).packed();
        match self.planted.binary_search_by_key(&code, |p| p.0) {
            Ok(idx) => self.planted[idx].1,
            Err(_) => self.base.weight(u, v),
        }
    }
}

/// Multiplies another weight source by a constant.
#[derive(Debug, Clone)]
pub struct ScaledWeights<W> {
    inner: W,
    factor: f64,
}

impl<W: EdgeWeights> ScaledWeights<W> {
    pub fn new(inner: W, factor: f64) -> Self {
        Self { inner, factor }
    }
}

impl<W: EdgeWeights> EdgeWeights for ScaledWeights<W> {
    #[inline]
    fn weight(&self, u: usize, v: usize) -> f64 {
        self.inner.weight(u, v) * self.factor
    }
}

/// Master seed plus trial index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSeed {
    pub master_seed: u64,
    pub trial_index: u64,
}

impl TrialSeed {
    pub fn new(master_seed: u64, trial_index: u64) -> Self {
        Self {
            master_seed,
            trial_index,
        }
    }

    pub fn derive(&self) -> u64 {
        derive_trial_seed(self.master_seed, self.trial_index)
    }
}

/// Per-trial seed. Injective in `trial_index` for a fixed master seed, since
/// it is a composition of bijections on `u64`.
pub fn derive_trial_seed(master_seed: u64, trial_index: u64) -> u64 {
    mix64(master_seed ^ mix64(trial_index.wrapping_mul(GOLDEN).wrapping_add(GOLDEN)))
}

/// Parses a seed given as decimal or `0x`-prefixed hexadecimal.
pub fn parse_seed(text: &str) -> Result<u64> {
    let t = text.trim();
    let parsed = if let Some(hex) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        u64::from_str_radix(&hex.replace('_', ""), 16)
    } else {
        t.replace('_', "").parse::<u64>()
    };
    parsed.map_err(|e| Error::InvalidConfig(format!("seed {text:?}: {e}")))
}
