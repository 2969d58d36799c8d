use crate::error::{domain, Result};
use crate::weights::EdgeWeights;

/// Self-avoiding path `v_1, ..., v_{k+1}` with its edge weights.
///
/// The trivial path (a single vertex, no edges, weight 0) is allowed so that
/// `P_ii` can be represented.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    vertices: Vec<usize>,
    edge_weights: Vec<f64>,
    weight: f64,
}

fn check_self_avoiding(vertices: &[usize]) -> Result<()> {
    if vertices.is_empty() {
        return Err(domain("path", "no vertices"));
    }
    let mut sorted = vertices.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(domain("path", format!("{vertices:?} revisits a vertex")));
    }
    Ok(())
}

impl PathRecord {
    pub fn trivial(vertex: usize) -> Self {
        Self {
            vertices: vec![vertex],
            edge_weights: Vec::new(),
            weight: 0.0,
        }
    }

    /// Reads each edge weight from `weights`.
    pub fn from_weights<W: EdgeWeights>(vertices: Vec<usize>, weights: &W) -> Result<Self> {
        check_self_avoiding(&vertices)?;
        let edge_weights: Vec<f64> = vertices
            .windows(2)
            .map(|e| weights.weight(e[0], e[1]))
            .collect();
        let weight = edge_weights.iter().sum();
        Ok(Self {
            vertices,
            edge_weights,
            weight,
        })
    }

    pub fn with_edge_weights(vertices: Vec<usize>, edge_weights: Vec<f64>) -> Result<Self> {
        check_self_avoiding(&vertices)?;
        if edge_weights.len() + 1 != vertices.len() {
            return Err(domain(
                "path",
                format!(
                    "{} vertices need {} edge weights, got {}",
                    vertices.len(),
                    vertices.len() - 1,
                    edge_weights.len()
                ),
            ));
        }
        let weight = edge_weights.iter().sum();
        Ok(Self {
            vertices,
            edge_weights,
            weight,
        })
    }

    /// Tree paths keep the tree's distance as their cached weight.
    pub(crate) fn from_tree<W: EdgeWeights>(vertices: Vec<usize>, dist: f64, weights: &W) -> Self {
        let edge_weights = vertices
            .windows(2)
            .map(|e| weights.weight(e[0], e[1]))
            .collect();
        Self {
            vertices,
            edge_weights,
            weight: dist,
        }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn edge_weights(&self) -> &[f64] {
        &self.edge_weights
    }

    /// Number of edges `k`.
    pub fn edges(&self) -> usize {
        self.edge_weights.len()
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn reversed(&self) -> Self {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        let mut edge_weights = self.edge_weights.clone();
        edge_weights.reverse();
        Self {
            vertices,
            edge_weights,
            weight: self.weight,
        }
    }
}
