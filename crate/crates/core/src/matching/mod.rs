//! Matching graphs built from graph-like detector error models, and a
//! minimum-weight perfect matching decoder over them.

mod blossom;
mod decoder;

use std::collections::HashMap;

use thiserror::Error;

use crate::dem::{xor_probability, DetectorErrorModel};

pub use blossom::{max_weight_matching, min_weight_perfect_matching};
pub use decoder::{decode_batch, BatchResult, Decoded, Decoder, DecoderKind};

/// Integer weight units per unit of log-likelihood weight. Matching runs
/// on these so that it is exact and ties break deterministically.
pub const WEIGHT_SCALE: f64 = 1048576.0;

#[derive(Debug, Error, PartialEq)]
pub enum MatchingError {
    #[error("error {0} has {1} detectors and no graph-like decomposition")]
    NotGraphlike(usize, usize),
    #[error("detection events cannot be paired: no boundary reachable")]
    Unmatchable,
    #[error("detector {0} is not a node of the matching graph")]
    UnknownDetector(u32),
    #[error("table has {table} detectors but the graph has {graph}")]
    DimensionMismatch { table: usize, graph: usize },
}

/// `ln((1 - p) / p)`, clamped to zero for p >= 1/2.
pub fn edge_weight(p: f64) -> f64 {
    if p >= 0.5 {
        0.0
    } else {
        ((1.0 - p) / p).ln()
    }
}

pub fn quantize(w: f64) -> i64 {
    (w * WEIGHT_SCALE).round() as i64
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchingEdge {
    pub a: u32,
    /// None for a boundary edge.
    pub b: Option<u32>,
    pub probability: f64,
    pub weight: f64,
    pub observables: u64,
    /// Mechanisms (indices into the DEM) contributing to this edge.
    pub sources: Vec<usize>,
}

/// A decomposed mechanism seen from one of its pieces: the mechanism's
/// probability and the edges of its other pieces.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Sibling {
    pub probability: f64,
    pub edges: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchingGraph {
    pub num_nodes: usize,
    pub num_observables: usize,
    pub edges: Vec<MatchingEdge>,
    /// Parallel edges whose observable masks disagreed; the more likely
    /// one was kept.
    pub conflicts: usize,
    boundary_edges: Vec<usize>,
    adjacency: Vec<Vec<usize>>,
    quantized: Vec<i64>,
    siblings: Vec<Vec<Sibling>>,
}

impl MatchingGraph {
    pub fn from_dem(dem: &DetectorErrorModel) -> Result<Self, MatchingError> {
        let mut index: HashMap<(u32, Option<u32>), usize> = HashMap::new();
        let mut edges: Vec<MatchingEdge> = Vec::new();
        let mut conflicts = 0;
        let mut add = |dets: &[u32], observables: u64, p: f64, source: usize| -> usize {
            let key = (dets[0], dets.get(1).copied());
            match index.get(&key) {
                Some(&e) => {
                    let edge = &mut edges[e];
                    if edge.observables == observables {
                        edge.probability = xor_probability(edge.probability, p);
                    } else {
                        conflicts += 1;
                        if p > edge.probability {
                            edge.probability = p;
                            edge.observables = observables;
                        }
                    }
                    edge.sources.push(source);
                    e
                }
                None => {
                    index.insert(key, edges.len());
                    edges.push(MatchingEdge {
                        a: key.0,
                        b: key.1,
                        probability: p,
                        weight: 0.0,
                        observables,
                        sources: vec![source],
                    });
                    edges.len() - 1
                }
            }
        };

        let mut decomposed = Vec::new();
        for (i, m) in dem.mechanisms.iter().enumerate() {
            if m.probability <= 0.0 || m.detectors.is_empty() {
                continue;
            }
            match &m.pieces {
                Some(pieces) => {
                    let ids: Vec<usize> = pieces
                        .iter()
                        .map(|piece| add(&piece.detectors, piece.observables, m.probability, i))
                        .collect();
                    decomposed.push((m.probability, ids));
                }
                None if m.detectors.len() <= 2 => {
                    add(&m.detectors, m.observables, m.probability, i);
                }
                None => return Err(MatchingError::NotGraphlike(i, m.detectors.len())),
            }
        }

        let mut adjacency = vec![Vec::new(); dem.num_detectors];
        for (e, edge) in edges.iter_mut().enumerate() {
            edge.weight = edge_weight(edge.probability);
            adjacency[edge.a as usize].push(e);
            if let Some(b) = edge.b {
                adjacency[b as usize].push(e);
            }
        }
        let mut siblings = vec![Vec::new(); edges.len()];
        for (p, ids) in decomposed {
            for (k, &e) in ids.iter().enumerate() {
                let others: Vec<usize> = ids
                    .iter()
                    .enumerate()
                    .filter(|&(j, &o)| j != k && o != e)
                    .map(|(_, &o)| o)
                    .collect();
                if !others.is_empty() {
                    siblings[e].push(Sibling { probability: p, edges: others });
                }
            }
        }
        let quantized = edges.iter().map(|e| quantize(e.weight)).collect();
        let boundary_edges = (0..edges.len()).filter(|&e| edges[e].b.is_none()).collect();
        Ok(MatchingGraph {
            num_nodes: dem.num_detectors,
            num_observables: dem.num_observables,
            edges,
            conflicts,
            boundary_edges,
            adjacency,
            quantized,
            siblings,
        })
    }

    /// Edges incident to `node`, boundary edges included.
    pub fn incident(&self, node: u32) -> &[usize] {
        &self.adjacency[node as usize]
    }

    /// Number of distinct detectors adjacent to `node`.
    pub fn degree(&self, node: u32) -> usize {
        let mut n: Vec<u32> = self.adjacency[node as usize]
            .iter()
            .filter_map(|&e| {
                let edge = &self.edges[e];
                edge.b.map(|b| if edge.a == node { b } else { edge.a })
            })
            .collect();
        n.sort_unstable();
        n.dedup();
        n.len()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.num_nodes as u32).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn has_boundary(&self) -> bool {
        !self.boundary_edges.is_empty()
    }

    /// Indices of the edges that end on the boundary.
    pub fn boundary_edges(&self) -> &[usize] {
        &self.boundary_edges
    }

    pub fn edge_between(&self, a: u32, b: Option<u32>) -> Option<usize> {
        let key = match b {
            Some(b) if b < a => (b, Some(a)),
            _ => (a, b),
        };
        self.adjacency
            .get(key.0 as usize)?
            .iter()
            .copied()
            .find(|&e| self.edges[e].a == key.0 && self.edges[e].b == key.1)
    }

    /// Integer weight used by the matcher.
    pub fn quantized_weight(&self, edge: usize) -> i64 {
        self.quantized[edge]
    }

    pub(crate) fn quantized_weights(&self) -> &[i64] {
        &self.quantized
    }

    pub(crate) fn siblings(&self, edge: usize) -> &[Sibling] {
        &self.siblings[edge]
    }
}
