use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{blossom::min_weight_perfect_matching, edge_weight, quantize, MatchingError, MatchingGraph};
use crate::sampler::DetectionTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    Standard,
    /// Two passes: edges whose decomposition siblings were used in the
    /// first matching are made cheaper for the second. A basic variant,
    /// not a reproduction of any particular tuned decoder.
    Correlated,
}

impl DecoderKind {
    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Standard => "standard",
            DecoderKind::Correlated => "correlated",
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecoderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "standard" => Ok(DecoderKind::Standard),
            "correlated" => Ok(DecoderKind::Correlated),
            _ => Err(format!("unknown decoder {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Decoded {
    /// Predicted observable flips.
    pub observables: u64,
    /// Total matched weight in quantized units.
    pub weight: i64,
    /// Matched pairs of detection events; None marks the boundary.
    pub pairs: Vec<(u32, Option<u32>)>,
}

const UNREACHED: i64 = i64::MAX;
const NO_EDGE: usize = usize::MAX;

/// Reusable decoding state for one graph. Scratch arrays are reset
/// lazily with an epoch counter.
pub struct Decoder<'g> {
    graph: &'g MatchingGraph,
    dist: Vec<i64>,
    mask: Vec<u64>,
    pred: Vec<usize>,
    seen: Vec<u32>,
    done: Vec<u32>,
    wanted: Vec<u32>,
    epoch: u32,
    heap: BinaryHeap<Reverse<(i64, u32)>>,
}

impl<'g> Decoder<'g> {
    pub fn new(graph: &'g MatchingGraph) -> Self {
        let n = graph.num_nodes + 1;
        Decoder {
            graph,
            dist: vec![0; n],
            mask: vec![0; n],
            pred: vec![NO_EDGE; n],
            seen: vec![0; n],
            done: vec![0; n],
            wanted: vec![0; n],
            epoch: 0,
            heap: BinaryHeap::new(),
        }
    }

    fn boundary(&self) -> usize {
        self.graph.num_nodes
    }

    fn dist_to(&self, v: usize) -> i64 {
        if self.done[v] == self.epoch {
            self.dist[v]
        } else {
            UNREACHED
        }
    }

    /// Dijkstra from `source` until every node in `targets` (and the
    /// boundary, if `boundary`) is settled, or the frontier passes
    /// `limit`. `source` may be the boundary node. Paths never pass
    /// through the boundary.
    fn search(&mut self, source: usize, weights: &[i64], targets: &[u32], boundary: bool, limit: i64) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.seen.fill(0);
            self.done.fill(0);
            self.wanted.fill(0);
            self.epoch = 1;
        }
        let epoch = self.epoch;
        let bnd = self.boundary();
        let mut left = 0;
        for &t in targets {
            if self.wanted[t as usize] != epoch {
                self.wanted[t as usize] = epoch;
                left += 1;
            }
        }
        if boundary && self.graph.has_boundary() && self.wanted[bnd] != epoch {
            self.wanted[bnd] = epoch;
            left += 1;
        }
        if left == 0 {
            return;
        }
        self.heap.clear();
        let s = source;
        self.seen[s] = epoch;
        self.dist[s] = 0;
        self.mask[s] = 0;
        self.pred[s] = NO_EDGE;
        self.heap.push(Reverse((0, source as u32)));
        while let Some(Reverse((d, u))) = self.heap.pop() {
            let u = u as usize;
            if self.done[u] == epoch || d > self.dist[u] {
                continue;
            }
            if d > limit {
                break;
            }
            self.done[u] = epoch;
            if self.wanted[u] == epoch {
                left -= 1;
                if left == 0 {
                    break;
                }
            }
            let incident = if u == bnd {
                if s != bnd {
                    continue;
                }
                self.graph.boundary_edges()
            } else {
                self.graph.incident(u as u32)
            };
            for &e in incident {
                let edge = &self.graph.edges[e];
                let v = match edge.b {
                    None if u == bnd => edge.a as usize,
                    None => bnd,
                    Some(b) if b as usize == u => edge.a as usize,
                    Some(b) if edge.a as usize == u => b as usize,
                    Some(_) => unreachable!(),
                };
                if self.done[v] == epoch {
                    continue;
                }
                let nd = d + weights[e];
                if self.seen[v] != epoch || nd < self.dist[v] {
                    self.seen[v] = epoch;
                    self.dist[v] = nd;
                    self.mask[v] = self.mask[u] ^ edge.observables;
                    self.pred[v] = e;
                    self.heap.push(Reverse((nd, v as u32)));
                }
            }
        }
    }

    /// Minimum-weight matching of `events` (sorted or not; duplicates
    /// cancel) with the graph's own weights.
    pub fn decode(&mut self, events: &[u32]) -> Result<Decoded, MatchingError> {
        let graph = self.graph;
        self.decode_with(events, graph.quantized_weights())
    }

    fn decode_with(&mut self, events: &[u32], weights: &[i64]) -> Result<Decoded, MatchingError> {
        let mut ev: Vec<u32> = events.to_vec();
        ev.sort_unstable();
        let mut reduced: Vec<u32> = Vec::with_capacity(ev.len());
        for d in ev {
            if d as usize >= self.graph.num_nodes {
                return Err(MatchingError::UnknownDetector(d));
            }
            if reduced.last() == Some(&d) {
                reduced.pop();
            } else {
                reduced.push(d);
            }
        }
        let ev = reduced;
        let k = ev.len();
        if k == 0 {
            return Ok(Decoded::default());
        }
        let with_boundary = self.graph.has_boundary();
        let bnd = self.boundary();

        // Distances to the boundary from one search rooted there.
        let mut to_bnd = vec![(UNREACHED, 0u64); k];
        if with_boundary {
            self.search(bnd, weights, &ev, false, UNREACHED);
            for i in 0..k {
                let v = ev[i] as usize;
                to_bnd[i] = (self.dist_to(v), self.mask[v]);
            }
        }
        // suffix_max[i]: largest boundary distance among events i.. .
        let mut suffix_max = vec![0i64; k + 1];
        for i in (0..k).rev() {
            suffix_max[i] = suffix_max[i + 1].max(to_bnd[i].0);
        }

        // Pair edges, skipping pairs that are never better than sending
        // both ends to the boundary.
        let mut pair: Vec<(usize, usize, i64, u64)> = Vec::new();
        for i in 0..k {
            let limit = to_bnd[i].0.saturating_add(suffix_max[i + 1]);
            self.search(ev[i] as usize, weights, &ev[i + 1..], false, limit);
            for j in i + 1..k {
                let v = ev[j] as usize;
                let d = self.dist_to(v);
                if d == UNREACHED {
                    continue;
                }
                let (bi, bj) = (to_bnd[i].0, to_bnd[j].0);
                if bi != UNREACHED && bj != UNREACHED && d > bi + bj {
                    continue;
                }
                pair.push((i, j, d, self.mask[v]));
            }
        }

        // Event i has a boundary twin k + i. Twins are joined wherever
        // their events are, which is enough for twins of paired events
        // to pair up.
        let n = if with_boundary { 2 * k } else { k };
        let mut edges: Vec<(usize, usize, i64)> = pair.iter().map(|&(i, j, d, _)| (i, j, d)).collect();
        if with_boundary {
            for (i, b) in to_bnd.iter().enumerate() {
                if b.0 != UNREACHED {
                    edges.push((i, k + i, b.0));
                }
            }
            edges.extend(pair.iter().map(|&(i, j, _, _)| (k + i, k + j, 0)));
        }
        let mate = min_weight_perfect_matching(n, &edges).ok_or(MatchingError::Unmatchable)?;
        let mut out = Decoded::default();
        for i in 0..k {
            let m = mate[i];
            if m < k {
                if m > i {
                    let &(_, _, d, mask) = pair.iter().find(|q| q.0 == i && q.1 == m).expect("matched pair edge");
                    out.weight += d;
                    out.observables ^= mask;
                    out.pairs.push((ev[i], Some(ev[m])));
                }
            } else {
                let (d, mask) = to_bnd[i];
                out.weight += d;
                out.observables ^= mask;
                out.pairs.push((ev[i], None));
            }
        }
        Ok(out)
    }

    /// Graph edges along the shortest paths realizing `decoded`'s pairs.
    fn path_edges(&mut self, decoded: &Decoded, weights: &[i64]) -> Vec<usize> {
        let mut out = Vec::new();
        for &(a, b) in &decoded.pairs {
            let (targets, end) = match b {
                Some(b) => (vec![b], b as usize),
                None => (vec![], self.boundary()),
            };
            self.search(a as usize, weights, &targets, b.is_none(), UNREACHED);
            let mut v = end;
            while v != a as usize {
                let e = self.pred[v];
                out.push(e);
                let edge = &self.graph.edges[e];
                v = match edge.b {
                    None => edge.a as usize,
                    Some(b) if b as usize == v => edge.a as usize,
                    Some(b) => b as usize,
                };
            }
        }
        out
    }

    /// Standard matching, then a second matching in which the sibling
    /// pieces of every decomposed mechanism touching a used edge are
    /// reweighted by the conditional probability p_mechanism / p_edge.
    pub fn decode_correlated(&mut self, events: &[u32]) -> Result<Decoded, MatchingError> {
        let first = self.decode(events)?;
        if first.pairs.is_empty() {
            return Ok(first);
        }
        let mut weights = self.graph.quantized_weights().to_vec();
        let used = self.path_edges(&first, &weights);
        let mut changed = false;
        for e in used {
            let pe = self.graph.edges[e].probability;
            for sib in self.graph.siblings(e) {
                let w = quantize(edge_weight((sib.probability / pe).min(0.5)));
                for &o in &sib.edges {
                    if w < weights[o] {
                        weights[o] = w;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return Ok(first);
        }
        self.decode_with(events, &weights)
    }

    pub fn decode_kind(&mut self, kind: DecoderKind, events: &[u32]) -> Result<Decoded, MatchingError> {
        match kind {
            DecoderKind::Standard => self.decode(events),
            DecoderKind::Correlated => self.decode_correlated(events),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BatchResult {
    pub shots: usize,
    /// Shots where any tracked observable was mispredicted.
    pub errors: usize,
    /// Mispredictions per observable index.
    pub per_observable: Vec<usize>,
}

/// Decodes every shot of `table` and compares the prediction with the
/// recorded flips of the observables in `tracked` (a bit mask).
pub fn decode_batch(
    graph: &MatchingGraph,
    table: &DetectionTable,
    kind: DecoderKind,
    tracked: u64,
) -> Result<BatchResult, MatchingError> {
    if table.num_detectors != graph.num_nodes {
        return Err(MatchingError::DimensionMismatch {
            table: table.num_detectors,
            graph: graph.num_nodes,
        });
    }
    let mut decoder = Decoder::new(graph);
    let mut out = BatchResult {
        shots: table.shots,
        errors: 0,
        per_observable: vec![0; table.num_observables],
    };
    for shot in 0..table.shots {
        let predicted = decoder.decode_kind(kind, &table.fired(shot))?.observables;
        let wrong = (predicted ^ table.observable_mask(shot)) & tracked;
        if wrong != 0 {
            out.errors += 1;
        }
        for (k, count) in out.per_observable.iter_mut().enumerate() {
            *count += (wrong >> k & 1) as usize;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dem::DetectorErrorModel;

    fn graph(text: &str) -> MatchingGraph {
        MatchingGraph::from_dem(&DetectorErrorModel::parse(text).unwrap()).unwrap()
    }

    #[test]
    fn empty_and_single_edge() {
        let g = graph("error(0.1) D0 D1 L0\nerror(0.1) D1 D2\nerror(0.1) D0\nerror(0.1) D2\n");
        let mut dec = Decoder::new(&g);
        assert_eq!(dec.decode(&[]).unwrap(), Decoded::default());
        let d = dec.decode(&[0, 1]).unwrap();
        assert_eq!(d.observables, 1);
        assert_eq!(d.pairs, vec![(0, Some(1))]);
        let d = dec.decode(&[0]).unwrap();
        assert_eq!(d.pairs, vec![(0, None)]);
    }

    #[test]
    fn chain_prefers_cheaper_side() {
        // Boundary - 0 - 1 - 2 - 3 - boundary, flipping L0 on the left end.
        let g = graph("error(0.1) D0 L0\nerror(0.1) D0 D1\nerror(0.1) D1 D2\nerror(0.1) D2 D3\nerror(0.1) D3\n");
        let mut dec = Decoder::new(&g);
        assert_eq!(dec.decode(&[1]).unwrap().observables, 1);
        assert_eq!(dec.decode(&[2]).unwrap().observables, 0);
        assert_eq!(dec.decode(&[0, 3]).unwrap().observables, 1);
    }

    #[test]
    fn odd_events_without_boundary_fail() {
        let g = graph("error(0.1) D0 D1\nerror(0.1) D1 D2\n");
        assert_eq!(Decoder::new(&g).decode(&[1]), Err(MatchingError::Unmatchable));
        assert_eq!(Decoder::new(&g).decode(&[7]), Err(MatchingError::UnknownDetector(7)));
    }

    #[test]
    fn correlated_without_siblings_is_standard() {
        let g = graph("error(0.1) D0 D1 L0\nerror(0.2) D1 D2\nerror(0.05) D0\nerror(0.1) D2\n");
        let mut dec = Decoder::new(&g);
        for events in [vec![0], vec![0, 1], vec![1, 2], vec![0, 2], vec![0, 1, 2]] {
            assert_eq!(dec.decode(&events).unwrap(), dec.decode_correlated(&events).unwrap());
        }
    }

    #[test]
    fn correlated_pass_flips_pairing() {
        // Pairing 2-3 directly (flipping L0) loses to sending both to the
        // boundary, until the first pass matches 0-1, whose edge is partly
        // explained by the correlated mechanism {0,1} ^ {2,3}.
        let text = "error(0.39) D0 D1\n\
                    error(0.01) D0 D1 ^ D2 D3 L0\n\
                    error(0.11) D2\n\
                    error(0.11) D3\n\
                    error(0.001) D0\n\
                    error(0.001) D1\n";
        let g = graph(text);
        let mut dec = Decoder::new(&g);
        let events = [0, 1, 2, 3];
        let first = dec.decode(&events).unwrap();
        assert!(first.pairs.contains(&(2, None)));
        assert_eq!(first.observables, 0);
        let second = dec.decode_correlated(&events).unwrap();
        assert!(second.pairs.contains(&(2, Some(3))));
        assert_eq!(second.observables, 1);
    }
}
