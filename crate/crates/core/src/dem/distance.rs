//! Shortest undetectable logical error in the graph-like part of a model.

use std::collections::VecDeque;

use super::DetectorErrorModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distance {
    Exact(usize),
    /// No logical error with at most `n - 1` mechanisms exists.
    AtLeast(usize),
}

impl std::fmt::Display for Distance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Distance::Exact(n) => write!(f, "{n}"),
            Distance::AtLeast(n) => write!(f, ">={n}"),
        }
    }
}

/// Fewest graph-like mechanisms whose combined symptoms flip `observable`
/// but no detector.
///
/// Edges are the graph-like mechanisms plus the pieces of decomposed
/// ones, with a shared boundary node for single-detector edges. An
/// undetectable error is an edge set of even degree at every detector,
/// so the answer is the shortest closed walk that flips the observable
/// an odd number of times. Searches stop at `cap` edges.
pub fn circuit_distance(dem: &DetectorErrorModel, observable: usize, cap: usize) -> Distance {
    let k = observable;
    if k >= 64 {
        return Distance::AtLeast(cap + 1);
    }
    if dem
        .mechanisms
        .iter()
        .any(|m| m.detectors.is_empty() && m.observables >> k & 1 == 1)
    {
        return Distance::Exact(1);
    }
    let boundary = dem.num_detectors;
    let n = dem.num_detectors + 1;
    let mut adj: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n];
    let mut add = |dets: &[u32], mask: u64| {
        let (a, b) = match dets {
            [a] => (*a as usize, boundary),
            [a, b] => (*a as usize, *b as usize),
            _ => return,
        };
        if !adj[a].contains(&(b, mask)) {
            adj[a].push((b, mask));
            adj[b].push((a, mask));
        }
    };
    for m in &dem.mechanisms {
        match &m.pieces {
            Some(pieces) => {
                for p in pieces {
                    add(&p.detectors, p.observables);
                }
            }
            None => add(&m.detectors, m.observables),
        }
    }

    let mut best = cap + 1;
    let mut dist = vec![usize::MAX; 2 * n];
    let mut touched = Vec::new();
    let mut queue = VecDeque::new();
    for s in 0..n {
        if adj[s].is_empty() {
            continue;
        }
        for &t in &touched {
            dist[t] = usize::MAX;
        }
        touched.clear();
        queue.clear();
        dist[2 * s] = 0;
        touched.push(2 * s);
        queue.push_back(2 * s);
        while let Some(state) = queue.pop_front() {
            let d = dist[state];
            if d + 1 >= best {
                break;
            }
            let (v, par) = (state / 2, state % 2);
            for &(w, mask) in &adj[v] {
                let next = 2 * w + (par ^ (mask >> k & 1) as usize);
                if dist[next] == usize::MAX {
                    dist[next] = d + 1;
                    touched.push(next);
                    if next == 2 * s + 1 {
                        best = best.min(d + 1);
                    }
                    queue.push_back(next);
                }
            }
        }
    }
    if best <= cap {
        Distance::Exact(best)
    } else {
        Distance::AtLeast(cap + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repetition_chain() {
        // Boundary - D0 - D1 - D2 - boundary with the logical on one end.
        let dem = DetectorErrorModel::parse("error(0.1) D0 L0\nerror(0.1) D0 D1\nerror(0.1) D1 D2\nerror(0.1) D2\n").unwrap();
        assert_eq!(circuit_distance(&dem, 0, 8), Distance::Exact(4));
        assert_eq!(circuit_distance(&dem, 0, 3), Distance::AtLeast(4));
    }

    #[test]
    fn bare_logical() {
        let dem = DetectorErrorModel::parse("error(0.1) L0\nerror(0.1) D0\n").unwrap();
        assert_eq!(circuit_distance(&dem, 0, 8), Distance::Exact(1));
    }
}
