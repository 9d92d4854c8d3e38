//! Independent oracles shared by the integration test targets.
#![allow(dead_code)]

use std::collections::HashMap;

use honeycomb_memory::circuit::{unroll, Circuit, FlatOp};
use honeycomb_memory::dem::{extract_dem, xor_probability};
use honeycomb_memory::matching::{Decoder, MatchingGraph};
use honeycomb_memory::sampler::{enumerate_faults, inject_faults};

/// Distribution over the 2^n elements of Z_2^n after applying each
/// non-identity element independently with probability q.
pub fn independent_distribution(q: f64, n: u32) -> Vec<f64> {
    let size = 1usize << n;
    let mut dist = vec![0.0; size];
    dist[0] = 1.0;
    for g in 1..size {
        let prev = dist.clone();
        for (x, v) in dist.iter_mut().enumerate() {
            *v = (1.0 - q) * prev[x] + q * prev[x ^ g];
        }
    }
    dist
}

/// Uniform mixing channel: with probability `p` a uniformly random
/// element (identity included).
pub fn mixing_distribution(p: f64, n: u32) -> Vec<f64> {
    let size = 1usize << n;
    let mut dist = vec![p / size as f64; size];
    dist[0] += 1.0 - p;
    dist
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Independent per-element probability reproducing the mixing channel's
/// identity weight, found by bisection on the convolution above.
pub fn independent_by_bisection(p_mix: f64, n: u32) -> f64 {
    let target = mixing_distribution(p_mix, n)[0];
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if independent_distribution(mid, n)[0] > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Compares every single fault of `circuit` against the extracted error
/// model: same signatures, and each mechanism's probability equals the
/// XOR combination of the faults producing it. Returns the number of
/// faults checked.
pub fn check_single_faults(circuit: &Circuit) -> Result<usize, String> {
    let flat = unroll(circuit).map_err(|v| format!("{v:?}"))?;
    let faults = enumerate_faults(&flat);
    let table = inject_faults(&flat, &faults);
    let mut q_cache: HashMap<(u64, u32), f64> = HashMap::new();
    let mut q_of = |p: f64, n: u32| *q_cache.entry((p.to_bits(), n)).or_insert_with(|| independent_by_bisection(p, n));

    let mut expected: HashMap<(Vec<u32>, u64), f64> = HashMap::new();
    for (k, f) in faults.iter().enumerate() {
        let q = match &flat.ops[f.op] {
            FlatOp::Measure { flip, .. } => *flip,
            FlatOp::XError { p, .. } => *p,
            FlatOp::Depolarize1 { p, .. } => q_of(p * 4.0 / 3.0, 2),
            FlatOp::Depolarize2 { p, .. } => q_of(p * 16.0 / 15.0, 4),
            FlatOp::CorrelatedMeasError { p, .. } => q_of(*p, 5),
            other => return Err(format!("fault on non-noise op {other:?}")),
        };
        let mut dets = table.fired(k);
        dets.sort_unstable();
        let obs = table.observable_mask(k);
        if dets.is_empty() && obs == 0 {
            continue;
        }
        let e = expected.entry((dets, obs)).or_insert(0.0);
        *e = xor_probability(*e, q);
    }

    let dem = extract_dem(circuit).map_err(|e| e.to_string())?;
    let mut seen = 0;
    for m in &dem.mechanisms {
        let key = (m.detectors.clone(), m.observables);
        match expected.get(&key) {
            None => return Err(format!("mechanism {key:?} has no fault")),
            Some(&p) => {
                if (p - m.probability).abs() > 1e-9 * p.max(1e-12) {
                    return Err(format!("mechanism {key:?}: model {} vs faults {p}", m.probability));
                }
                seen += 1;
            }
        }
    }
    if seen != expected.len() {
        return Err(format!("{} fault signatures, {} mechanisms", expected.len(), seen));
    }
    Ok(faults.len())
}

/// All-pairs shortest paths over quantized weights (Floyd-Warshall),
/// plus each node's cheapest way to the boundary.
pub struct AllPairs {
    n: usize,
    dist: Vec<i64>,
    to_boundary: Vec<i64>,
}

pub const INF: i64 = i64::MAX / 4;

impl AllPairs {
    pub fn new(g: &MatchingGraph) -> Self {
        let n = g.num_nodes;
        let mut dist = vec![INF; n * n];
        let mut direct = vec![INF; n];
        for i in 0..n {
            dist[i * n + i] = 0;
        }
        for (e, edge) in g.edges.iter().enumerate() {
            let w = g.quantized_weight(e);
            let a = edge.a as usize;
            match edge.b {
                Some(b) => {
                    let b = b as usize;
                    dist[a * n + b] = dist[a * n + b].min(w);
                    dist[b * n + a] = dist[b * n + a].min(w);
                }
                None => direct[a] = direct[a].min(w),
            }
        }
        for k in 0..n {
            for i in 0..n {
                let dik = dist[i * n + k];
                if dik == INF {
                    continue;
                }
                for j in 0..n {
                    let c = dik + dist[k * n + j];
                    if c < dist[i * n + j] {
                        dist[i * n + j] = c;
                    }
                }
            }
        }
        let to_boundary = (0..n)
            .map(|i| (0..n).map(|v| if direct[v] == INF { INF } else { dist[i * n + v].saturating_add(direct[v]) }).min().unwrap_or(INF))
            .collect();
        AllPairs { n, dist, to_boundary }
    }

    /// Minimum total weight pairing `events` with each other or the
    /// boundary, by dynamic programming over subsets.
    pub fn brute_force(&self, events: &[u32]) -> Option<i64> {
        let k = events.len();
        let full = (1usize << k) - 1;
        let mut best = vec![INF; 1 << k];
        best[0] = 0;
        for mask in 1..=full {
            let i = mask.trailing_zeros() as usize;
            let rest = mask & !(1 << i);
            let ei = events[i] as usize;
            let mut b = best[rest].saturating_add(self.to_boundary[ei]);
            let mut others = rest;
            while others != 0 {
                let j = others.trailing_zeros() as usize;
                others &= others - 1;
                let d = self.dist[ei * self.n + events[j] as usize];
                b = b.min(best[rest & !(1 << j)].saturating_add(d));
            }
            best[mask] = b.min(INF);
        }
        (best[full] < INF).then_some(best[full])
    }
}

/// Decodes random realizable syndromes (the boundary of a random set of
/// graph edges) with 1..=max_defects detection events, and counts weight
/// disagreements with the brute-force optimum. Returns (syndromes
/// checked, disagreements).
pub fn mwpm_discrepancies(g: &MatchingGraph, syndromes: usize, max_defects: usize, seed: u64) -> (usize, usize) {
    use rand::{Rng, SeedableRng};
    let oracle = AllPairs::new(g);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut dec = Decoder::new(g);
    let mut bad = 0;
    let mut checked = 0;
    while checked < syndromes {
        let flips = rng.gen_range(1..=max_defects);
        let mut events: Vec<u32> = Vec::new();
        for _ in 0..flips {
            let e = &g.edges[rng.gen_range(0..g.edges.len())];
            for v in std::iter::once(e.a).chain(e.b) {
                match events.iter().position(|&x| x == v) {
                    Some(i) => {
                        events.swap_remove(i);
                    }
                    None => events.push(v),
                }
            }
        }
        if events.is_empty() || events.len() > max_defects {
            continue;
        }
        let want = oracle.brute_force(&events);
        let got = dec.decode(&events).ok().map(|d| d.weight);
        if want.is_none() || want != got {
            bad += 1;
        }
        checked += 1;
    }
    (checked, bad)
}
