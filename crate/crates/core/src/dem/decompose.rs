//! Splitting hyperedge mechanisms into graph-like pieces.

use std::collections::{BTreeMap, BTreeSet};

use super::{DemError, DetectorErrorModel, Piece};

/// Fills in `pieces` for every mechanism with more than two detectors.
///
/// Pieces must be symptom sets (one or two detectors, with an observable
/// mask) that also occur as standalone graph-like mechanisms, and their
/// masks must combine to the mechanism's mask. Partitions are searched
/// depth first, pairing the lowest unassigned detector with partners in
/// ascending order before trying it alone, and the first consistent one
/// is kept. When no such partition exists, one leftover piece of at most
/// two detectors that does not occur elsewhere is allowed, as long as all
/// the other pieces do.
pub fn decompose(dem: &mut DetectorErrorModel) -> Result<(), DemError> {
    let mut known: BTreeMap<Vec<u32>, BTreeSet<u64>> = BTreeMap::new();
    for m in &dem.mechanisms {
        if m.is_graphlike() {
            known.entry(m.detectors.clone()).or_default().insert(m.observables);
        }
    }
    for m in &mut dem.mechanisms {
        if m.detectors.len() <= 2 {
            m.pieces = None;
            continue;
        }
        let mut chosen = Vec::new();
        if !search(&m.detectors, m.observables, &known, false, &mut chosen)
            && !search(&m.detectors, m.observables, &known, true, &mut chosen)
        {
            let mut text = String::new();
            for d in &m.detectors {
                text.push_str(&format!(" D{d}"));
            }
            for k in 0..64 {
                if m.observables >> k & 1 == 1 {
                    text.push_str(&format!(" L{k}"));
                }
            }
            return Err(DemError::DecompositionFailed(text.trim().to_string()));
        }
        m.pieces = Some(chosen);
    }
    Ok(())
}

fn search(
    remaining: &[u32],
    target_mask: u64,
    known: &BTreeMap<Vec<u32>, BTreeSet<u64>>,
    remnant: bool,
    chosen: &mut Vec<Piece>,
) -> bool {
    if remaining.is_empty() {
        return target_mask == 0;
    }
    let first = remaining[0];
    let rest = &remaining[1..];
    let mut candidates: Vec<(Vec<u32>, Vec<u32>)> = Vec::new();
    for (i, &other) in rest.iter().enumerate() {
        let mut left = rest.to_vec();
        left.remove(i);
        candidates.push((vec![first, other], left));
    }
    candidates.push((vec![first], rest.to_vec()));
    for (key, left) in &candidates {
        for &mask in known.get(key).into_iter().flatten() {
            chosen.push(Piece {
                detectors: key.clone(),
                observables: mask,
            });
            if search(left, target_mask ^ mask, known, remnant, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    if remnant {
        // The unknown piece takes whatever mask the known ones leave over.
        for (key, left) in candidates {
            if known.contains_key(&key) {
                continue;
            }
            let at = chosen.len();
            chosen.push(Piece {
                detectors: key,
                observables: 0,
            });
            let mut rest_pieces = Vec::new();
            if let Some(mask) = cover(&left, known, &mut rest_pieces) {
                chosen[at].observables = target_mask ^ mask;
                chosen.extend(rest_pieces);
                return true;
            }
            chosen.pop();
        }
    }
    false
}

/// Partitions `remaining` into known pieces, returning their combined mask.
fn cover(remaining: &[u32], known: &BTreeMap<Vec<u32>, BTreeSet<u64>>, chosen: &mut Vec<Piece>) -> Option<u64> {
    if remaining.is_empty() {
        return Some(0);
    }
    let first = remaining[0];
    let rest = &remaining[1..];
    let mut candidates: Vec<(Vec<u32>, Vec<u32>)> = Vec::new();
    for (i, &other) in rest.iter().enumerate() {
        let mut left = rest.to_vec();
        left.remove(i);
        candidates.push((vec![first, other], left));
    }
    candidates.push((vec![first], rest.to_vec()));
    for (key, left) in candidates {
        if let Some(&mask) = known.get(&key).and_then(|m| m.iter().next()) {
            chosen.push(Piece {
                detectors: key,
                observables: mask,
            });
            if let Some(m) = cover(&left, known, chosen) {
                return Some(m ^ mask);
            }
            chosen.pop();
        }
    }
    None
}
