use std::collections::HashMap;

use super::{Circuit, Item, Opcode};

/// Folds periodic runs of TICK-terminated layers into REPEAT blocks.
///
/// The top level of `circuit` is cut after every TICK. Scanning left to
/// right, the run starting at each layer that covers the most layers
/// (ties broken by the shorter period, at least two repetitions) is
/// replaced by a REPEAT. Existing REPEAT blocks are kept as opaque layers.
pub fn compress_repeats(circuit: &Circuit) -> Circuit {
    let mut segments: Vec<Vec<Item>> = vec![Vec::new()];
    for item in &circuit.items {
        segments.last_mut().unwrap().push(item.clone());
        if matches!(item, Item::Instruction(ins) if ins.op == Opcode::Tick) {
            segments.push(Vec::new());
        }
    }
    if segments.last().is_some_and(|s| s.is_empty()) {
        segments.pop();
    }

    let mut ids: HashMap<String, usize> = HashMap::new();
    let seq: Vec<usize> = segments
        .iter()
        .map(|seg| {
            let key = Circuit { items: seg.clone() }.to_string();
            let next = ids.len();
            *ids.entry(key).or_insert(next)
        })
        .collect();

    let n = seq.len();
    let mut out = Circuit::new();
    let mut i = 0;
    while i < n {
        let mut best: Option<(usize, usize)> = None;
        for period in 1..=(n - i) / 2 {
            let mut reps = 1;
            while i + (reps + 1) * period <= n
                && (0..period).all(|k| seq[i + k] == seq[i + reps * period + k])
            {
                reps += 1;
            }
            if reps >= 2 {
                let covered = reps * period;
                if best.map_or(true, |(p, r)| covered > p * r) {
                    best = Some((period, reps));
                }
            }
        }
        match best {
            Some((period, reps)) => {
                let mut body = Circuit::new();
                for seg in &segments[i..i + period] {
                    body.items.extend(seg.iter().cloned());
                }
                out.push_repeat(reps as u64, body);
                i += period * reps;
            }
            None => {
                out.items.extend(segments[i].iter().cloned());
                i += 1;
            }
        }
    }
    out
}
