//! Bit-parallel Pauli-frame sampling of detection events.
//!
//! Each shot tracks the Pauli error frame relative to the noiseless
//! circuit; 64 shots share one machine word per qubit. Measurement
//! results are recorded as flips relative to the noiseless reference,
//! which is enough for detectors and observables because they are
//! deterministic in the absence of noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit::{unroll, Circuit, FlatCircuit, FlatOp, MeasureTarget, Violation};
use crate::pauli::{Axis, Clifford};

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("invalid circuit: {}", .0.first().map(|v| v.to_string()).unwrap_or_default())]
    Invalid(Vec<Violation>),
    #[error("circuit has {0} observables; at most 64 are supported")]
    TooManyObservables(usize),
    #[error("detection fractions need at least one shot")]
    NoShots,
}

/// Fraction of shots in which each detector fired, and their mean.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionFractions {
    pub mean: f64,
    pub per_detector: Vec<f64>,
}

/// Sampled detection events, one packed row per shot.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionTable {
    pub shots: usize,
    pub num_detectors: usize,
    pub num_observables: usize,
    stride: usize,
    rows: Vec<u64>,
    observables: Vec<u64>,
}

impl DetectionTable {
    pub(crate) fn zeros(shots: usize, num_detectors: usize, num_observables: usize) -> Self {
        let stride = num_detectors.div_ceil(64);
        DetectionTable {
            shots,
            num_detectors,
            num_observables,
            stride,
            rows: vec![0; stride * shots],
            observables: vec![0; shots],
        }
    }

    pub fn detector(&self, shot: usize, det: usize) -> bool {
        self.rows[shot * self.stride + det / 64] >> (det % 64) & 1 == 1
    }

    /// Detectors that fired in `shot`, ascending.
    pub fn fired(&self, shot: usize) -> Vec<u32> {
        let mut out = Vec::new();
        let row = &self.rows[shot * self.stride..(shot + 1) * self.stride];
        for (w, &word) in row.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let b = bits.trailing_zeros();
                out.push(w as u32 * 64 + b);
                bits &= bits - 1;
            }
        }
        out
    }

    /// Observable flips of `shot`, bit `k` for observable `k`.
    pub fn observable_mask(&self, shot: usize) -> u64 {
        self.observables[shot]
    }

    pub fn fractions(&self) -> Result<DetectionFractions, SampleError> {
        if self.shots == 0 {
            return Err(SampleError::NoShots);
        }
        let mut counts = vec![0u64; self.num_detectors];
        for row in self.rows.chunks(self.stride.max(1)) {
            for (w, &word) in row.iter().enumerate() {
                let mut bits = word;
                while bits != 0 {
                    counts[w * 64 + bits.trailing_zeros() as usize] += 1;
                    bits &= bits - 1;
                }
            }
        }
        let per_detector: Vec<f64> = counts.iter().map(|&c| c as f64 / self.shots as f64).collect();
        let mean = if per_detector.is_empty() {
            0.0
        } else {
            per_detector.iter().sum::<f64>() / per_detector.len() as f64
        };
        Ok(DetectionFractions { mean, per_detector })
    }

    pub fn append(&mut self, other: &DetectionTable) {
        assert_eq!(self.num_detectors, other.num_detectors);
        assert_eq!(self.num_observables, other.num_observables);
        self.shots += other.shots;
        self.rows.extend_from_slice(&other.rows);
        self.observables.extend_from_slice(&other.observables);
    }

    /// Packed dump: one row per shot holding the detector bits followed by
    /// the observable bits, little-endian within each byte, rows padded
    /// to whole bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let bits = self.num_detectors + self.num_observables;
        let row_bytes = bits.div_ceil(8);
        let mut out = vec![0u8; row_bytes * self.shots];
        for s in 0..self.shots {
            let row = &mut out[s * row_bytes..(s + 1) * row_bytes];
            for d in self.fired(s) {
                row[d as usize / 8] |= 1 << (d % 8);
            }
            for k in 0..self.num_observables {
                if self.observables[s] >> k & 1 == 1 {
                    let b = self.num_detectors + k;
                    row[b / 8] |= 1 << (b % 8);
                }
            }
        }
        out
    }

    /// Inverse of [`DetectionTable::to_bytes`].
    pub fn from_bytes(bytes: &[u8], num_detectors: usize, num_observables: usize) -> Option<Self> {
        let row_bytes = (num_detectors + num_observables).div_ceil(8);
        if row_bytes == 0 || bytes.len() % row_bytes != 0 {
            return None;
        }
        let shots = bytes.len() / row_bytes;
        let mut out = DetectionTable::zeros(shots, num_detectors, num_observables);
        for s in 0..shots {
            let row = &bytes[s * row_bytes..(s + 1) * row_bytes];
            for b in 0..num_detectors + num_observables {
                if row[b / 8] >> (b % 8) & 1 == 1 {
                    if b < num_detectors {
                        out.rows[s * out.stride + b / 64] |= 1 << (b % 64);
                    } else {
                        out.observables[s] |= 1 << (b - num_detectors);
                    }
                }
            }
        }
        Some(out)
    }

    pub(crate) fn toggle(&mut self, shot: usize, det: usize) {
        self.rows[shot * self.stride + det / 64] ^= 1 << (det % 64);
    }

    pub(crate) fn toggle_observables(&mut self, shot: usize, mask: u64) {
        self.observables[shot] ^= mask;
    }
}

/// Reusable sampler for one circuit.
#[derive(Debug, Clone)]
pub struct FrameSampler {
    flat: FlatCircuit,
    seed: u64,
}

impl FrameSampler {
    pub fn new(circuit: &Circuit, seed: u64) -> Result<Self, SampleError> {
        let flat = unroll(circuit).map_err(SampleError::Invalid)?;
        Self::from_flat(flat, seed)
    }

    pub fn from_flat(flat: FlatCircuit, seed: u64) -> Result<Self, SampleError> {
        if flat.num_observables() > 64 {
            return Err(SampleError::TooManyObservables(flat.num_observables()));
        }
        Ok(FrameSampler { flat, seed })
    }

    pub fn flat(&self) -> &FlatCircuit {
        &self.flat
    }

    /// Samples `shots` shots using the random stream for `batch`. The
    /// result depends only on (seed, batch, shots).
    pub fn sample_batch(&self, batch: u64, shots: usize) -> DetectionTable {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(batch);
        let mut sim = Frames::new(self.flat.num_qubits as usize, self.flat.num_measurements, shots);
        for op in &self.flat.ops {
            sim.apply_ideal(op);
            sim.apply_noise(op, &mut rng);
        }
        sim.finish(&self.flat)
    }
}

/// Samples `shots` shots in batches of at most 4096.
pub fn sample(circuit: &Circuit, shots: usize, seed: u64) -> Result<DetectionTable, SampleError> {
    let sampler = FrameSampler::new(circuit, seed)?;
    let mut out = DetectionTable::zeros(0, sampler.flat.num_detectors(), sampler.flat.num_observables());
    let mut done = 0;
    let mut batch = 0;
    while done < shots {
        let n = (shots - done).min(4096);
        out.append(&sampler.sample_batch(batch, n));
        done += n;
        batch += 1;
    }
    Ok(out)
}

/// One deterministic case of a noise channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Fault {
    /// Index into the flat op list; the fault acts right after that op.
    pub op: usize,
    pub paulis: Vec<(u32, Axis)>,
    /// Measurement whose recorded result is flipped.
    pub flip: Option<usize>,
}

const CASES: [Option<Axis>; 4] = [None, Some(Axis::X), Some(Axis::Y), Some(Axis::Z)];

fn case_paulis(qubits: &[u32], case: usize) -> Vec<(u32, Axis)> {
    qubits
        .iter()
        .enumerate()
        .filter_map(|(k, &q)| CASES[case >> (2 * k) & 3].map(|a| (q, a)))
        .collect()
}

/// Every non-identity case of every channel with nonzero probability,
/// including measurement result flips.
pub fn enumerate_faults(flat: &FlatCircuit) -> Vec<Fault> {
    let mut out = Vec::new();
    for (op, f) in flat.ops.iter().enumerate() {
        let fault = |paulis, flip| Fault { op, paulis, flip };
        match f {
            FlatOp::Measure { targets, flip, first } if *flip > 0.0 => {
                out.extend((0..targets.len()).map(|k| fault(vec![], Some(first + k))));
            }
            FlatOp::XError { p, targets } if *p > 0.0 => {
                out.extend(targets.iter().map(|&q| fault(vec![(q, Axis::X)], None)));
            }
            FlatOp::Depolarize1 { p, targets } if *p > 0.0 => {
                for &q in targets {
                    out.extend((1..4).map(|c| fault(case_paulis(&[q], c), None)));
                }
            }
            FlatOp::Depolarize2 { p, targets } if *p > 0.0 => {
                for pair in targets.chunks(2) {
                    out.extend((1..16).map(|c| fault(case_paulis(pair, c), None)));
                }
            }
            FlatOp::CorrelatedMeasError { p, items } if *p > 0.0 => {
                for &(a, b, m) in items {
                    for c in 1..32 {
                        out.push(fault(case_paulis(&[a, b], c & 15), (c >= 16).then_some(m)));
                    }
                }
            }
            _ => {}
        }
    }
    out
}

/// Runs the noiseless circuit once per fault with only that fault applied.
/// Shot `k` of the result belongs to `faults[k]`.
pub fn inject_faults(flat: &FlatCircuit, faults: &[Fault]) -> DetectionTable {
    let mut at: Vec<Vec<usize>> = vec![Vec::new(); flat.ops.len()];
    for (k, f) in faults.iter().enumerate() {
        at[f.op].push(k);
    }
    let mut sim = Frames::new(flat.num_qubits as usize, flat.num_measurements, faults.len());
    for (op, shots) in flat.ops.iter().zip(&at) {
        sim.apply_ideal(op);
        for &k in shots {
            for &(q, a) in &faults[k].paulis {
                sim.apply_pauli(q, a, k);
            }
            if let Some(m) = faults[k].flip {
                Frames::flip_bit(&mut sim.record, m, sim.words, k);
            }
        }
    }
    sim.finish(flat)
}

struct Frames {
    shots: usize,
    words: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    record: Vec<u64>,
}

/// Calls `hit` for each success of `trials` independent Bernoulli(p)
/// trials, using geometric gaps between successes.
fn for_each_hit(rng: &mut ChaCha8Rng, p: f64, trials: usize, mut hit: impl FnMut(usize, &mut ChaCha8Rng)) {
    if p <= 0.0 || trials == 0 {
        return;
    }
    if p >= 1.0 {
        for t in 0..trials {
            hit(t, rng);
        }
        return;
    }
    let log_q = (-p).ln_1p();
    let mut pos = 0usize;
    loop {
        let u: f64 = 1.0 - rng.gen::<f64>();
        let gap = (u.ln() / log_q).floor();
        if gap >= (trials - pos) as f64 {
            return;
        }
        pos += gap as usize;
        hit(pos, rng);
        pos += 1;
        if pos >= trials {
            return;
        }
    }
}

impl Frames {
    fn new(num_qubits: usize, num_measurements: usize, shots: usize) -> Self {
        let words = shots.div_ceil(64).max(1);
        Frames {
            shots,
            words,
            x: vec![0; num_qubits * words],
            z: vec![0; num_qubits * words],
            record: vec![0; num_measurements * words],
        }
    }

    fn row(q: u32, words: usize) -> std::ops::Range<usize> {
        q as usize * words..(q as usize + 1) * words
    }

    fn flip_bit(v: &mut [u64], row: usize, words: usize, shot: usize) {
        v[row * words + shot / 64] ^= 1 << (shot % 64);
    }

    fn apply_pauli(&mut self, q: u32, axis: Axis, shot: usize) {
        let (bx, bz) = axis.bits();
        if bx {
            Self::flip_bit(&mut self.x, q as usize, self.words, shot);
        }
        if bz {
            Self::flip_bit(&mut self.z, q as usize, self.words, shot);
        }
    }

    /// Noiseless action of `op`: resets, gates and measurement records.
    fn apply_ideal(&mut self, op: &FlatOp) {
        let w = self.words;
        match op {
            FlatOp::Reset(qs) => {
                for &q in qs {
                    self.x[Self::row(q, w)].fill(0);
                    self.z[Self::row(q, w)].fill(0);
                }
            }
            FlatOp::Gate { gate, targets } => match gate {
                Clifford::I => {}
                Clifford::H => {
                    for &q in targets {
                        let r = Self::row(q, w);
                        for k in r {
                            std::mem::swap(&mut self.x[k], &mut self.z[k]);
                        }
                    }
                }
                Clifford::CZyx => {
                    for &q in targets {
                        for k in Self::row(q, w) {
                            let (x, z) = (self.x[k], self.z[k]);
                            self.x[k] = z;
                            self.z[k] = x ^ z;
                        }
                    }
                }
                Clifford::CXyz => {
                    for &q in targets {
                        for k in Self::row(q, w) {
                            let (x, z) = (self.x[k], self.z[k]);
                            self.x[k] = x ^ z;
                            self.z[k] = x;
                        }
                    }
                }
                Clifford::Cx => {
                    for pair in targets.chunks(2) {
                        let (c, t) = (pair[0] as usize * w, pair[1] as usize * w);
                        for k in 0..w {
                            self.x[t + k] ^= self.x[c + k];
                            self.z[c + k] ^= self.z[t + k];
                        }
                    }
                }
                Clifford::Cz => {
                    for pair in targets.chunks(2) {
                        let (a, b) = (pair[0] as usize * w, pair[1] as usize * w);
                        for k in 0..w {
                            self.z[a + k] ^= self.x[b + k];
                            self.z[b + k] ^= self.x[a + k];
                        }
                    }
                }
            },
            FlatOp::Measure { targets, first, .. } => {
                for (i, t) in targets.iter().enumerate() {
                    let m = (first + i) * w;
                    match t {
                        MeasureTarget::Z(q) => {
                            let r = *q as usize * w;
                            self.record[m..m + w].copy_from_slice(&self.x[r..r + w]);
                        }
                        MeasureTarget::Product(terms) => {
                            for &(axis, q) in terms {
                                let r = q as usize * w;
                                for k in 0..w {
                                    let v = match axis {
                                        Axis::X => self.z[r + k],
                                        Axis::Z => self.x[r + k],
                                        Axis::Y => self.x[r + k] ^ self.z[r + k],
                                    };
                                    self.record[m + k] ^= v;
                                }
                            }
                        }
                    }
                }
            }
            _ => {}
        }
    }

    fn apply_noise(&mut self, op: &FlatOp, rng: &mut ChaCha8Rng) {
        let w = self.words;
        let shots = self.shots;
        match op {
            FlatOp::Measure { targets, flip, first } => {
                let record = &mut self.record;
                for_each_hit(rng, *flip, targets.len() * shots, |t, _| {
                    Self::flip_bit(record, first + t / shots, w, t % shots);
                });
            }
            FlatOp::XError { p, targets } => {
                let x = &mut self.x;
                for_each_hit(rng, *p, targets.len() * shots, |t, _| {
                    Self::flip_bit(x, targets[t / shots] as usize, w, t % shots);
                });
            }
            FlatOp::Depolarize1 { p, targets } => {
                let mut hits = Vec::new();
                for_each_hit(rng, *p, targets.len() * shots, |t, rng| {
                    let axis = [Axis::X, Axis::Y, Axis::Z][rng.gen_range(0..3)];
                    hits.push((targets[t / shots], axis, t % shots));
                });
                for (q, a, s) in hits {
                    self.apply_pauli(q, a, s);
                }
            }
            FlatOp::Depolarize2 { p, targets } => {
                let pairs = targets.len() / 2;
                let mut hits = Vec::new();
                for_each_hit(rng, *p, pairs * shots, |t, rng| {
                    let case = rng.gen_range(1..16u8);
                    hits.push((t / shots, case, t % shots));
                });
                for (pair, case, s) in hits {
                    let (a, b) = (targets[2 * pair], targets[2 * pair + 1]);
                    self.apply_case(a, case & 3, s);
                    self.apply_case(b, case >> 2, s);
                }
            }
            FlatOp::CorrelatedMeasError { p, items } => {
                let mut hits = Vec::new();
                for_each_hit(rng, *p, items.len() * shots, |t, rng| {
                    let case = rng.gen_range(0..32u8);
                    hits.push((t / shots, case, t % shots));
                });
                for (i, case, s) in hits {
                    let (a, b, m) = items[i];
                    self.apply_case(a, case & 3, s);
                    self.apply_case(b, (case >> 2) & 3, s);
                    if case >> 4 == 1 {
                        Self::flip_bit(&mut self.record, m, w, s);
                    }
                }
            }
            _ => {}
        }
    }

    /// Applies Pauli number `case` (0 = I, 1 = X, 2 = Y, 3 = Z).
    fn apply_case(&mut self, q: u32, case: u8, shot: usize) {
        match case {
            1 => self.apply_pauli(q, Axis::X, shot),
            2 => self.apply_pauli(q, Axis::Y, shot),
            3 => self.apply_pauli(q, Axis::Z, shot),
            _ => {}
        }
    }

    fn finish(self, flat: &FlatCircuit) -> DetectionTable {
        let w = self.words;
        let mut out = DetectionTable::zeros(self.shots, flat.num_detectors(), flat.num_observables());
        let mut acc = vec![0u64; w];
        let tail_mask = |k: usize| {
            let valid = self.shots - k * 64;
            if valid >= 64 {
                u64::MAX
            } else {
                (1u64 << valid) - 1
            }
        };
        for (d, det) in flat.detectors.iter().enumerate() {
            acc.fill(0);
            for &m in &det.measurements {
                for k in 0..w {
                    acc[k] ^= self.record[m * w + k];
                }
            }
            for (k, &word) in acc.iter().enumerate() {
                let mut bits = word & tail_mask(k);
                while bits != 0 {
                    let b = bits.trailing_zeros() as usize;
                    out.toggle(k * 64 + b, d);
                    bits &= bits - 1;
                }
            }
        }
        for (o, obs) in flat.observables.iter().enumerate() {
            acc.fill(0);
            for &m in obs {
                for k in 0..w {
                    acc[k] ^= self.record[m * w + k];
                }
            }
            for (k, &word) in acc.iter().enumerate() {
                let mut bits = word & tail_mask(k);
                while bits != 0 {
                    let b = bits.trailing_zeros() as usize;
                    out.toggle_observables(k * 64 + b, 1 << o);
                    bits &= bits - 1;
                }
            }
        }
        out
    }
}
