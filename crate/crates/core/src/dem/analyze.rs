//! Backward sensitivity propagation.
//!
//! Walking the circuit from the end, each qubit keeps the sets of
//! targets (detectors and observables) whose backward-propagated
//! operator has an X or Z component on it. A Pauli error at that point
//! flips exactly the targets whose operator anticommutes with it.

use std::collections::HashMap;

use super::{disjoint_to_independent, xor_probability, DemError, DetectorErrorModel, ErrorMechanism};
use crate::circuit::{unroll, Circuit, FlatCircuit, FlatOp, MeasureTarget};
use crate::pauli::{Axis, Clifford};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TargetId {
    Detector(u32),
    Observable(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NondeterministicTarget {
    pub target: TargetId,
    /// Tick count at the point where the dependence on a random outcome
    /// was found (the latest such point in time).
    pub tick: usize,
}

/// Symmetric difference of two sorted sets, written into `out`.
fn xor_sorted(a: &[u32], b: &[u32], out: &mut Vec<u32>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

struct Propagator<'a> {
    flat: &'a FlatCircuit,
    sx: Vec<Vec<u32>>,
    sz: Vec<Vec<u32>>,
    meas_targets: Vec<Vec<u32>>,
    scratch: Vec<u32>,
    tick: usize,
    violations: Vec<NondeterministicTarget>,
    reported: std::collections::HashSet<u32>,
    collect: bool,
    errors: HashMap<(Vec<u32>, u64), f64>,
    bad_probability: Option<f64>,
}

enum Which {
    X,
    Z,
}

impl<'a> Propagator<'a> {
    fn new(flat: &'a FlatCircuit, collect: bool) -> Self {
        let nq = flat.num_qubits as usize;
        let d = flat.num_detectors() as u32;
        let mut meas_targets = vec![Vec::new(); flat.num_measurements];
        for (i, det) in flat.detectors.iter().enumerate() {
            for &m in &det.measurements {
                meas_targets[m].push(i as u32);
            }
        }
        for (k, obs) in flat.observables.iter().enumerate() {
            for &m in obs {
                meas_targets[m].push(d + k as u32);
            }
        }
        Propagator {
            flat,
            sx: vec![Vec::new(); nq],
            sz: vec![Vec::new(); nq],
            meas_targets,
            scratch: Vec::new(),
            tick: flat.num_ticks,
            violations: Vec::new(),
            reported: Default::default(),
            collect,
            errors: HashMap::new(),
            bad_probability: None,
        }
    }

    fn target_id(&self, t: u32) -> TargetId {
        let d = self.flat.num_detectors() as u32;
        if t < d {
            TargetId::Detector(t)
        } else {
            TargetId::Observable(t - d)
        }
    }

    fn report(&mut self, targets: &[u32]) {
        for &t in targets {
            if self.reported.insert(t) {
                self.violations.push(NondeterministicTarget {
                    target: self.target_id(t),
                    tick: self.tick,
                });
            }
        }
    }

    /// `dst ^= src` where both index per-qubit sets.
    fn xor_into(&mut self, dst: (Which, u32), src: (Which, u32)) {
        let s = match src.0 {
            Which::X => &self.sx[src.1 as usize],
            Which::Z => &self.sz[src.1 as usize],
        };
        let d = match dst.0 {
            Which::X => &self.sx[dst.1 as usize],
            Which::Z => &self.sz[dst.1 as usize],
        };
        xor_sorted(d, s, &mut self.scratch);
        let d = match dst.0 {
            Which::X => &mut self.sx[dst.1 as usize],
            Which::Z => &mut self.sz[dst.1 as usize],
        };
        std::mem::swap(d, &mut self.scratch);
    }

    fn toggle(set: &mut Vec<u32>, items: &[u32], scratch: &mut Vec<u32>) {
        xor_sorted(set, items, scratch);
        std::mem::swap(set, scratch);
    }

    /// Targets flipped by Pauli `axis` on `q` at the current point.
    fn symptoms(&self, q: u32, axis: Axis, out: &mut Vec<u32>) {
        let q = q as usize;
        match axis {
            Axis::X => {
                out.clear();
                out.extend_from_slice(&self.sz[q]);
            }
            Axis::Z => {
                out.clear();
                out.extend_from_slice(&self.sx[q]);
            }
            Axis::Y => xor_sorted(&self.sx[q], &self.sz[q], out),
        }
    }

    fn add_error(&mut self, p: f64, symptoms: &[u32]) {
        if p <= 0.0 || symptoms.is_empty() {
            return;
        }
        let d = self.flat.num_detectors() as u32;
        let split = symptoms.partition_point(|&t| t < d);
        let dets = symptoms[..split].to_vec();
        let mut obs = 0u64;
        for &t in &symptoms[split..] {
            obs ^= 1 << (t - d);
        }
        let entry = self.errors.entry((dets, obs)).or_insert(0.0);
        *entry = xor_probability(*entry, p);
    }

    /// Adds every non-empty combination of `basis` as an independent error
    /// with probability `q`.
    fn add_combinations(&mut self, q: f64, basis: &[Vec<u32>]) {
        let n = basis.len();
        let mut acc = Vec::new();
        let mut tmp = Vec::new();
        for mask in 1u32..(1 << n) {
            acc.clear();
            for (i, b) in basis.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    xor_sorted(&acc, b, &mut tmp);
                    std::mem::swap(&mut acc, &mut tmp);
                }
            }
            let sym = acc.clone();
            self.add_error(q, &sym);
        }
    }

    fn convert(&mut self, p: f64, n: u32, scale: f64) -> Option<f64> {
        match disjoint_to_independent(p * scale, n) {
            Ok(q) => Some(q),
            Err(_) => {
                self.bad_probability.get_or_insert(p);
                None
            }
        }
    }

    fn check_reset(&mut self, q: u32) {
        if !self.sx[q as usize].is_empty() {
            let bad = self.sx[q as usize].clone();
            self.report(&bad);
        }
        self.sx[q as usize].clear();
        self.sz[q as usize].clear();
    }

    fn step(&mut self, op: &FlatOp) {
        match op {
            FlatOp::Tick => self.tick -= 1,
            FlatOp::Reset(qs) => {
                for &q in qs.iter().rev() {
                    self.check_reset(q);
                }
            }
            FlatOp::Gate { gate, targets } => match gate {
                Clifford::I => {}
                Clifford::H => {
                    for &q in targets.iter().rev() {
                        std::mem::swap(&mut self.sx[q as usize], &mut self.sz[q as usize]);
                    }
                }
                // Backward through a gate applies the inverse conjugation.
                Clifford::CZyx => {
                    for &q in targets.iter().rev() {
                        // Inverse map: x' = x ^ z, z' = x.
                        let old_x = self.sx[q as usize].clone();
                        self.xor_into((Which::X, q), (Which::Z, q));
                        self.sz[q as usize] = old_x;
                    }
                }
                Clifford::CXyz => {
                    for &q in targets.iter().rev() {
                        // Inverse map: x' = z, z' = x ^ z.
                        let old_z = self.sz[q as usize].clone();
                        self.xor_into((Which::Z, q), (Which::X, q));
                        self.sx[q as usize] = old_z;
                    }
                }
                Clifford::Cx => {
                    for pair in targets.chunks(2).rev() {
                        let (c, t) = (pair[0], pair[1]);
                        self.xor_into((Which::X, t), (Which::X, c));
                        self.xor_into((Which::Z, c), (Which::Z, t));
                    }
                }
                Clifford::Cz => {
                    for pair in targets.chunks(2).rev() {
                        let (a, b) = (pair[0], pair[1]);
                        self.xor_into((Which::Z, a), (Which::X, b));
                        self.xor_into((Which::Z, b), (Which::X, a));
                    }
                }
            },
            FlatOp::Measure { targets, flip, first } => {
                for (i, t) in targets.iter().enumerate().rev() {
                    let m = first + i;
                    if self.collect {
                        let sym = self.meas_targets[m].clone();
                        self.add_error(*flip, &sym);
                    }
                    let terms: Vec<(Axis, u32)> = match t {
                        MeasureTarget::Z(q) => vec![(Axis::Z, *q)],
                        MeasureTarget::Product(terms) => terms.clone(),
                    };
                    // Targets anticommuting with the measured operator.
                    let mut anti = Vec::new();
                    let mut sym = Vec::new();
                    let mut tmp = Vec::new();
                    for &(axis, q) in &terms {
                        // A target anticommutes with `axis` exactly when an
                        // `axis` error would flip it.
                        self.symptoms(q, axis, &mut sym);
                        xor_sorted(&anti, &sym, &mut tmp);
                        std::mem::swap(&mut anti, &mut tmp);
                    }
                    if !anti.is_empty() {
                        self.report(&anti);
                    }
                    let mt = std::mem::take(&mut self.meas_targets[m]);
                    for &(axis, q) in &terms {
                        let (bx, bz) = axis.bits();
                        if bx {
                            Self::toggle(&mut self.sx[q as usize], &mt, &mut self.scratch);
                        }
                        if bz {
                            Self::toggle(&mut self.sz[q as usize], &mt, &mut self.scratch);
                        }
                    }
                    self.meas_targets[m] = mt;
                }
            }
            FlatOp::XError { p, targets } => {
                if self.collect {
                    let mut sym = Vec::new();
                    for &q in targets {
                        self.symptoms(q, Axis::X, &mut sym);
                        let s = sym.clone();
                        self.add_error(*p, &s);
                    }
                }
            }
            FlatOp::Depolarize1 { p, targets } => {
                if self.collect {
                    let Some(q) = self.convert(*p, 2, 4.0 / 3.0) else { return };
                    for &t in targets {
                        let mut bx = Vec::new();
                        let mut bz = Vec::new();
                        self.symptoms(t, Axis::X, &mut bx);
                        self.symptoms(t, Axis::Z, &mut bz);
                        self.add_combinations(q, &[bx, bz]);
                    }
                }
            }
            FlatOp::Depolarize2 { p, targets } => {
                if self.collect {
                    let Some(q) = self.convert(*p, 4, 16.0 / 15.0) else { return };
                    for pair in targets.chunks(2) {
                        let mut basis = Vec::with_capacity(4);
                        for &t in pair {
                            let mut bx = Vec::new();
                            let mut bz = Vec::new();
                            self.symptoms(t, Axis::X, &mut bx);
                            self.symptoms(t, Axis::Z, &mut bz);
                            basis.push(bx);
                            basis.push(bz);
                        }
                        self.add_combinations(q, &basis);
                    }
                }
            }
            FlatOp::CorrelatedMeasError { p, items } => {
                if self.collect {
                    let Some(q) = self.convert(*p, 5, 1.0) else { return };
                    for &(a, b, m) in items {
                        let mut basis = Vec::with_capacity(5);
                        for t in [a, b] {
                            let mut bx = Vec::new();
                            let mut bz = Vec::new();
                            self.symptoms(t, Axis::X, &mut bx);
                            self.symptoms(t, Axis::Z, &mut bz);
                            basis.push(bx);
                            basis.push(bz);
                        }
                        basis.push(self.meas_targets[m].clone());
                        self.add_combinations(q, &basis);
                    }
                }
            }
            FlatOp::Detector(_) | FlatOp::Observable { .. } => {}
        }
    }

    fn run(mut self) -> Self {
        for op in self.flat.ops.iter().rev() {
            self.step(op);
        }
        // Every qubit starts in |0>.
        for q in 0..self.flat.num_qubits {
            self.check_reset(q);
        }
        self
    }
}

fn finish_violations(mut v: Vec<NondeterministicTarget>) -> Vec<NondeterministicTarget> {
    v.sort_by_key(|t| t.target);
    v
}

/// Lists detectors and observables whose value is not fixed by the
/// noiseless circuit. Empty when the circuit is sound.
pub fn verify_determinism(circuit: &Circuit) -> Result<Vec<NondeterministicTarget>, DemError> {
    let flat = unroll(circuit).map_err(DemError::Invalid)?;
    Ok(verify_flat(&flat))
}

pub(crate) fn verify_flat(flat: &FlatCircuit) -> Vec<NondeterministicTarget> {
    finish_violations(Propagator::new(flat, false).run().violations)
}

/// Extracts the detector error model of a circuit. Mechanisms with
/// identical symptoms are merged; those with no symptoms are dropped.
/// Fails if any detector or observable is not deterministic.
pub fn extract_dem(circuit: &Circuit) -> Result<DetectorErrorModel, DemError> {
    let flat = unroll(circuit).map_err(DemError::Invalid)?;
    extract_flat(&flat)
}

pub(crate) fn extract_flat(flat: &FlatCircuit) -> Result<DetectorErrorModel, DemError> {
    if flat.num_observables() > 64 {
        return Err(DemError::TooManyObservables(flat.num_observables()));
    }
    let prop = Propagator::new(flat, true).run();
    if !prop.violations.is_empty() {
        return Err(DemError::Nondeterministic(finish_violations(prop.violations)));
    }
    if let Some(p) = prop.bad_probability {
        return Err(DemError::BadProbability { p });
    }
    let mut mechanisms: Vec<ErrorMechanism> = prop
        .errors
        .into_iter()
        .filter(|(_, p)| *p > 0.0)
        .map(|((detectors, observables), probability)| ErrorMechanism {
            probability,
            detectors,
            observables,
            pieces: None,
        })
        .collect();
    mechanisms.sort_by(|a, b| (&a.detectors, a.observables).cmp(&(&b.detectors, b.observables)));
    Ok(DetectorErrorModel {
        num_detectors: flat.num_detectors(),
        num_observables: flat.num_observables(),
        mechanisms,
        detector_coords: flat.detectors.iter().map(|d| d.coords.clone()).collect(),
    })
}
