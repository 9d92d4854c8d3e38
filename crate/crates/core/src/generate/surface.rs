//! Rotated surface code memory experiments.
//!
//! Data qubit `(i, j)` has index `j * d + i` and sits at `(2i + 1, 2j + 1)`.
//! Measure qubits sit at even coordinates `(2i, 2j)`; X-type when `i + j`
//! is even. The logical X runs down column 0 and the logical Z along row 0.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::builder::Builder;
use super::{apply_noise_model, check_strength, GenerateError, NoiseModel};
use crate::circuit::{Circuit, Opcode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SurfaceBasis {
    X,
    Z,
}

impl fmt::Display for SurfaceBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SurfaceBasis::X => "X",
            SurfaceBasis::Z => "Z",
        })
    }
}

impl FromStr for SurfaceBasis {
    type Err = GenerateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "X" | "x" => Ok(SurfaceBasis::X),
            "Z" | "z" => Ok(SurfaceBasis::Z),
            _ => Err(GenerateError::InvalidSpec(format!("unknown surface basis {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub distance: usize,
    pub rounds: usize,
    pub model: NoiseModel,
    pub p: f64,
    pub basis: SurfaceBasis,
}

impl SurfaceSpec {
    pub fn new(distance: usize, model: NoiseModel, p: f64, basis: SurfaceBasis) -> Self {
        SurfaceSpec {
            distance,
            rounds: 3 * distance,
            model,
            p,
            basis,
        }
    }

    pub fn with_rounds(mut self, rounds: usize) -> Self {
        self.rounds = rounds;
        self
    }

    pub fn num_qubits(&self) -> usize {
        2 * self.distance * self.distance - 1
    }

    pub fn validate(&self) -> Result<(), GenerateError> {
        if self.distance < 3 || self.distance % 2 == 0 {
            return Err(GenerateError::InvalidSpec(format!(
                "surface code distance must be odd and at least 3, got {}",
                self.distance
            )));
        }
        if self.rounds == 0 {
            return Err(GenerateError::InvalidSpec("rounds must be positive".into()));
        }
        if !matches!(self.model, NoiseModel::Sd6 | NoiseModel::Si1000) {
            return Err(GenerateError::InvalidSpec(format!(
                "surface code circuits are built for SD6 and SI1000, not {}",
                self.model
            )));
        }
        check_strength(self.p)
    }
}

#[derive(Debug, Clone)]
struct Plaquette {
    qubit: u32,
    basis: SurfaceBasis,
    center: (f64, f64),
    /// Data neighbours in NW, NE, SW, SE order.
    corners: [Option<u32>; 4],
}

impl Plaquette {
    fn data(&self) -> impl Iterator<Item = u32> + '_ {
        self.corners.iter().flatten().copied()
    }

    /// Data partner in CX layer `k`. X checks sweep NW, NE, SW, SE and Z
    /// checks NW, SW, NE, SE, which keeps hook errors perpendicular to the
    /// logical operator of the same type.
    fn partner(&self, k: usize) -> Option<u32> {
        let order = match self.basis {
            SurfaceBasis::X => [0, 1, 2, 3],
            SurfaceBasis::Z => [0, 2, 1, 3],
        };
        self.corners[order[k]]
    }
}

struct Layout {
    d: usize,
    plaquettes: Vec<Plaquette>,
}

impl Layout {
    fn new(d: usize) -> Layout {
        let data = |i: usize, j: usize| (j * d + i) as u32;
        let mut plaquettes = Vec::new();
        for j in 0..=d {
            for i in 0..=d {
                let basis = if (i + j) % 2 == 0 { SurfaceBasis::X } else { SurfaceBasis::Z };
                let keep = if j == 0 || j == d {
                    basis == SurfaceBasis::X && i > 0 && i < d
                } else if i == 0 || i == d {
                    basis == SurfaceBasis::Z
                } else {
                    true
                };
                if !keep {
                    continue;
                }
                let at = |di: usize, dj: usize| {
                    let (x, y) = (i + di, j + dj);
                    (x >= 1 && y >= 1 && x <= d && y <= d).then(|| data(x - 1, y - 1))
                };
                plaquettes.push(Plaquette {
                    qubit: (d * d + plaquettes.len()) as u32,
                    basis,
                    center: ((2 * i) as f64, (2 * j) as f64),
                    corners: [at(0, 0), at(1, 0), at(0, 1), at(1, 1)],
                });
            }
        }
        Layout { d, plaquettes }
    }

    fn data(&self) -> Vec<u32> {
        (0..(self.d * self.d) as u32).collect()
    }

    fn logical(&self, basis: SurfaceBasis) -> Vec<u32> {
        let d = self.d as u32;
        match basis {
            SurfaceBasis::X => (0..d).map(|j| j * d).collect(),
            SurfaceBasis::Z => (0..d).collect(),
        }
    }

    fn ancillas(&self, basis: Option<SurfaceBasis>) -> Vec<u32> {
        self.plaquettes
            .iter()
            .filter(|p| basis.is_none_or(|b| p.basis == b))
            .map(|p| p.qubit)
            .collect()
    }

    /// CX pairs (control, target) of layer `k`, flattened.
    fn cx_layer(&self, k: usize) -> Vec<u32> {
        let mut out = Vec::new();
        for p in &self.plaquettes {
            if let Some(q) = p.partner(k) {
                match p.basis {
                    SurfaceBasis::X => out.extend([p.qubit, q]),
                    SurfaceBasis::Z => out.extend([q, p.qubit]),
                }
            }
        }
        out
    }
}

struct Tracker<'a> {
    layout: &'a Layout,
    basis: SurfaceBasis,
    previous: Vec<Option<usize>>,
}

impl Tracker<'_> {
    fn round(&mut self, b: &mut Builder, recs: &[usize]) {
        for (k, p) in self.layout.plaquettes.iter().enumerate() {
            let (x, y) = p.center;
            match self.previous[k] {
                Some(before) => b.detector(x, y, &[before, recs[k]]),
                None if p.basis == self.basis => b.detector(x, y, &[recs[k]]),
                None => {}
            }
            self.previous[k] = Some(recs[k]);
        }
        b.shift_time();
    }

    fn terminal(&mut self, b: &mut Builder, data: &[usize]) {
        let support: Vec<usize> = self.layout.logical(self.basis).iter().map(|&q| data[q as usize]).collect();
        b.observable(0, &support);
        for (k, p) in self.layout.plaquettes.iter().enumerate() {
            if p.basis != self.basis {
                continue;
            }
            let mut recs: Vec<usize> = self.previous[k].into_iter().collect();
            recs.extend(p.data().map(|q| data[q as usize]));
            let (x, y) = p.center;
            b.detector(x, y, &recs);
        }
    }
}

fn xor_sets(a: &BTreeSet<u32>, b: &BTreeSet<u32>) -> BTreeSet<u32> {
    a.symmetric_difference(b).copied().collect()
}

/// Noiseless circuit with the model's extraction scheme.
pub fn gen_surface_ideal(spec: &SurfaceSpec) -> Result<Circuit, GenerateError> {
    spec.validate()?;
    let layout = Layout::new(spec.distance);
    let d = spec.distance;
    let mut b = Builder::new();
    for j in 0..d {
        for i in 0..d {
            b.coords((j * d + i) as u32, (2 * i + 1) as f64, (2 * j + 1) as f64);
        }
    }
    for p in &layout.plaquettes {
        b.coords(p.qubit, p.center.0, p.center.1);
    }
    let data = layout.data();
    let ancillas = layout.ancillas(None);
    let x_ancillas = layout.ancillas(Some(SurfaceBasis::X));
    let x_memory = spec.basis == SurfaceBasis::X;
    let mut tracker = Tracker {
        layout: &layout,
        basis: spec.basis,
        previous: vec![None; layout.plaquettes.len()],
    };

    let finish_round = |b: &mut Builder, tracker: &mut Tracker, last: bool| {
        let mut qubits = ancillas.clone();
        if last {
            qubits.extend(&data);
        }
        let recs = b.measure(&qubits);
        if !last && spec.model == NoiseModel::Si1000 {
            b.gate(Opcode::R, &ancillas);
        }
        tracker.round(b, &recs[..ancillas.len()]);
        if last {
            tracker.terminal(b, &recs[ancillas.len()..]);
        }
    };

    match spec.model {
        NoiseModel::Sd6 => {
            // R, H, four CX layers, H, M.
            for r in 0..spec.rounds {
                let (first, last) = (r == 0, r + 1 == spec.rounds);
                b.gate(Opcode::R, &ancillas);
                if first {
                    b.gate(Opcode::R, &data);
                }
                b.tick();
                let mut h = x_ancillas.clone();
                if first && x_memory {
                    h.extend(&data);
                }
                b.gate(Opcode::H, &h);
                b.tick();
                for k in 0..4 {
                    b.gate(Opcode::Cx, &layout.cx_layer(k));
                    b.tick();
                }
                let mut h = x_ancillas.clone();
                if last && x_memory {
                    h.extend(&data);
                }
                b.gate(Opcode::H, &h);
                b.tick();
                finish_round(&mut b, &mut tracker, last);
                if !last {
                    b.tick();
                }
            }
        }
        _ => {
            // Each CX becomes H(target) CZ H(target); adjacent Hadamard
            // layers merge, and the measure step also resets.
            let targets: Vec<BTreeSet<u32>> = (0..4)
                .map(|k| layout.cx_layer(k).chunks(2).map(|p| p[1]).collect())
                .collect();
            let pairs: Vec<Vec<u32>> = (0..4).map(|k| layout.cx_layer(k)).collect();
            let xs: BTreeSet<u32> = x_ancillas.iter().copied().collect();
            let all_data: BTreeSet<u32> = data.iter().copied().collect();
            let mut all = data.clone();
            all.extend(&ancillas);
            b.gate(Opcode::R, &all);
            b.tick();
            for r in 0..spec.rounds {
                let (first, last) = (r == 0, r + 1 == spec.rounds);
                let mut h: Vec<BTreeSet<u32>> = Vec::new();
                let mut open = xor_sets(&targets[0], &xs);
                if first && x_memory {
                    open = xor_sets(&open, &all_data);
                }
                h.push(open);
                for k in 0..3 {
                    h.push(xor_sets(&targets[k], &targets[k + 1]));
                }
                let mut close = xor_sets(&targets[3], &xs);
                if last && x_memory {
                    close = xor_sets(&close, &all_data);
                }
                h.push(close);
                for k in 0..5 {
                    if !h[k].is_empty() {
                        b.gate(Opcode::H, &h[k].iter().copied().collect::<Vec<_>>());
                        b.tick();
                    }
                    if k < 4 {
                        b.gate(Opcode::Cz, &pairs[k]);
                        b.tick();
                    }
                }
                finish_round(&mut b, &mut tracker, last);
                if !last {
                    b.tick();
                }
            }
        }
    }
    Ok(b.finish())
}

/// Noisy surface code memory circuit, compressed into REPEAT blocks.
pub fn gen_surface(spec: &SurfaceSpec) -> Result<Circuit, GenerateError> {
    let ideal = gen_surface_ideal(spec)?;
    apply_noise_model(&ideal, spec.model, spec.p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plaquette_counts() {
        for d in [3usize, 5, 7] {
            let l = Layout::new(d);
            assert_eq!(l.plaquettes.len(), d * d - 1);
            let xs = l.plaquettes.iter().filter(|p| p.basis == SurfaceBasis::X).count();
            assert_eq!(xs, (d * d - 1) / 2);
        }
    }

    #[test]
    fn cx_layers_touch_each_qubit_once() {
        let l = Layout::new(5);
        for k in 0..4 {
            let layer = l.cx_layer(k);
            let set: BTreeSet<u32> = layer.iter().copied().collect();
            assert_eq!(set.len(), layer.len());
        }
    }

    #[test]
    fn qubit_count() {
        let spec = SurfaceSpec::new(5, NoiseModel::Sd6, 0.001, SurfaceBasis::Z);
        assert_eq!(gen_surface(&spec).unwrap().num_qubits(), 49);
    }
}
