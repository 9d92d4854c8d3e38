use super::{validate, Circuit, Instruction, Item, Opcode, Target, Violation};
use crate::pauli::{Axis, Clifford};

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureTarget {
    /// Single-qubit Z-basis measurement.
    Z(u32),
    Product(Vec<(Axis, u32)>),
}

/// One operation of a fully unrolled circuit. Measurement indices are
/// absolute positions in the measurement record.
#[derive(Debug, Clone, PartialEq)]
pub enum FlatOp {
    Reset(Vec<u32>),
    /// Two-qubit gates list their targets as consecutive pairs.
    Gate { gate: Clifford, targets: Vec<u32> },
    Measure {
        targets: Vec<MeasureTarget>,
        flip: f64,
        first: usize,
    },
    XError { p: f64, targets: Vec<u32> },
    Depolarize1 { p: f64, targets: Vec<u32> },
    Depolarize2 { p: f64, targets: Vec<u32> },
    /// Each entry is the two product qubits and the measurement they refer to.
    CorrelatedMeasError { p: f64, items: Vec<(u32, u32, usize)> },
    /// Marks where detector `index` was declared.
    Detector(usize),
    Observable { index: u32, measurements: Vec<usize> },
    Tick,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatDetector {
    /// Absolute coordinates (all shifts applied).
    pub coords: Vec<f64>,
    /// Sorted measurement indices, with pairs of duplicates cancelled.
    pub measurements: Vec<usize>,
    /// Number of TICKs preceding the declaration.
    pub tick: usize,
}

/// A circuit with REPEAT blocks expanded, coordinate shifts applied and
/// record lookbacks resolved.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlatCircuit {
    pub ops: Vec<FlatOp>,
    pub num_qubits: u32,
    pub num_measurements: usize,
    pub num_ticks: usize,
    pub detectors: Vec<FlatDetector>,
    /// Measurement sets (sorted, parity reduced) for each observable.
    pub observables: Vec<Vec<usize>>,
    pub qubit_coords: Vec<(u32, Vec<f64>)>,
}

fn parity_reduce(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    let mut out: Vec<usize> = Vec::with_capacity(v.len());
    for m in v {
        if out.last() == Some(&m) {
            out.pop();
        } else {
            out.push(m);
        }
    }
    out
}

struct Unroller {
    flat: FlatCircuit,
    shift: Vec<f64>,
    observables: Vec<Vec<usize>>,
}

/// Expands a valid circuit. Fails with the validation violations otherwise.
pub fn unroll(circuit: &Circuit) -> Result<FlatCircuit, Vec<Violation>> {
    let violations = validate(circuit);
    if !violations.is_empty() {
        return Err(violations);
    }
    let mut u = Unroller {
        flat: FlatCircuit {
            num_qubits: circuit.num_qubits(),
            ..Default::default()
        },
        shift: Vec::new(),
        observables: Vec::new(),
    };
    u.walk(circuit);
    u.flat.observables = u.observables.into_iter().map(parity_reduce).collect();
    Ok(u.flat)
}

impl Unroller {
    fn walk(&mut self, circuit: &Circuit) {
        for item in &circuit.items {
            match item {
                Item::Instruction(ins) => self.push(ins),
                Item::Repeat { count, body } => {
                    for _ in 0..*count {
                        self.walk(body);
                    }
                }
            }
        }
    }

    fn resolve(&self, t: &Target) -> usize {
        match t {
            Target::Rec(k) => self.flat.num_measurements - *k as usize,
            _ => unreachable!("validated record target"),
        }
    }

    fn shifted(&self, args: &[f64]) -> Vec<f64> {
        args.iter()
            .enumerate()
            .map(|(i, a)| a + self.shift.get(i).copied().unwrap_or(0.0))
            .collect()
    }

    fn push(&mut self, ins: &Instruction) {
        let qubits = || ins.qubit_targets().collect::<Vec<u32>>();
        let p = ins.args.first().copied().unwrap_or(0.0);
        let op = match ins.op {
            Opcode::QubitCoords => {
                let coords = self.shifted(&ins.args);
                for q in ins.qubit_targets() {
                    self.flat.qubit_coords.push((q, coords.clone()));
                }
                return;
            }
            Opcode::ShiftCoords => {
                if self.shift.len() < ins.args.len() {
                    self.shift.resize(ins.args.len(), 0.0);
                }
                for (s, a) in self.shift.iter_mut().zip(&ins.args) {
                    *s += a;
                }
                return;
            }
            Opcode::R => FlatOp::Reset(qubits()),
            Opcode::H => FlatOp::Gate {
                gate: Clifford::H,
                targets: qubits(),
            },
            Opcode::CZyx => FlatOp::Gate {
                gate: Clifford::CZyx,
                targets: qubits(),
            },
            Opcode::CXyz => FlatOp::Gate {
                gate: Clifford::CXyz,
                targets: qubits(),
            },
            Opcode::Cx => FlatOp::Gate {
                gate: Clifford::Cx,
                targets: qubits(),
            },
            Opcode::Cz => FlatOp::Gate {
                gate: Clifford::Cz,
                targets: qubits(),
            },
            Opcode::M | Opcode::Mpp => {
                let first = self.flat.num_measurements;
                let targets: Vec<MeasureTarget> = ins
                    .targets
                    .iter()
                    .map(|t| match t {
                        Target::Qubit(q) => MeasureTarget::Z(*q),
                        Target::Product(terms) => MeasureTarget::Product(terms.clone()),
                        Target::Rec(_) => unreachable!(),
                    })
                    .collect();
                self.flat.num_measurements += targets.len();
                FlatOp::Measure {
                    targets,
                    flip: ins.flip_probability(),
                    first,
                }
            }
            Opcode::XError => FlatOp::XError { p, targets: qubits() },
            Opcode::Depolarize1 => FlatOp::Depolarize1 { p, targets: qubits() },
            Opcode::Depolarize2 => FlatOp::Depolarize2 { p, targets: qubits() },
            Opcode::CorrelatedMeasError => {
                let k = ins.targets.len();
                let base = self.flat.num_measurements - k;
                let items = ins
                    .targets
                    .iter()
                    .enumerate()
                    .map(|(i, t)| match t {
                        Target::Product(terms) => (terms[0].1, terms[1].1, base + i),
                        _ => unreachable!(),
                    })
                    .collect();
                FlatOp::CorrelatedMeasError { p, items }
            }
            Opcode::Detector => {
                let measurements = parity_reduce(ins.targets.iter().map(|t| self.resolve(t)).collect());
                let index = self.flat.detectors.len();
                self.flat.detectors.push(FlatDetector {
                    coords: self.shifted(&ins.args),
                    measurements,
                    tick: self.flat.num_ticks,
                });
                FlatOp::Detector(index)
            }
            Opcode::ObservableInclude => {
                let index = ins.args[0] as u32;
                let measurements: Vec<usize> = ins.targets.iter().map(|t| self.resolve(t)).collect();
                if self.observables.len() <= index as usize {
                    self.observables.resize(index as usize + 1, Vec::new());
                }
                self.observables[index as usize].extend(&measurements);
                FlatOp::Observable { index, measurements }
            }
            Opcode::Tick => {
                self.flat.num_ticks += 1;
                FlatOp::Tick
            }
        };
        self.flat.ops.push(op);
    }
}

impl FlatCircuit {
    pub fn num_detectors(&self) -> usize {
        self.detectors.len()
    }

    pub fn num_observables(&self) -> usize {
        self.observables.len()
    }

    /// Renders the unrolled circuit in the text format, with absolute
    /// coordinates and no SHIFT_COORDS.
    pub fn to_circuit(&self) -> Circuit {
        let mut c = Circuit::new();
        for (q, coords) in &self.qubit_coords {
            c.push(Instruction::qubits(Opcode::QubitCoords, coords.clone(), [*q]));
        }
        let mut measured = 0usize;
        let rec = |measured: usize, m: usize| Target::Rec((measured - m) as u32);
        for op in &self.ops {
            let ins = match op {
                FlatOp::Reset(t) => Instruction::qubits(Opcode::R, vec![], t.iter().copied()),
                FlatOp::Gate { gate, targets } => {
                    let code = match gate {
                        Clifford::H => Opcode::H,
                        Clifford::CZyx => Opcode::CZyx,
                        Clifford::CXyz => Opcode::CXyz,
                        Clifford::Cx => Opcode::Cx,
                        Clifford::Cz => Opcode::Cz,
                        Clifford::I => unreachable!("not produced by the parser"),
                    };
                    Instruction::qubits(code, vec![], targets.iter().copied())
                }
                FlatOp::Measure { targets, flip, .. } => {
                    measured += targets.len();
                    let args = if *flip > 0.0 { vec![*flip] } else { vec![] };
                    let is_m = targets.iter().all(|t| matches!(t, MeasureTarget::Z(_)));
                    if is_m {
                        let qs = targets.iter().map(|t| match t {
                            MeasureTarget::Z(q) => *q,
                            _ => unreachable!(),
                        });
                        Instruction::qubits(Opcode::M, args, qs)
                    } else {
                        let ts = targets
                            .iter()
                            .map(|t| match t {
                                MeasureTarget::Z(q) => Target::Product(vec![(Axis::Z, *q)]),
                                MeasureTarget::Product(terms) => Target::Product(terms.clone()),
                            })
                            .collect();
                        Instruction::new(Opcode::Mpp, args, ts)
                    }
                }
                FlatOp::XError { p, targets } => Instruction::qubits(Opcode::XError, vec![*p], targets.iter().copied()),
                FlatOp::Depolarize1 { p, targets } => {
                    Instruction::qubits(Opcode::Depolarize1, vec![*p], targets.iter().copied())
                }
                FlatOp::Depolarize2 { p, targets } => {
                    Instruction::qubits(Opcode::Depolarize2, vec![*p], targets.iter().copied())
                }
                FlatOp::CorrelatedMeasError { p, items } => {
                    // The preceding MPP carries the product axes.
                    let prev = match c.items.last() {
                        Some(Item::Instruction(prev)) if prev.op == Opcode::Mpp => prev.targets.clone(),
                        _ => items
                            .iter()
                            .map(|&(a, b, _)| Target::Product(vec![(Axis::Z, a), (Axis::Z, b)]))
                            .collect(),
                    };
                    Instruction::new(Opcode::CorrelatedMeasError, vec![*p], prev)
                }
                FlatOp::Detector(i) => {
                    let d = &self.detectors[*i];
                    Instruction::new(
                        Opcode::Detector,
                        d.coords.clone(),
                        d.measurements.iter().map(|&m| rec(measured, m)).collect(),
                    )
                }
                FlatOp::Observable { index, measurements } => Instruction::new(
                    Opcode::ObservableInclude,
                    vec![*index as f64],
                    measurements.iter().map(|&m| rec(measured, m)).collect(),
                ),
                FlatOp::Tick => Instruction::tick(),
            };
            c.push(ins);
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolves_records_and_shifts() {
        let c = Circuit::parse(
            "R 0\nREPEAT 2 {\n M 0\n DETECTOR(1, 0, 0) rec[-1]\n SHIFT_COORDS(0, 0, 1)\n TICK\n}\nOBSERVABLE_INCLUDE(0) rec[-1] rec[-2]\n",
        )
        .unwrap();
        let f = unroll(&c).unwrap();
        assert_eq!(f.num_measurements, 2);
        assert_eq!(f.detectors[0].coords, vec![1.0, 0.0, 0.0]);
        assert_eq!(f.detectors[1].coords, vec![1.0, 0.0, 1.0]);
        assert_eq!(f.detectors[1].measurements, vec![1]);
        assert_eq!(f.detectors[1].tick, 1);
        assert_eq!(f.observables, vec![vec![0, 1]]);
    }

    #[test]
    fn duplicate_records_cancel() {
        let c = Circuit::parse("M 0 1\nDETECTOR rec[-1] rec[-2] rec[-1]\n").unwrap();
        let f = unroll(&c).unwrap();
        assert_eq!(f.detectors[0].measurements, vec![0]);
    }
}
