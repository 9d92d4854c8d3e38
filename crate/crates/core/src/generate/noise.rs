use std::collections::BTreeSet;

use super::{check_strength, GenerateError, NoiseModel};
use crate::circuit::{compress_repeats, Circuit, Instruction, Item, Opcode, Target};

/// Per-model channel strengths.
struct Strengths {
    clifford1: f64,
    clifford2: f64,
    init: f64,
    measure: f64,
    idle: f64,
    resonator: f64,
}

impl Strengths {
    fn new(model: NoiseModel, p: f64) -> Strengths {
        match model {
            NoiseModel::Si1000 => Strengths {
                clifford1: p / 10.0,
                clifford2: p,
                init: 2.0 * p,
                measure: 5.0 * p,
                idle: p / 10.0,
                resonator: 2.0 * p,
            },
            _ => Strengths {
                clifford1: p,
                clifford2: p,
                init: p,
                measure: p,
                idle: p,
                resonator: 0.0,
            },
        }
    }
}

fn allowed(model: NoiseModel, op: Opcode) -> bool {
    match op {
        Opcode::R | Opcode::M | Opcode::H | Opcode::CZyx | Opcode::CXyz => true,
        Opcode::Cx => model == NoiseModel::Sd6,
        Opcode::Cz => model == NoiseModel::Si1000,
        Opcode::Mpp => matches!(model, NoiseModel::Em3 | NoiseModel::Em3Tweaked),
        _ => false,
    }
}

fn is_annotation(op: Opcode) -> bool {
    matches!(
        op,
        Opcode::QubitCoords | Opcode::Detector | Opcode::ObservableInclude | Opcode::ShiftCoords
    )
}

fn expand(circuit: &Circuit, out: &mut Vec<Instruction>) {
    for item in &circuit.items {
        match item {
            Item::Instruction(ins) => out.push(ins.clone()),
            Item::Repeat { count, body } => {
                for _ in 0..*count {
                    expand(body, out);
                }
            }
        }
    }
}

fn channel(out: &mut Circuit, op: Opcode, p: f64, qubits: impl IntoIterator<Item = u32>) {
    let qubits: Vec<u32> = qubits.into_iter().collect();
    if p > 0.0 && !qubits.is_empty() {
        out.push(Instruction::qubits(op, vec![p], qubits));
    }
}

fn product_pairs(ins: &Instruction) -> Result<Vec<u32>, GenerateError> {
    let mut pairs = Vec::new();
    for t in &ins.targets {
        match t {
            Target::Product(terms) if terms.len() == 2 => pairs.extend(terms.iter().map(|&(_, q)| q)),
            _ => {
                return Err(GenerateError::InvalidSpec(
                    "entangling-measurement noise needs two-qubit products".into(),
                ))
            }
        }
    }
    Ok(pairs)
}

/// Inserts the model's noise channels into an ideal circuit.
///
/// Time steps are delimited by TICK. A qubit counts as idle only between its
/// first and last use. The result is re-compressed into REPEAT blocks.
pub fn apply_noise_model(ideal: &Circuit, model: NoiseModel, p: f64) -> Result<Circuit, GenerateError> {
    check_strength(p)?;
    let s = Strengths::new(model, p);
    if s.measure > 1.0 || s.init > 1.0 {
        return Err(GenerateError::BadStrength(p));
    }

    let mut flat = Vec::new();
    expand(ideal, &mut flat);
    let mut layers: Vec<Vec<Instruction>> = vec![Vec::new()];
    for ins in flat {
        if ins.op == Opcode::Tick {
            layers.push(Vec::new());
        } else {
            layers.last_mut().unwrap().push(ins);
        }
    }

    let mut first: Vec<Option<usize>> = Vec::new();
    let mut last: Vec<usize> = Vec::new();
    for (k, layer) in layers.iter().enumerate() {
        for ins in layer {
            if is_annotation(ins.op) || ins.op.is_noise() {
                continue;
            }
            if !allowed(model, ins.op) {
                return Err(GenerateError::GateOutsideModel {
                    model,
                    gate: ins.op.name().to_string(),
                });
            }
            for q in ins.touched_qubits() {
                let q = q as usize;
                if first.len() <= q {
                    first.resize(q + 1, None);
                    last.resize(q + 1, 0);
                }
                first[q].get_or_insert(k);
                last[q] = k;
            }
        }
    }

    let mut out = Circuit::new();
    let n_layers = layers.len();
    for (k, layer) in layers.into_iter().enumerate() {
        let cut = layer
            .iter()
            .rposition(|ins| !is_annotation(ins.op))
            .map_or(0, |i| i + 1);
        let mut used = BTreeSet::new();
        let mut measured_or_reset = BTreeSet::new();
        for ins in &layer[..cut] {
            if ins.op.is_noise() {
                out.push(ins.clone());
                continue;
            }
            let qubits = ins.touched_qubits();
            used.extend(qubits.iter().copied());
            match ins.op {
                Opcode::R => {
                    measured_or_reset.extend(qubits.iter().copied());
                    out.push(ins.clone());
                    channel(&mut out, Opcode::XError, s.init, qubits);
                }
                Opcode::M => {
                    measured_or_reset.extend(qubits.iter().copied());
                    channel(&mut out, Opcode::XError, s.measure, qubits);
                    out.push(Instruction::new(Opcode::M, vec![], ins.targets.clone()));
                }
                Opcode::H | Opcode::CZyx | Opcode::CXyz => {
                    out.push(ins.clone());
                    channel(&mut out, Opcode::Depolarize1, s.clifford1, qubits);
                }
                Opcode::Cx | Opcode::Cz => {
                    out.push(ins.clone());
                    channel(&mut out, Opcode::Depolarize2, s.clifford2, qubits);
                }
                Opcode::Mpp => {
                    measured_or_reset.extend(qubits.iter().copied());
                    let pairs = product_pairs(ins)?;
                    if model == NoiseModel::Em3Tweaked {
                        channel(&mut out, Opcode::Depolarize2, p, pairs);
                        let args = if p > 0.0 { vec![p] } else { vec![] };
                        out.push(Instruction::new(Opcode::Mpp, args, ins.targets.clone()));
                    } else {
                        out.push(Instruction::new(Opcode::Mpp, vec![], ins.targets.clone()));
                        if p > 0.0 {
                            out.push(Instruction::new(Opcode::CorrelatedMeasError, vec![p], ins.targets.clone()));
                        }
                    }
                }
                _ => out.push(ins.clone()),
            }
        }
        let live: Vec<u32> = (0..first.len())
            .filter(|&q| first[q].is_some_and(|f| f <= k) && k <= last[q])
            .map(|q| q as u32)
            .collect();
        channel(
            &mut out,
            Opcode::Depolarize1,
            s.idle,
            live.iter().copied().filter(|q| !used.contains(q)),
        );
        if !measured_or_reset.is_empty() {
            channel(
                &mut out,
                Opcode::Depolarize1,
                s.resonator,
                live.iter().copied().filter(|q| !measured_or_reset.contains(q)),
            );
        }
        for ins in &layer[cut..] {
            out.push(ins.clone());
        }
        if k + 1 < n_layers {
            out.push(Instruction::tick());
        }
    }
    Ok(compress_repeats(&out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noisy(text: &str, model: NoiseModel, p: f64) -> String {
        apply_noise_model(&Circuit::parse(text).unwrap(), model, p)
            .unwrap()
            .to_string()
    }

    #[test]
    fn zero_strength_adds_nothing() {
        let text = "R 0 1\nTICK\nCX 0 1\nTICK\nM 0 1\n";
        let out = Circuit::parse(&noisy(text, NoiseModel::Sd6, 0.0)).unwrap();
        let mut noise = 0;
        out.visit(&mut |ins| noise += ins.op.is_noise() as usize);
        assert_eq!(noise, 0);
    }

    #[test]
    fn si1000_measurement_layer() {
        let text = "R 0 1 2\nTICK\nCZ 0 1\nTICK\nM 2\nDETECTOR rec[-1]\nTICK\nM 0 1\n";
        let out = noisy(text, NoiseModel::Si1000, 0.01);
        let expected = "R 0 1 2\nX_ERROR(0.02) 0 1 2\nTICK\nCZ 0 1\nDEPOLARIZE2(0.01) 0 1\nDEPOLARIZE1(0.001) 2\nTICK\n\
                        X_ERROR(0.05) 2\nM 2\nDEPOLARIZE1(0.001) 0 1\nDEPOLARIZE1(0.02) 0 1\nDETECTOR rec[-1]\nTICK\n\
                        X_ERROR(0.05) 0 1\nM 0 1\n";
        assert_eq!(out, expected);
    }

    #[test]
    fn em3_measurements() {
        let text = "MPP X0*X1\n";
        assert_eq!(
            noisy(text, NoiseModel::Em3, 0.001),
            "MPP X0*X1\nCORRELATED_MEAS_ERROR(0.001) X0*X1\n"
        );
        assert_eq!(
            noisy(text, NoiseModel::Em3Tweaked, 0.001),
            "DEPOLARIZE2(0.001) 0 1\nMPP(0.001) X0*X1\n"
        );
    }

    #[test]
    fn rejects_foreign_gates() {
        let c = Circuit::parse("CZ 0 1\n").unwrap();
        assert!(matches!(
            apply_noise_model(&c, NoiseModel::Sd6, 0.001),
            Err(GenerateError::GateOutsideModel { .. })
        ));
        let c = Circuit::parse("MPP X0*X1\n").unwrap();
        assert!(apply_noise_model(&c, NoiseModel::Si1000, 0.001).is_err());
    }
}
