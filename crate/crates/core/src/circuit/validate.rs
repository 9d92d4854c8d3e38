use thiserror::Error;

use super::{check_instruction, Circuit, Item, Opcode, Target};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ViolationKind {
    #[error("probability {value} is outside [0, 1]")]
    ProbabilityOutOfRange { value: f64 },
    #[error("record lookback rec[-{lookback}] reaches before the first measurement")]
    LookbackBeforeStart { lookback: u32 },
    #[error("qubit {qubit} repeated where distinct qubits are required")]
    RepeatedQubit { qubit: u32 },
    #[error("{op} needs an even number of targets")]
    OddPairTargets { op: &'static str },
    #[error("{op} does not accept {count} arguments")]
    ArgumentCount { op: &'static str, count: usize },
    #[error("{op} does not accept target '{target}'")]
    BadTarget { op: &'static str, target: String },
    #[error("observable index {value} is not an integer in 0..=63")]
    BadObservableIndex { value: f64 },
    #[error("CORRELATED_MEAS_ERROR must directly follow an MPP with the same targets")]
    CorrelatedWithoutMpp,
    #[error("REPEAT count must be positive")]
    EmptyRepeat,
}

/// A rule violation and where it occurred. `location` lists item indices
/// from the top level down into nested REPEAT bodies.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub location: Vec<usize>,
    pub kind: ViolationKind,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let path: Vec<String> = self.location.iter().map(|i| i.to_string()).collect();
        write!(f, "item {}: {}", path.join("/"), self.kind)
    }
}

/// Lists every rule violation; an empty result means the circuit is valid.
pub fn validate(circuit: &Circuit) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut measured = 0u64;
    walk(circuit, &mut Vec::new(), &mut measured, &mut out);
    out
}

fn walk(circuit: &Circuit, path: &mut Vec<usize>, measured: &mut u64, out: &mut Vec<Violation>) {
    for (i, item) in circuit.items.iter().enumerate() {
        path.push(i);
        match item {
            Item::Instruction(ins) => {
                let mut push = |kind| {
                    out.push(Violation {
                        location: path.clone(),
                        kind,
                    })
                };
                if let Err(kind) = check_instruction(ins) {
                    push(kind);
                }
                for t in &ins.targets {
                    if let Target::Rec(k) = t {
                        if *k as u64 > *measured {
                            push(ViolationKind::LookbackBeforeStart { lookback: *k });
                        }
                    }
                }
                if ins.op == Opcode::CorrelatedMeasError {
                    let ok = i > 0
                        && matches!(&circuit.items[i - 1], Item::Instruction(prev)
                            if prev.op == Opcode::Mpp && prev.targets == ins.targets);
                    if !ok {
                        push(ViolationKind::CorrelatedWithoutMpp);
                    }
                }
                *measured += ins.measurement_count();
            }
            Item::Repeat { count, body } => {
                if *count == 0 {
                    out.push(Violation {
                        location: path.clone(),
                        kind: ViolationKind::EmptyRepeat,
                    });
                }
                // The first iteration has the shortest history, so checking
                // it covers every later one.
                let before = *measured;
                walk(body, path, measured, out);
                let per = *measured - before;
                *measured = before + per * *count;
            }
        }
        path.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Instruction;

    #[test]
    fn programmatic_bad_probability() {
        let mut c = Circuit::new();
        c.push(Instruction::qubits(Opcode::H, vec![], [0]));
        c.push(Instruction::qubits(Opcode::XError, vec![1.5], [0]));
        let v = validate(&c);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].location, vec![1]);
        assert!(matches!(v[0].kind, ViolationKind::ProbabilityOutOfRange { .. }));
    }

    #[test]
    fn lookback_checks_first_iteration() {
        let c = Circuit::parse("M 0\nREPEAT 3 {\n M 0\n DETECTOR rec[-1] rec[-2]\n}\n").unwrap();
        assert!(validate(&c).is_empty());
        let c = Circuit::parse("REPEAT 3 {\n M 0\n DETECTOR rec[-1] rec[-2]\n}\n").unwrap();
        let v = validate(&c);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].location, vec![0, 1]);
    }

    #[test]
    fn correlated_needs_matching_mpp() {
        let ok = Circuit::parse("MPP(0.1) X0*X1\nCORRELATED_MEAS_ERROR(0.1) X0*X1\n").unwrap();
        assert!(validate(&ok).is_empty());
        let bad = Circuit::parse("MPP(0.1) X0*X1\nCORRELATED_MEAS_ERROR(0.1) Y0*Y1\n").unwrap();
        assert_eq!(validate(&bad)[0].kind, ViolationKind::CorrelatedWithoutMpp);
    }
}
