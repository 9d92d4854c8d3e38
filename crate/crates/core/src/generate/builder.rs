use crate::circuit::{Circuit, Instruction, Opcode, Target};
use crate::pauli::Axis;

/// Accumulates an ideal circuit layer by layer, tracking absolute
/// measurement indices so detectors can be given in absolute terms.
#[derive(Debug, Default)]
pub(crate) struct Builder {
    circuit: Circuit,
    measured: usize,
}

impl Builder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn coords(&mut self, q: u32, x: f64, y: f64) {
        self.circuit.push(Instruction::qubits(Opcode::QubitCoords, vec![x, y], [q]));
    }

    pub fn gate(&mut self, op: Opcode, qubits: &[u32]) {
        if !qubits.is_empty() {
            self.circuit.push(Instruction::qubits(op, vec![], qubits.iter().copied()));
        }
    }

    /// Z-basis measurement; returns the absolute record indices.
    pub fn measure(&mut self, qubits: &[u32]) -> Vec<usize> {
        self.gate(Opcode::M, qubits);
        self.take(qubits.len())
    }

    pub fn mpp(&mut self, products: &[Vec<(Axis, u32)>]) -> Vec<usize> {
        if !products.is_empty() {
            let targets = products.iter().map(|p| Target::Product(p.clone())).collect();
            self.circuit.push(Instruction::new(Opcode::Mpp, vec![], targets));
        }
        self.take(products.len())
    }

    fn take(&mut self, n: usize) -> Vec<usize> {
        let first = self.measured;
        self.measured += n;
        (first..first + n).collect()
    }

    fn recs(&self, absolute: &[usize]) -> Vec<Target> {
        let mut sorted = absolute.to_vec();
        sorted.sort_unstable();
        sorted
            .into_iter()
            .map(|m| Target::Rec((self.measured - m) as u32))
            .collect()
    }

    pub fn detector(&mut self, x: f64, y: f64, absolute: &[usize]) {
        let t = self.recs(absolute);
        self.circuit.push(Instruction::new(Opcode::Detector, vec![x, y, 0.0], t));
    }

    pub fn observable(&mut self, index: u32, absolute: &[usize]) {
        if absolute.is_empty() {
            return;
        }
        let t = self.recs(absolute);
        self.circuit.push(Instruction::new(Opcode::ObservableInclude, vec![index as f64], t));
    }

    pub fn shift_time(&mut self) {
        self.circuit.push(Instruction::new(Opcode::ShiftCoords, vec![0.0, 0.0, 1.0], vec![]));
    }

    pub fn tick(&mut self) {
        self.circuit.push(Instruction::tick());
    }

    pub fn finish(self) -> Circuit {
        self.circuit
    }
}
