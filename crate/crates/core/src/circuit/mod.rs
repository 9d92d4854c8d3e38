//! Circuit intermediate representation and its text format.
//!
//! The text format is line oriented: `NAME(arg, arg) target target`,
//! `REPEAT n {` ... `}` blocks, and `#` comments. Record targets are
//! written `rec[-k]` and refer to the k-th most recent measurement;
//! Pauli product targets are written `X1*Z2`.

mod compress;
mod flat;
mod parse;
mod validate;

use std::fmt;

use crate::pauli::Axis;

pub use compress::compress_repeats;
pub use flat::{unroll, FlatCircuit, FlatDetector, FlatOp, MeasureTarget};
pub use parse::ParseError;
pub use validate::{validate, Violation, ViolationKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Opcode {
    QubitCoords,
    R,
    H,
    CZyx,
    CXyz,
    Cx,
    Cz,
    M,
    Mpp,
    XError,
    Depolarize1,
    Depolarize2,
    CorrelatedMeasError,
    Detector,
    ObservableInclude,
    ShiftCoords,
    Tick,
}

impl Opcode {
    pub const ALL: [Opcode; 17] = [
        Opcode::QubitCoords,
        Opcode::R,
        Opcode::H,
        Opcode::CZyx,
        Opcode::CXyz,
        Opcode::Cx,
        Opcode::Cz,
        Opcode::M,
        Opcode::Mpp,
        Opcode::XError,
        Opcode::Depolarize1,
        Opcode::Depolarize2,
        Opcode::CorrelatedMeasError,
        Opcode::Detector,
        Opcode::ObservableInclude,
        Opcode::ShiftCoords,
        Opcode::Tick,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Opcode::QubitCoords => "QUBIT_COORDS",
            Opcode::R => "R",
            Opcode::H => "H",
            Opcode::CZyx => "C_ZYX",
            Opcode::CXyz => "C_XYZ",
            Opcode::Cx => "CX",
            Opcode::Cz => "CZ",
            Opcode::M => "M",
            Opcode::Mpp => "MPP",
            Opcode::XError => "X_ERROR",
            Opcode::Depolarize1 => "DEPOLARIZE1",
            Opcode::Depolarize2 => "DEPOLARIZE2",
            Opcode::CorrelatedMeasError => "CORRELATED_MEAS_ERROR",
            Opcode::Detector => "DETECTOR",
            Opcode::ObservableInclude => "OBSERVABLE_INCLUDE",
            Opcode::ShiftCoords => "SHIFT_COORDS",
            Opcode::Tick => "TICK",
        }
    }

    pub fn from_name(name: &str) -> Option<Opcode> {
        Opcode::ALL.iter().copied().find(|op| op.name() == name)
    }

    /// Noise channels whose single argument is a probability.
    pub fn is_noise(self) -> bool {
        matches!(
            self,
            Opcode::XError | Opcode::Depolarize1 | Opcode::Depolarize2 | Opcode::CorrelatedMeasError
        )
    }

    pub fn is_measurement(self) -> bool {
        matches!(self, Opcode::M | Opcode::Mpp)
    }

    /// Opcodes whose qubit targets are consumed in pairs.
    pub fn is_pairwise(self) -> bool {
        matches!(self, Opcode::Cx | Opcode::Cz | Opcode::Depolarize2)
    }

    fn target_kind(self) -> TargetKind {
        match self {
            Opcode::Mpp | Opcode::CorrelatedMeasError => TargetKind::Product,
            Opcode::Detector | Opcode::ObservableInclude => TargetKind::Rec,
            Opcode::ShiftCoords | Opcode::Tick => TargetKind::Nothing,
            _ => TargetKind::Qubit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TargetKind {
    Qubit,
    Rec,
    Product,
    Nothing,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Qubit(u32),
    /// `rec[-k]` with `k >= 1`.
    Rec(u32),
    /// Pauli product such as `X9*X3`.
    Product(Vec<(Axis, u32)>),
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Qubit(q) => write!(f, "{q}"),
            Target::Rec(k) => write!(f, "rec[-{k}]"),
            Target::Product(terms) => {
                for (i, (a, q)) in terms.iter().enumerate() {
                    if i > 0 {
                        f.write_str("*")?;
                    }
                    write!(f, "{}{}", a.letter(), q)?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instruction {
    pub op: Opcode,
    pub args: Vec<f64>,
    pub targets: Vec<Target>,
}

impl Instruction {
    pub fn new(op: Opcode, args: Vec<f64>, targets: Vec<Target>) -> Self {
        Instruction { op, args, targets }
    }

    pub fn qubits(op: Opcode, args: Vec<f64>, qubits: impl IntoIterator<Item = u32>) -> Self {
        Instruction::new(op, args, qubits.into_iter().map(Target::Qubit).collect())
    }

    pub fn tick() -> Self {
        Instruction::new(Opcode::Tick, vec![], vec![])
    }

    /// Qubit targets, for opcodes that take plain qubits.
    pub fn qubit_targets(&self) -> impl Iterator<Item = u32> + '_ {
        self.targets.iter().filter_map(|t| match t {
            Target::Qubit(q) => Some(*q),
            _ => None,
        })
    }

    /// Every qubit mentioned by the instruction.
    pub fn touched_qubits(&self) -> Vec<u32> {
        let mut out = Vec::new();
        if self.op == Opcode::QubitCoords {
            return out;
        }
        for t in &self.targets {
            match t {
                Target::Qubit(q) => out.push(*q),
                Target::Product(terms) => out.extend(terms.iter().map(|&(_, q)| q)),
                Target::Rec(_) => {}
            }
        }
        out
    }

    /// Number of measurement results this instruction records.
    pub fn measurement_count(&self) -> u64 {
        if self.op.is_measurement() {
            self.targets.len() as u64
        } else {
            0
        }
    }

    /// The measured-result flip probability of `M(p)` / `MPP(p)`.
    pub fn flip_probability(&self) -> f64 {
        if self.op.is_measurement() {
            self.args.first().copied().unwrap_or(0.0)
        } else {
            0.0
        }
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[f64]) -> fmt::Result {
    if args.is_empty() {
        return Ok(());
    }
    f.write_str("(")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        // Avoid printing "-0".
        let a = if *a == 0.0 { 0.0 } else { *a };
        write!(f, "{a}")?;
    }
    f.write_str(")")
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.op.name())?;
        write_args(f, &self.args)?;
        for t in &self.targets {
            write!(f, " {t}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Item {
    Instruction(Instruction),
    Repeat { count: u64, body: Circuit },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    pub items: Vec<Item>,
}

impl Circuit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, instruction: Instruction) {
        self.items.push(Item::Instruction(instruction));
    }

    pub fn push_repeat(&mut self, count: u64, body: Circuit) {
        self.items.push(Item::Repeat { count, body });
    }

    pub fn extend(&mut self, other: Circuit) {
        self.items.extend(other.items);
    }

    pub fn parse(text: &str) -> Result<Circuit, ParseError> {
        parse::parse(text)
    }

    /// One more than the largest qubit index mentioned anywhere.
    pub fn num_qubits(&self) -> u32 {
        let mut n = 0;
        self.visit(&mut |ins| {
            for t in &ins.targets {
                match t {
                    Target::Qubit(q) => n = n.max(q + 1),
                    Target::Product(terms) => {
                        for &(_, q) in terms {
                            n = n.max(q + 1);
                        }
                    }
                    Target::Rec(_) => {}
                }
            }
        });
        n
    }

    /// Totals with REPEAT multiplicities applied.
    fn weighted_sum(&self, f: &dyn Fn(&Instruction) -> u64) -> u64 {
        let mut total = 0u64;
        for item in &self.items {
            match item {
                Item::Instruction(ins) => total += f(ins),
                Item::Repeat { count, body } => total += count * body.weighted_sum(f),
            }
        }
        total
    }

    pub fn num_measurements(&self) -> u64 {
        self.weighted_sum(&|ins| ins.measurement_count())
    }

    pub fn num_detectors(&self) -> u64 {
        self.weighted_sum(&|ins| (ins.op == Opcode::Detector) as u64)
    }

    pub fn num_ticks(&self) -> u64 {
        self.weighted_sum(&|ins| (ins.op == Opcode::Tick) as u64)
    }

    /// One more than the largest observable index used.
    pub fn num_observables(&self) -> u32 {
        let mut n = 0;
        self.visit(&mut |ins| {
            if ins.op == Opcode::ObservableInclude {
                if let Some(&a) = ins.args.first() {
                    n = n.max(a as u32 + 1);
                }
            }
        });
        n
    }

    /// Visits every instruction once, ignoring REPEAT counts.
    pub fn visit(&self, f: &mut dyn FnMut(&Instruction)) {
        for item in &self.items {
            match item {
                Item::Instruction(ins) => f(ins),
                Item::Repeat { body, .. } => body.visit(f),
            }
        }
    }

    fn write_indented(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        let pad = "    ".repeat(depth);
        for item in &self.items {
            match item {
                Item::Instruction(ins) => writeln!(f, "{pad}{ins}")?,
                Item::Repeat { count, body } => {
                    writeln!(f, "{pad}REPEAT {count} {{")?;
                    body.write_indented(f, depth + 1)?;
                    writeln!(f, "{pad}}}")?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_indented(f, 0)
    }
}

impl std::str::FromStr for Circuit {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse::parse(s)
    }
}

/// Checks that do not need context beyond a single instruction. Used by
/// both the parser and [`validate`].
pub(crate) fn check_instruction(ins: &Instruction) -> Result<(), ViolationKind> {
    let op = ins.op;
    let kind = op.target_kind();
    for t in &ins.targets {
        let ok = matches!(
            (kind, t),
            (TargetKind::Qubit, Target::Qubit(_))
                | (TargetKind::Rec, Target::Rec(_))
                | (TargetKind::Product, Target::Product(_))
        );
        if !ok {
            return Err(ViolationKind::BadTarget {
                op: op.name(),
                target: t.to_string(),
            });
        }
        if let Target::Rec(0) = t {
            return Err(ViolationKind::BadTarget {
                op: op.name(),
                target: "rec[-0]".into(),
            });
        }
    }
    let arg_count_ok = match op {
        Opcode::R | Opcode::H | Opcode::CZyx | Opcode::CXyz | Opcode::Cx | Opcode::Cz | Opcode::Tick => ins.args.is_empty(),
        Opcode::M | Opcode::Mpp => ins.args.len() <= 1,
        Opcode::XError
        | Opcode::Depolarize1
        | Opcode::Depolarize2
        | Opcode::CorrelatedMeasError
        | Opcode::ObservableInclude => ins.args.len() == 1,
        Opcode::QubitCoords | Opcode::Detector | Opcode::ShiftCoords => true,
    };
    if !arg_count_ok {
        return Err(ViolationKind::ArgumentCount {
            op: op.name(),
            count: ins.args.len(),
        });
    }
    if op.is_noise() || op.is_measurement() {
        if let Some(&p) = ins.args.first() {
            if !(0.0..=1.0).contains(&p) {
                return Err(ViolationKind::ProbabilityOutOfRange { value: p });
            }
        }
    }
    if op == Opcode::ObservableInclude {
        let a = ins.args[0];
        if a < 0.0 || a.fract() != 0.0 || a > 63.0 {
            return Err(ViolationKind::BadObservableIndex { value: a });
        }
    }
    if ins.args.iter().any(|a| !a.is_finite()) {
        return Err(ViolationKind::ArgumentCount {
            op: op.name(),
            count: ins.args.len(),
        });
    }
    if op.is_pairwise() {
        if ins.targets.len() % 2 != 0 {
            return Err(ViolationKind::OddPairTargets { op: op.name() });
        }
        for pair in ins.targets.chunks(2) {
            if pair[0] == pair[1] {
                if let Target::Qubit(q) = pair[0] {
                    return Err(ViolationKind::RepeatedQubit { qubit: q });
                }
            }
        }
    }
    if kind == TargetKind::Product {
        for t in &ins.targets {
            if let Target::Product(terms) = t {
                if terms.is_empty() {
                    return Err(ViolationKind::BadTarget {
                        op: op.name(),
                        target: String::new(),
                    });
                }
                for (i, &(_, q)) in terms.iter().enumerate() {
                    if terms[..i].iter().any(|&(_, r)| r == q) {
                        return Err(ViolationKind::RepeatedQubit { qubit: q });
                    }
                }
                if op == Opcode::CorrelatedMeasError && terms.len() != 2 {
                    return Err(ViolationKind::BadTarget {
                        op: op.name(),
                        target: t.to_string(),
                    });
                }
            }
        }
    }
    if op == Opcode::QubitCoords && ins.targets.is_empty() {
        return Err(ViolationKind::BadTarget {
            op: op.name(),
            target: String::new(),
        });
    }
    Ok(())
}
