//! Sparse Pauli strings with phases, products, commutation and
//! conjugation by the Clifford gates used in this crate.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PauliError {
    #[error("{gate:?} takes {expected} targets, got {got}")]
    Arity { gate: Clifford, expected: usize, got: usize },
    #[error("target {0} repeated")]
    RepeatedTarget(u32),
}

/// A single-qubit non-identity Pauli.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    /// Symplectic bits `(x, z)`.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Axis::X => (true, false),
            Axis::Y => (true, true),
            Axis::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Option<Axis> {
        match (x, z) {
            (false, false) => None,
            (true, false) => Some(Axis::X),
            (true, true) => Some(Axis::Y),
            (false, true) => Some(Axis::Z),
        }
    }

    pub fn letter(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }

    pub fn from_letter(c: char) -> Option<Axis> {
        match c {
            'X' | 'x' => Some(Axis::X),
            'Y' | 'y' => Some(Axis::Y),
            'Z' | 'z' => Some(Axis::Z),
            _ => None,
        }
    }

    /// The remaining axis, given two distinct ones.
    pub fn third(a: Axis, b: Axis) -> Axis {
        debug_assert_ne!(a, b);
        match (a, b) {
            (Axis::X, Axis::Y) | (Axis::Y, Axis::X) => Axis::Z,
            (Axis::Y, Axis::Z) | (Axis::Z, Axis::Y) => Axis::X,
            _ => Axis::Y,
        }
    }
}

/// Power of `i` multiplying a Pauli product, stored mod 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: i32) -> Phase {
        Phase(k.rem_euclid(4) as u8)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn mul(self, other: Phase) -> Phase {
        Phase((self.0 + other.0) % 4)
    }

    pub fn is_real(self) -> bool {
        self.0 % 2 == 0
    }
}

/// Exponent `g` such that `P1 * P2 = i^g * P(x1^x2, z1^z2)`, with
/// `Y = i X Z`.
fn product_exponent(a: (bool, bool), b: (bool, bool)) -> i32 {
    let (x1, z1) = (a.0 as i32, a.1 as i32);
    let (x2, z2) = (b.0 as i32, b.1 as i32);
    match (x1, z1) {
        (0, 0) => 0,
        (1, 1) => z2 - x2,
        (1, 0) => z2 * (2 * x2 - 1),
        _ => x2 * (1 - 2 * z2),
    }
}

/// Clifford gates with a Pauli conjugation rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clifford {
    /// Identity (a wait step).
    I,
    H,
    /// Period-3 axis cycle sending X to Z, Z to Y and Y to X.
    CZyx,
    /// Inverse of [`Clifford::CZyx`].
    CXyz,
    Cx,
    Cz,
}

impl Clifford {
    pub fn arity(self) -> usize {
        match self {
            Clifford::I | Clifford::H | Clifford::CZyx | Clifford::CXyz => 1,
            Clifford::Cx | Clifford::Cz => 2,
        }
    }

    pub fn inverse(self) -> Clifford {
        match self {
            Clifford::CZyx => Clifford::CXyz,
            Clifford::CXyz => Clifford::CZyx,
            g => g,
        }
    }
}

/// Sparse Pauli operator: a phase times a tensor product of
/// single-qubit Paulis. Qubits not present carry the identity.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PauliString {
    pub phase: Phase,
    terms: BTreeMap<u32, Axis>,
}

impl PauliString {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn single(qubit: u32, axis: Axis) -> Self {
        let mut p = Self::default();
        p.terms.insert(qubit, axis);
        p
    }

    /// Product of the same axis on every listed qubit.
    pub fn uniform(qubits: impl IntoIterator<Item = u32>, axis: Axis) -> Self {
        let mut p = Self::default();
        for q in qubits {
            p = p.mul(&PauliString::single(q, axis));
        }
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (u32, Axis)>) -> Self {
        let mut p = Self::default();
        for (q, a) in terms {
            p = p.mul(&PauliString::single(q, a));
        }
        p
    }

    pub fn get(&self, qubit: u32) -> Option<Axis> {
        self.terms.get(&qubit).copied()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, Axis)> + '_ {
        self.terms.iter().map(|(&q, &a)| (q, a))
    }

    pub fn weight(&self) -> usize {
        self.terms.len()
    }

    pub fn is_identity(&self) -> bool {
        self.terms.is_empty()
    }

    /// Drops the phase.
    pub fn unsigned(&self) -> PauliString {
        PauliString {
            phase: Phase::ONE,
            terms: self.terms.clone(),
        }
    }

    fn set_bits(&mut self, qubit: u32, x: bool, z: bool) {
        match Axis::from_bits(x, z) {
            Some(a) => {
                self.terms.insert(qubit, a);
            }
            None => {
                self.terms.remove(&qubit);
            }
        }
    }

    fn bits(&self, qubit: u32) -> (bool, bool) {
        self.get(qubit).map_or((false, false), Axis::bits)
    }

    /// Operator product `self * other`.
    pub fn mul(&self, other: &PauliString) -> PauliString {
        let mut out = self.clone();
        let mut g = (self.phase.power() + other.phase.power()) as i32;
        for (&q, &b) in &other.terms {
            let a = out.bits(q);
            let b = b.bits();
            g += product_exponent(a, b);
            out.set_bits(q, a.0 ^ b.0, a.1 ^ b.1);
        }
        out.phase = Phase::from_power(g);
        out
    }

    pub fn commutes(&self, other: &PauliString) -> bool {
        let (small, large) = if self.weight() <= other.weight() {
            (self, other)
        } else {
            (other, self)
        };
        let mut anti = false;
        for (&q, &a) in &small.terms {
            if let Some(b) = large.terms.get(&q) {
                if a != *b {
                    anti = !anti;
                }
            }
        }
        !anti
    }

    /// Image of a single-qubit generator (`X` when `x_gen`, else `Z`)
    /// on `targets[slot]` under `U . U^dagger`.
    fn generator_image(gate: Clifford, targets: &[u32], slot: usize, x_gen: bool) -> PauliString {
        use Axis::*;
        let q = targets[slot];
        match gate {
            Clifford::I => PauliString::single(q, if x_gen { X } else { Z }),
            Clifford::H => PauliString::single(q, if x_gen { Z } else { X }),
            Clifford::CZyx => PauliString::single(q, if x_gen { Z } else { Y }),
            Clifford::CXyz => PauliString::single(q, if x_gen { Y } else { X }),
            Clifford::Cx => {
                let (c, t) = (targets[0], targets[1]);
                match (slot, x_gen) {
                    (0, true) => PauliString::from_terms([(c, X), (t, X)]),
                    (0, false) => PauliString::single(c, Z),
                    (1, true) => PauliString::single(t, X),
                    _ => PauliString::from_terms([(c, Z), (t, Z)]),
                }
            }
            Clifford::Cz => {
                let other = targets[1 - slot];
                if x_gen {
                    PauliString::from_terms([(q, X), (other, Z)])
                } else {
                    PauliString::single(q, Z)
                }
            }
        }
    }

    /// Conjugates by the gate applied to `targets`: returns `U P U^dagger`.
    pub fn conjugate(&self, gate: Clifford, targets: &[u32]) -> Result<PauliString, PauliError> {
        if targets.len() != gate.arity() {
            return Err(PauliError::Arity {
                gate,
                expected: gate.arity(),
                got: targets.len(),
            });
        }
        if gate.arity() == 2 && targets[0] == targets[1] {
            return Err(PauliError::RepeatedTarget(targets[0]));
        }
        let mut rest = self.clone();
        let mut acted = PauliString::identity();
        for (slot, &q) in targets.iter().enumerate() {
            if let Some(a) = rest.terms.remove(&q) {
                let (x, z) = a.bits();
                // Single-qubit P = i^{xz} X^x Z^z.
                let mut piece = PauliString::identity();
                if x && z {
                    piece.phase = Phase::I;
                }
                if x {
                    piece = piece.mul(&Self::generator_image(gate, targets, slot, true));
                }
                if z {
                    piece = piece.mul(&Self::generator_image(gate, targets, slot, false));
                }
                acted = acted.mul(&piece);
            }
        }
        Ok(rest.mul(&acted))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.phase.power() {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(sign)?;
        if self.terms.is_empty() {
            return f.write_str("I");
        }
        for (k, (q, a)) in self.terms().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}{}", a.letter(), q)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Axis::*;

    #[test]
    fn single_qubit_products() {
        let x = PauliString::single(0, X);
        let y = PauliString::single(0, Y);
        let z = PauliString::single(0, Z);
        assert_eq!(x.mul(&y), {
            let mut p = z.clone();
            p.phase = Phase::I;
            p
        });
        assert_eq!(x.mul(&z).phase, Phase::MINUS_I);
        assert_eq!(x.mul(&z).get(0), Some(Y));
        assert!(x.mul(&x).is_identity());
        assert_eq!(x.mul(&x).phase, Phase::ONE);
    }

    #[test]
    fn axis_cycle_is_period_three() {
        let mut p = PauliString::from_terms([(3, X), (4, Y)]);
        let start = p.clone();
        p = p.conjugate(Clifford::CZyx, &[3]).unwrap();
        assert_eq!(p.get(3), Some(Z));
        p = p.conjugate(Clifford::CZyx, &[3]).unwrap();
        assert_eq!(p.get(3), Some(Y));
        p = p.conjugate(Clifford::CZyx, &[3]).unwrap();
        assert_eq!(p, start);
        assert!(p.conjugate(Clifford::Cx, &[1, 1]).is_err());
        assert!(p.conjugate(Clifford::H, &[1, 2]).is_err());
    }

    #[test]
    fn display_format() {
        let mut p = PauliString::from_terms([(1, Z), (0, X)]);
        assert_eq!(p.to_string(), "+X0 Z1");
        p.phase = Phase::MINUS_I;
        assert_eq!(p.to_string(), "-iX0 Z1");
    }
}
