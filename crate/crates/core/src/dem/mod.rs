//! Detector error models: independent error mechanisms, each flipping a
//! set of detectors and a set of logical observables.

mod analyze;
mod decompose;
mod distance;
mod sample;

use std::fmt;

use thiserror::Error;

use crate::circuit::Violation;

pub use analyze::{extract_dem, verify_determinism, NondeterministicTarget, TargetId};
pub use decompose::decompose;
pub use distance::{circuit_distance, Distance};
pub use sample::{predicted_detection_rates, sample_dem};

#[derive(Debug, Error)]
pub enum DemError {
    #[error("invalid circuit: {}", .0.first().map(|v| v.to_string()).unwrap_or_default())]
    Invalid(Vec<Violation>),
    #[error("{} detector(s) or observable(s) are not deterministic, first {:?} at tick {}",
        .0.len(), .0[0].target, .0[0].tick)]
    Nondeterministic(Vec<NondeterministicTarget>),
    #[error("probability {p} cannot be converted to independent components")]
    BadProbability { p: f64 },
    #[error("circuit has {0} observables; at most 64 are supported")]
    TooManyObservables(usize),
    #[error("no graph-like decomposition for error {0}")]
    DecompositionFailed(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Component of a decomposed mechanism: one or two detectors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Piece {
    pub detectors: Vec<u32>,
    pub observables: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorMechanism {
    pub probability: f64,
    /// Sorted, distinct.
    pub detectors: Vec<u32>,
    /// Bit `k` set when the mechanism flips observable `k`.
    pub observables: u64,
    /// Graph-like decomposition, filled in for mechanisms with more than
    /// two detectors by [`decompose`].
    pub pieces: Option<Vec<Piece>>,
}

impl ErrorMechanism {
    pub fn is_graphlike(&self) -> bool {
        !self.detectors.is_empty() && self.detectors.len() <= 2
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectorErrorModel {
    pub num_detectors: usize,
    pub num_observables: usize,
    pub mechanisms: Vec<ErrorMechanism>,
    pub detector_coords: Vec<Vec<f64>>,
}

/// Probability that an odd number of two independent events occur.
pub fn xor_probability(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + b * (1.0 - a)
}

/// Converts a channel that, with probability `p`, applies an element of
/// a group of 2^n elements chosen uniformly (identity included) into the
/// probability with which each of the 2^n - 1 non-identity elements is
/// applied independently so that the two channels coincide.
pub fn disjoint_to_independent(p: f64, n: u32) -> Result<f64, DemError> {
    if !(0.0..1.0).contains(&p) || n == 0 {
        return Err(DemError::BadProbability { p });
    }
    let exponent = 1.0 / (1u64 << (n - 1)) as f64;
    Ok(0.5 - 0.5 * (1.0 - p).powf(exponent))
}

fn write_targets(f: &mut fmt::Formatter<'_>, detectors: &[u32], observables: u64) -> fmt::Result {
    for d in detectors {
        write!(f, " D{d}")?;
    }
    for k in 0..64 {
        if observables >> k & 1 == 1 {
            write!(f, " L{k}")?;
        }
    }
    Ok(())
}

impl fmt::Display for DetectorErrorModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "# {} detectors, {} observables, {} mechanisms",
            self.num_detectors,
            self.num_observables,
            self.mechanisms.len()
        )?;
        for m in &self.mechanisms {
            write!(f, "error({})", m.probability)?;
            match &m.pieces {
                Some(pieces) => {
                    for (i, p) in pieces.iter().enumerate() {
                        if i > 0 {
                            f.write_str(" ^")?;
                        }
                        write_targets(f, &p.detectors, p.observables)?;
                    }
                }
                None => write_targets(f, &m.detectors, m.observables)?,
            }
            writeln!(f)?;
        }
        for (d, c) in self.detector_coords.iter().enumerate() {
            let cs: Vec<String> = c.iter().map(|v| v.to_string()).collect();
            writeln!(f, "# D{d} ({})", cs.join(", "))?;
        }
        Ok(())
    }
}

impl DetectorErrorModel {
    /// Parses the text produced by the `Display` impl. Counts are taken
    /// from the largest indices seen; coordinates are not read back.
    pub fn parse(text: &str) -> Result<DetectorErrorModel, DemError> {
        let mut dem = DetectorErrorModel::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let perr = |message: String| DemError::Parse { line: i + 1, message };
            let rest = line
                .strip_prefix("error(")
                .ok_or_else(|| perr(format!("unexpected '{line}'")))?;
            let close = rest.find(')').ok_or_else(|| perr("unclosed '('".into()))?;
            let probability: f64 = rest[..close]
                .trim()
                .parse()
                .map_err(|_| perr("bad probability".into()))?;
            let mut pieces = vec![Piece {
                detectors: vec![],
                observables: 0,
            }];
            for tok in rest[close + 1..].split_whitespace() {
                if tok == "^" {
                    pieces.push(Piece {
                        detectors: vec![],
                        observables: 0,
                    });
                } else if let Some(d) = tok.strip_prefix('D') {
                    let d: u32 = d.parse().map_err(|_| perr(format!("bad target '{tok}'")))?;
                    dem.num_detectors = dem.num_detectors.max(d as usize + 1);
                    pieces.last_mut().unwrap().detectors.push(d);
                } else if let Some(k) = tok.strip_prefix('L') {
                    let k: u32 = k.parse().map_err(|_| perr(format!("bad target '{tok}'")))?;
                    if k >= 64 {
                        return Err(perr("observable index above 63".into()));
                    }
                    dem.num_observables = dem.num_observables.max(k as usize + 1);
                    pieces.last_mut().unwrap().observables ^= 1 << k;
                } else {
                    return Err(perr(format!("bad target '{tok}'")));
                }
            }
            let mut detectors: Vec<u32> = Vec::new();
            let mut observables = 0;
            for p in &mut pieces {
                p.detectors.sort_unstable();
                observables ^= p.observables;
                for &d in &p.detectors {
                    match detectors.binary_search(&d) {
                        Ok(k) => {
                            detectors.remove(k);
                        }
                        Err(k) => detectors.insert(k, d),
                    }
                }
            }
            dem.mechanisms.push(ErrorMechanism {
                probability,
                detectors,
                observables,
                pieces: if pieces.len() > 1 { Some(pieces) } else { None },
            });
        }
        Ok(dem)
    }
}
