//! Memory-experiment circuit generators for the honeycomb code and the
//! rotated surface code, plus noise-model insertion.

mod builder;
pub mod honeycomb;
mod noise;
pub mod surface;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use honeycomb::{gen_honeycomb, HoneycombLayout, HoneycombObservable, HoneycombSpec};
pub use noise::apply_noise_model;
pub use surface::{gen_surface, SurfaceBasis, SurfaceSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerateError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("{gate} is not in the {model} gate set")]
    GateOutsideModel { model: NoiseModel, gate: String },
    #[error("noise strength {0} out of range for this model")]
    BadStrength(f64),
}

/// Noisy gate sets. `Em3Tweaked` replaces the 32-case correlated
/// measurement error with two-qubit depolarization plus a result flip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NoiseModel {
    #[serde(rename = "SD6")]
    Sd6,
    #[serde(rename = "SI1000")]
    Si1000,
    #[serde(rename = "EM3")]
    Em3,
    #[serde(rename = "EM3_TWEAKED")]
    Em3Tweaked,
}

impl NoiseModel {
    pub const ALL: [NoiseModel; 4] = [NoiseModel::Sd6, NoiseModel::Si1000, NoiseModel::Em3, NoiseModel::Em3Tweaked];

    pub fn name(self) -> &'static str {
        match self {
            NoiseModel::Sd6 => "SD6",
            NoiseModel::Si1000 => "SI1000",
            NoiseModel::Em3 => "EM3",
            NoiseModel::Em3Tweaked => "EM3_TWEAKED",
        }
    }

    /// Whether parities are extracted through ancilla qubits.
    pub fn uses_ancillas(self) -> bool {
        matches!(self, NoiseModel::Sd6 | NoiseModel::Si1000)
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseModel {
    type Err = GenerateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NoiseModel::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| GenerateError::InvalidSpec(format!("unknown noise model {s:?}")))
    }
}

pub(crate) fn check_strength(p: f64) -> Result<(), GenerateError> {
    if p.is_finite() && (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(GenerateError::BadStrength(p))
    }
}
