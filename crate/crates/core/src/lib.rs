//! Memory experiments for the honeycomb and surface codes.
//!
//! The crate generates noisy stabilizer circuits, samples detection
//! events with a Pauli-frame simulator, derives detector error models,
//! and decodes with minimum-weight perfect matching. Results are
//! aggregated into per-case statistics and fitted to extract logical
//! error suppression and qubit-count projections.

pub mod circuit;
pub mod pauli;
pub mod dem;
pub mod generate;
pub mod matching;
pub mod sampler;
pub mod experiment;
pub mod analysis;
