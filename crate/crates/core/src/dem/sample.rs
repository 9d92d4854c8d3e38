use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DetectorErrorModel;
use crate::sampler::DetectionTable;

/// Samples shots by firing each mechanism independently.
pub fn sample_dem(dem: &DetectorErrorModel, shots: usize, seed: u64) -> DetectionTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = DetectionTable::zeros(shots, dem.num_detectors, dem.num_observables);
    for s in 0..shots {
        for m in &dem.mechanisms {
            if rng.gen::<f64>() < m.probability {
                for &d in &m.detectors {
                    out.toggle(s, d as usize);
                }
                out.toggle_observables(s, m.observables);
            }
        }
    }
    out
}

/// Exact per-detector firing probability implied by independent mechanisms.
pub fn predicted_detection_rates(dem: &DetectorErrorModel) -> Vec<f64> {
    // P(odd number fire) = (1 - prod(1 - 2 p_i)) / 2.
    let mut prod = vec![1.0f64; dem.num_detectors];
    for m in &dem.mechanisms {
        for &d in &m.detectors {
            prod[d as usize] *= 1.0 - 2.0 * m.probability;
        }
    }
    prod.into_iter().map(|x| (1.0 - x) / 2.0).collect()
}
