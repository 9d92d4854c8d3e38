use honeycomb_memory::analysis::*;
use honeycomb_memory::experiment::{CaseKey, CaseStats, Code, Observable};
use honeycomb_memory::generate::NoiseModel;
use honeycomb_memory::matching::DecoderKind;

fn line(distances: &[usize], log_p0: f64, d0: usize, decades_per_step: f64, step: usize) -> Vec<FitPoint> {
    distances
        .iter()
        .map(|&d| FitPoint {
            distance: d,
            p_block: 10f64.powf(log_p0 - (d - d0) as f64 / step as f64 * decades_per_step),
            shots: 0,
            errors: 0,
        })
        .collect()
}

/// Probability of an odd number of failures among k independent blocks,
/// by direct enumeration of the binomial terms.
fn odd_failures(b: f64, k: u32) -> f64 {
    let mut total = 0.0;
    let mut binom = 1.0;
    for j in 0..=k {
        if j % 2 == 1 {
            total += binom * b.powi(j as i32) * (1.0 - b).powi((k - j) as i32);
        }
        binom = binom * (k - j) as f64 / (j + 1) as f64;
    }
    total
}

#[test]
fn per_block_rate_of_three_blocks() {
    let b = per_block_rate(0.03, 3).unwrap();
    assert!((b - 0.010_207).abs() < 1e-6, "{b}");
    assert!((odd_failures(b, 3) - 0.03).abs() < 1e-14);
    // Tiny rates keep their relative precision.
    let tiny = per_block_rate(3e-15, 3).unwrap();
    assert!((tiny / 1e-15 - 1.0).abs() < 1e-9);
}

#[test]
fn honeycomb_teraquop_example() {
    // p(4) = 1e-4 and a factor 10 every 2 in distance reaches 1e-12 at
    // d = 20, i.e. 1.5 * 20^2 data qubits without ancillas.
    let fit = LineFit::fit(&line(&[4, 8, 12], -4.0, 4, 2.0, 4)).unwrap();
    assert!((fit.lambda() - 10.0).abs() < 1e-9);
    let t = teraquop_count(&fit, Code::Honeycomb, NoiseModel::Em3).unwrap();
    assert_eq!((t.distance, t.qubits), (20, 600.0));
    let t = teraquop_count(&fit, Code::Honeycomb, NoiseModel::Sd6).unwrap();
    assert_eq!((t.distance, t.qubits), (20, 1500.0));
}

#[test]
fn surface_teraquop_example() {
    let decades = 4f64.log10();
    let fit = LineFit::fit(&line(&[3, 5, 7], -3.0, 3, decades, 2)).unwrap();
    assert!((fit.lambda() - 4.0).abs() < 1e-9);
    let t = teraquop_count(&fit, Code::Surface, NoiseModel::Sd6).unwrap();
    assert_eq!((t.distance, t.qubits), (33, 2177.0));
}

#[test]
fn honeycomb_lambda_is_square_root_of_step_suppression() {
    // Rates fall by 100x from d=4 to d=8, which is 10x per 2 in distance.
    let fit = LineFit::fit(&line(&[4, 8], -2.0, 4, 2.0, 4)).unwrap();
    assert!((fit.lambda() - 10.0).abs() < 1e-9);
    let r4 = 10f64.powf(fit.log10_rate(4.0));
    let r8 = 10f64.powf(fit.log10_rate(8.0));
    assert!(((r4 / r8).sqrt() - fit.lambda()).abs() < 1e-9);
}

#[test]
fn fit_recovers_lambda_from_noisy_data() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut pts = line(&[3, 5, 7, 9, 11], -2.0, 3, 1.0, 2);
    for p in &mut pts {
        p.p_block *= 10f64.powf(rng.gen_range(-0.01..0.01));
    }
    let fit = LineFit::fit(&pts).unwrap();
    assert!((fit.lambda() / 10.0 - 1.0).abs() < 0.03, "{}", fit.lambda());
    let (lo, hi) = fit.lambda_region();
    assert!(lo < fit.lambda() && fit.lambda() < hi);
}

#[test]
fn likelihood_region_matches_grid_scan() {
    let (k, n) = (50u64, 1000u64);
    let ll = |h: f64| k as f64 * h.ln() + (n - k) as f64 * (1.0 - h).ln();
    let best = ll(0.05);
    let cut = best - 1000f64.ln();
    let grid: Vec<f64> = (1..100_000).map(|i| i as f64 * 1e-5).filter(|&h| ll(h) >= cut).collect();
    let (lo, hi) = likelihood_region(k, n);
    assert!((lo - grid[0]).abs() < 1e-4, "{lo} vs {}", grid[0]);
    assert!((hi - grid[grid.len() - 1]).abs() < 1e-4, "{hi}");
    assert_eq!(likelihood_region(0, 100).0, 0.0);
    assert_eq!(likelihood_region(100, 100).1, 1.0);
}

#[test]
fn uncertainty_region_matches_grid_of_lines() {
    let pts = vec![
        FitPoint { distance: 3, p_block: 1.2e-2, shots: 0, errors: 0 },
        FitPoint { distance: 5, p_block: 1.5e-3, shots: 0, errors: 0 },
        FitPoint { distance: 7, p_block: 2.9e-4, shots: 0, errors: 0 },
    ];
    let fit = LineFit::fit(&pts).unwrap();
    let rss = |a: f64, b: f64| pts.iter().map(|p| (p.p_block.log10() - a - b * p.distance as f64).powi(2)).sum::<f64>();
    let rss_min = rss(fit.intercept, fit.slope);
    assert!((rss_min - fit.rss).abs() < 1e-12);

    for d in [5.0, 9.0, 15.0] {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let n = 1200;
        for i in 0..=n {
            for j in 0..=n {
                let a = fit.intercept - 4.0 + 8.0 * i as f64 / n as f64;
                let b = fit.slope - 0.8 + 1.6 * j as f64 / n as f64;
                if rss(a, b) <= rss_min + 1.0 {
                    let y = a + b * d;
                    lo = lo.min(y);
                    hi = hi.max(y);
                }
            }
        }
        let (rlo, rhi) = fit.uncertainty_region(d);
        let mid = fit.log10_rate(d);
        let width = hi - mid;
        assert!(((rhi.log10() - mid) / width - 1.0).abs() < 0.01, "d={d}");
        assert!(((mid - rlo.log10()) / (mid - lo) - 1.0).abs() < 0.01, "d={d}");
    }
    let w = |d: f64| {
        let (lo, hi) = fit.uncertainty_region(d);
        hi / lo
    };
    assert!(w(9.0) < w(15.0) && w(15.0) < w(25.0));
}

#[test]
fn teraquop_region_brackets_the_estimate() {
    let pts = vec![
        FitPoint { distance: 4, p_block: 1.0e-2, shots: 0, errors: 0 },
        FitPoint { distance: 8, p_block: 1.3e-3, shots: 0, errors: 0 },
        FitPoint { distance: 12, p_block: 1.1e-4, shots: 0, errors: 0 },
    ];
    let fit = LineFit::fit(&pts).unwrap();
    let mid = teraquop_count(&fit, Code::Honeycomb, NoiseModel::Sd6).unwrap();
    let (lo, hi) = teraquop_region(&fit, Code::Honeycomb, NoiseModel::Sd6);
    let lo = lo.unwrap();
    assert!(lo.qubits <= mid.qubits);
    if let Some(hi) = hi {
        assert!(hi.qubits >= mid.qubits);
    }
}

#[test]
fn above_threshold_rates_do_not_fit() {
    let pts = line(&[4, 8], -2.0, 4, -0.5, 4);
    assert_eq!(LineFit::fit(&pts).unwrap_err(), AnalysisError::AboveThreshold);
    assert!(matches!(LineFit::fit(&pts[..1]), Err(AnalysisError::TooFewPoints(1))));
}

fn row(code: Code, d: usize, p: f64, obs: Observable, shots: u64, errors: u64) -> CaseStats {
    let mut r = CaseStats::empty(CaseKey::new(code, NoiseModel::Sd6, d, p, DecoderKind::Standard, obs));
    r.shots = shots;
    r.errors = errors;
    r
}

#[test]
fn block_rates_combine_both_observables() {
    let rows = [
        row(Code::Surface, 3, 1e-3, Observable::X, 10_000, 300),
        row(Code::Surface, 3, 1e-3, Observable::Z, 20_000, 200),
    ];
    let br = block_rates(&rows);
    assert_eq!(br.len(), 1);
    let x = per_block_rate(0.03, 3).unwrap();
    let z = per_block_rate(0.01, 3).unwrap();
    assert!((br[0].rate - combine_observables(x, z)).abs() < 1e-15);
    assert!(br[0].lo < br[0].rate && br[0].rate < br[0].hi);
    // A lone observable is not a complete case.
    assert!(block_rates(&rows[..1]).is_empty());
}

#[test]
fn metrics_of_synthetic_campaign() {
    // Shot rates chosen so per-block rates fall by 10x per 2 in distance.
    let mut rows = Vec::new();
    for (d, pb) in [(3usize, 1.5e-2f64), (5, 1.5e-3), (7, 1.5e-4)] {
        // Split the combined block rate evenly between X and Z.
        let each = 1.0 - (1.0 - pb).sqrt();
        let p_shot = odd_failures(each, 3);
        let shots = 100_000_000u64;
        let errors = (p_shot * shots as f64).round() as u64;
        rows.push(row(Code::Surface, d, 1e-3, Observable::X, shots, errors));
        rows.push(row(Code::Surface, d, 1e-3, Observable::Z, shots, errors));
    }
    let m = metrics(&rows);
    assert_eq!(m.len(), 1);
    let lambda = m[0].lambda.unwrap();
    assert!((lambda / 10.0 - 1.0).abs() < 0.01, "{lambda}");
    // 1.5e-2 at d=3 needs 10.2 more decades, so 11 steps: d = 25.
    assert_eq!(m[0].teraquop_qubits, Some(qubit_count(Code::Surface, NoiseModel::Sd6, 25)));

    let mut buf = Vec::new();
    write_metrics_to(&m, &mut buf).unwrap();
    let header = String::from_utf8(buf.clone()).unwrap();
    assert_eq!(header.lines().next().unwrap(), METRICS_COLUMNS.join(","));
    assert_eq!(read_metrics_from(&buf[..]).unwrap(), m);
}

#[test]
fn threshold_crossing_of_synthetic_curves() {
    // Per-shot rates p_d(p) = c (p/p_th)^((d+1)/2) cross exactly at p_th.
    let p_th = 0.006;
    let mut rows = Vec::new();
    for p in [0.003f64, 0.004, 0.005, 0.007, 0.008] {
        for d in [3usize, 5] {
            let rate = (0.03 * (p / p_th).powf((d as f64 + 1.0) / 2.0)).min(0.45);
            let shots = 10_000_000u64;
            let errors = (rate * shots as f64).round() as u64;
            for obs in Observable::pair(Code::Surface) {
                rows.push(row(Code::Surface, d, p, obs, shots, errors));
            }
        }
    }
    let b = threshold_brackets(&rows);
    assert_eq!(b.len(), 1);
    let c = b[0].crossing.unwrap();
    assert!((c / p_th - 1.0).abs() < 0.03, "{c}");
    assert!(b[0].lo <= c && c <= b[0].hi);
    assert!(b[0].overlaps((0.0055, 0.0065)));
    assert!(!b[0].overlaps((0.001, 0.002)));
}
