//! Figures of merit from shot statistics: per-block rates, line fits of
//! log10 rate against distance, lambda, teraquop counts, likelihood
//! regions and threshold brackets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::experiment::{CaseStats, Code, Observable};
use crate::generate::NoiseModel;
use crate::matching::DecoderKind;

/// Likelihood ratio defining the uncertainty regions.
pub const LIKELIHOOD_FACTOR: f64 = 1000.0;
/// Per-block error rate of a teraquop memory.
pub const TERAQUOP_RATE: f64 = 1e-12;
const MAX_DISTANCE: usize = 100_000;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("error rate {0} is outside [0, 1/2]")]
    RateOutOfRange(f64),
    #[error("need at least two usable points, got {0}")]
    TooFewPoints(usize),
    #[error("rates do not decrease with distance (above threshold)")]
    AboveThreshold,
}

/// Rate per block whose `blocks`-fold XOR composition gives `p_shot`.
pub fn per_block_rate(p_shot: f64, blocks: u32) -> Result<f64, AnalysisError> {
    if !(0.0..=0.5).contains(&p_shot) || blocks == 0 {
        return Err(AnalysisError::RateOutOfRange(p_shot));
    }
    // 1 - (1-2p)^(1/k), written to keep precision for tiny p.
    let x = (-2.0 * p_shot).ln_1p() / blocks as f64;
    Ok(-x.exp_m1() / 2.0)
}

/// Probability that at least one of two independent observables fails.
pub fn combine_observables(pa: f64, pb: f64) -> f64 {
    1.0 - (1.0 - pa) * (1.0 - pb)
}

/// Interval of rates whose binomial likelihood is within
/// [`LIKELIHOOD_FACTOR`] of the maximum.
pub fn likelihood_region(errors: u64, shots: u64) -> (f64, f64) {
    assert!(shots > 0 && errors <= shots, "likelihood_region needs 0 <= errors <= shots, shots > 0");
    let (k, n) = (errors as f64, shots as f64);
    let ll = |h: f64| {
        let a = if k > 0.0 { k * h.ln() } else { 0.0 };
        let b = if k < n { (n - k) * (-h).ln_1p() } else { 0.0 };
        a + b
    };
    let mle = k / n;
    let cut = ll(mle) - LIKELIHOOD_FACTOR.ln();
    // ll is unimodal: increasing below the mle, decreasing above.
    let bisect = |mut inside: f64, mut outside: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (inside + outside);
            if ll(mid) >= cut {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    };
    let lo = if errors == 0 { 0.0 } else { bisect(mle, 0.0) };
    let hi = if errors == shots { 1.0 } else { bisect(mle, 1.0) };
    (lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub distance: usize,
    pub p_block: f64,
    pub shots: u64,
    pub errors: u64,
}

/// Least-squares line `log10(p_block) = intercept + slope * d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub rss: f64,
    pub points: Vec<FitPoint>,
    /// (X^T X)^-1 for the design matrix with rows (1, d).
    cov: [[f64; 2]; 2],
}

impl LineFit {
    /// Fits points with at least one error. Requires rates strictly
    /// decreasing in distance.
    pub fn fit(points: &[FitPoint]) -> Result<LineFit, AnalysisError> {
        let mut pts: Vec<FitPoint> = points.iter().copied().filter(|p| p.p_block > 0.0).collect();
        pts.sort_by_key(|p| p.distance);
        let mut distinct: Vec<usize> = pts.iter().map(|p| p.distance).collect();
        distinct.dedup();
        if distinct.len() < 2 {
            return Err(AnalysisError::TooFewPoints(distinct.len()));
        }
        if pts.windows(2).any(|w| w[1].distance > w[0].distance && w[1].p_block >= w[0].p_block) {
            return Err(AnalysisError::AboveThreshold);
        }
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.distance as f64).sum();
        let sxx: f64 = pts.iter().map(|p| (p.distance as f64).powi(2)).sum();
        let sy: f64 = pts.iter().map(|p| p.p_block.log10()).sum();
        let sxy: f64 = pts.iter().map(|p| p.distance as f64 * p.p_block.log10()).sum();
        let det = n * sxx - sx * sx;
        let slope = (n * sxy - sx * sy) / det;
        let intercept = (sy - slope * sx) / n;
        let rss = pts
            .iter()
            .map(|p| (p.p_block.log10() - intercept - slope * p.distance as f64).powi(2))
            .sum();
        let cov = [[sxx / det, -sx / det], [-sx / det, n / det]];
        Ok(LineFit { intercept, slope, rss, points: pts, cov })
    }

    pub fn log10_rate(&self, d: f64) -> f64 {
        self.intercept + self.slope * d
    }

    /// Suppression factor per distance step of 2. For codes stepping by
    /// 4 this is the square root of the per-step suppression, which is
    /// the same number.
    pub fn lambda(&self) -> f64 {
        10f64.powf(-2.0 * self.slope)
    }

    /// Lambda over all lines within RSS_min + 1, as (lo, hi).
    pub fn lambda_region(&self) -> (f64, f64) {
        let w = self.cov[1][1].sqrt();
        (10f64.powf(-2.0 * (self.slope + w)), 10f64.powf(-2.0 * (self.slope - w)))
    }

    /// Extremal predicted rates at distance `d` over all lines with
    /// RSS <= RSS_min + 1, in log10-rate coordinates.
    pub fn uncertainty_region(&self, d: f64) -> (f64, f64) {
        let c = &self.cov;
        let var = c[0][0] + 2.0 * d * c[0][1] + d * d * c[1][1];
        let mid = self.log10_rate(d);
        let w = var.max(0.0).sqrt();
        (10f64.powf(mid - w), 10f64.powf(mid + w))
    }
}

pub fn fit_uncertainty_region(fit: &LineFit, d: f64) -> (f64, f64) {
    fit.uncertainty_region(d)
}

/// Distances a code can realize, smallest first.
pub fn distance_step(code: Code) -> (usize, usize) {
    match code {
        Code::Surface => (3, 2),
        Code::Honeycomb => (4, 4),
    }
}

pub fn qubit_count(code: Code, model: NoiseModel, d: usize) -> f64 {
    let d2 = (d * d) as f64;
    match (code, model.uses_ancillas()) {
        (Code::Surface, _) => 2.0 * d2 - 1.0,
        (Code::Honeycomb, false) => 1.5 * d2,
        (Code::Honeycomb, true) => 3.75 * d2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Teraquop {
    pub distance: usize,
    pub qubits: f64,
}

/// Smallest realizable distance whose predicted rate is at most
/// [`TERAQUOP_RATE`], searching up to a large cap.
fn smallest_distance(code: Code, model: NoiseModel, rate: impl Fn(usize) -> f64) -> Option<Teraquop> {
    let (start, step) = distance_step(code);
    (start..=MAX_DISTANCE)
        .step_by(step)
        .find(|&d| rate(d) <= TERAQUOP_RATE)
        .map(|distance| Teraquop { distance, qubits: qubit_count(code, model, distance) })
}

pub fn teraquop_count(fit: &LineFit, code: Code, model: NoiseModel) -> Result<Teraquop, AnalysisError> {
    if fit.slope >= 0.0 {
        return Err(AnalysisError::AboveThreshold);
    }
    smallest_distance(code, model, |d| 10f64.powf(fit.log10_rate(d as f64))).ok_or(AnalysisError::AboveThreshold)
}

/// Teraquop counts using the optimistic and pessimistic edges of the fit
/// uncertainty region. The pessimistic one may never get there.
pub fn teraquop_region(fit: &LineFit, code: Code, model: NoiseModel) -> (Option<Teraquop>, Option<Teraquop>) {
    (
        smallest_distance(code, model, |d| fit.uncertainty_region(d as f64).0),
        smallest_distance(code, model, |d| fit.uncertainty_region(d as f64).1),
    )
}

/// Per-block rate of one case, with its likelihood region, after
/// combining a code's two observables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRate {
    pub code: Code,
    pub model: NoiseModel,
    pub distance: usize,
    pub p: f64,
    pub decoder: DecoderKind,
    pub rate: f64,
    pub lo: f64,
    pub hi: f64,
    pub shots: u64,
    pub errors: u64,
}

fn blocks(row: &CaseStats) -> u32 {
    ((row.rounds as f64 / row.distance as f64).round() as u32).max(1)
}

fn block_of(row: &CaseStats, shot_rate: f64) -> f64 {
    // Rates past 1/2 carry no information beyond "fully scrambled".
    per_block_rate(shot_rate.min(0.5), blocks(row)).expect("clamped rate")
}

/// Per-block rates for every (code, model, distance, p, decoder) that has
/// both of its code's observables. Shot rates are converted to per-block
/// rates first, then combined assuming independent failures.
pub fn block_rates(rows: &[CaseStats]) -> Vec<BlockRate> {
    let merged = crate::experiment::merge_stats(rows);
    let mut groups: BTreeMap<String, Vec<&CaseStats>> = BTreeMap::new();
    for r in &merged {
        if r.shots > 0 {
            let mut k = r.key();
            k.observable = Observable::Both;
            groups.entry(k.to_string()).or_default().push(r);
        }
    }
    let mut out = Vec::new();
    for rs in groups.values() {
        let pair = Observable::pair(rs[0].code);
        let (Some(a), Some(b)) = (
            rs.iter().find(|r| r.observable == pair[0]),
            rs.iter().find(|r| r.observable == pair[1]),
        ) else {
            continue;
        };
        let (alo, ahi) = likelihood_region(a.errors, a.shots);
        let (blo, bhi) = likelihood_region(b.errors, b.shots);
        out.push(BlockRate {
            code: a.code,
            model: a.model,
            distance: a.distance,
            p: a.p,
            decoder: a.decoder,
            rate: combine_observables(block_of(a, a.rate()), block_of(b, b.rate())),
            lo: combine_observables(block_of(a, alo), block_of(b, blo)),
            hi: combine_observables(block_of(a, ahi), block_of(b, bhi)),
            shots: a.shots.min(b.shots),
            errors: a.errors + b.errors,
        });
    }
    out.sort_by(|x, y| {
        (x.code, x.model, x.decoder, x.distance)
            .cmp(&(y.code, y.model, y.decoder, y.distance))
            .then(x.p.total_cmp(&y.p))
    });
    out
}

/// One row of the metrics table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub code: Code,
    pub model: NoiseModel,
    pub p: f64,
    pub decoder: DecoderKind,
    pub lambda: Option<f64>,
    pub lambda_lo: Option<f64>,
    pub lambda_hi: Option<f64>,
    pub teraquop_qubits: Option<f64>,
    pub tq_lo: Option<f64>,
    pub tq_hi: Option<f64>,
}

pub const METRICS_COLUMNS: [&str; 10] = [
    "code",
    "model",
    "p",
    "decoder",
    "lambda",
    "lambda_lo",
    "lambda_hi",
    "teraquop_qubits",
    "tq_lo",
    "tq_hi",
];

pub fn fit_points(rates: &[&BlockRate]) -> Vec<FitPoint> {
    rates
        .iter()
        .map(|r| FitPoint { distance: r.distance, p_block: r.rate, shots: r.shots, errors: r.errors })
        .collect()
}

/// Fits every (code, model, p, decoder) group across distances. Groups
/// that cannot be fitted (too few points, above threshold) get empty
/// lambda and teraquop fields.
pub fn metrics(rows: &[CaseStats]) -> Vec<Metrics> {
    let rates = block_rates(rows);
    let mut groups: Vec<Vec<&BlockRate>> = Vec::new();
    for r in &rates {
        match groups.iter_mut().find(|g| {
            let h = g[0];
            (h.code, h.model, h.decoder) == (r.code, r.model, r.decoder) && h.p == r.p
        }) {
            Some(g) => g.push(r),
            None => groups.push(vec![r]),
        }
    }
    let mut out: Vec<Metrics> = groups
        .iter()
        .map(|g| {
            let h = g[0];
            let mut m = Metrics {
                code: h.code,
                model: h.model,
                p: h.p,
                decoder: h.decoder,
                lambda: None,
                lambda_lo: None,
                lambda_hi: None,
                teraquop_qubits: None,
                tq_lo: None,
                tq_hi: None,
            };
            if let Ok(fit) = LineFit::fit(&fit_points(g)) {
                let (lo, hi) = fit.lambda_region();
                m.lambda = Some(fit.lambda());
                m.lambda_lo = Some(lo);
                m.lambda_hi = Some(hi);
                m.teraquop_qubits = teraquop_count(&fit, h.code, h.model).ok().map(|t| t.qubits);
                let (tlo, thi) = teraquop_region(&fit, h.code, h.model);
                m.tq_lo = tlo.map(|t| t.qubits);
                m.tq_hi = thi.map(|t| t.qubits);
            }
            m
        })
        .collect();
    out.sort_by(|x, y| {
        (x.code, x.model, x.decoder)
            .cmp(&(y.code, y.model, y.decoder))
            .then(x.p.total_cmp(&y.p))
    });
    out
}

pub fn write_metrics_to<W: std::io::Write>(rows: &[Metrics], writer: W) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(METRICS_COLUMNS)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_metrics_from<R: std::io::Read>(reader: R) -> Result<Vec<Metrics>, csv::Error> {
    csv::Reader::from_reader(reader).deserialize().collect()
}

/// Where the curves of two distances cross, with the range of p over
/// which their likelihood bands overlap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdBracket {
    pub code: Code,
    pub model: NoiseModel,
    pub decoder: DecoderKind,
    pub d_small: usize,
    pub d_large: usize,
    /// Crossing of the central estimates, log-log interpolated.
    pub crossing: Option<f64>,
    /// Overlap region of the two likelihood bands around the crossing.
    pub lo: f64,
    pub hi: f64,
}

impl ThresholdBracket {
    pub fn overlaps(&self, band: (f64, f64)) -> bool {
        self.lo <= band.1 && band.0 <= self.hi
    }
}

/// Log-log interpolation of a curve sampled at increasing `ps`.
fn interpolate(ps: &[f64], ys: &[f64], p: f64) -> f64 {
    let i = ps.partition_point(|&x| x <= p).clamp(1, ps.len() - 1);
    let (x0, x1) = (ps[i - 1].ln(), ps[i].ln());
    let (y0, y1) = (ys[i - 1].max(1e-300).ln(), ys[i].max(1e-300).ln());
    let t = (p.ln() - x0) / (x1 - x0);
    (y0 + t * (y1 - y0)).exp()
}

/// Threshold brackets from the two smallest distances of each
/// (code, model, decoder) group, using p values present for both.
pub fn threshold_brackets(rows: &[CaseStats]) -> Vec<ThresholdBracket> {
    let rates = block_rates(rows);
    let mut groups: BTreeMap<(Code, NoiseModel, DecoderKind), Vec<&BlockRate>> = BTreeMap::new();
    for r in &rates {
        groups.entry((r.code, r.model, r.decoder)).or_default().push(r);
    }
    let mut out = Vec::new();
    for ((code, model, decoder), g) in groups {
        let mut ds: Vec<usize> = g.iter().map(|r| r.distance).collect();
        ds.sort_unstable();
        ds.dedup();
        if ds.len() < 2 {
            continue;
        }
        let (d1, d2) = (ds[0], ds[1]);
        let curve = |d: usize| -> Vec<&BlockRate> { g.iter().copied().filter(|r| r.distance == d).collect() };
        let (c1, c2) = (curve(d1), curve(d2));
        let ps: Vec<f64> = c1.iter().map(|r| r.p).filter(|p| c2.iter().any(|r| r.p == *p)).collect();
        if ps.len() < 2 {
            continue;
        }
        let pick = |c: &[&BlockRate], f: fn(&BlockRate) -> f64| -> Vec<f64> {
            ps.iter().map(|p| f(c.iter().find(|r| r.p == *p).unwrap())).collect()
        };
        let (m1, l1, h1) = (pick(&c1, |r| r.rate), pick(&c1, |r| r.lo), pick(&c1, |r| r.hi));
        let (m2, l2, h2) = (pick(&c2, |r| r.rate), pick(&c2, |r| r.lo), pick(&c2, |r| r.hi));

        let mut crossing = None;
        for i in 1..ps.len() {
            let f0 = (m2[i - 1] / m1[i - 1]).ln();
            let f1 = (m2[i] / m1[i]).ln();
            if f0 < 0.0 && f1 >= 0.0 {
                let t = -f0 / (f1 - f0);
                crossing = Some((ps[i - 1].ln() + t * (ps[i].ln() - ps[i - 1].ln())).exp());
                break;
            }
        }
        // Scan a fine log grid for where the bands overlap.
        let (pmin, pmax) = (ps[0], ps[ps.len() - 1]);
        let steps = 4000;
        let mut overlap: Vec<f64> = Vec::new();
        for k in 0..=steps {
            let p = (pmin.ln() + (pmax.ln() - pmin.ln()) * k as f64 / steps as f64).exp();
            let (a_lo, a_hi) = (interpolate(&ps, &l1, p), interpolate(&ps, &h1, p));
            let (b_lo, b_hi) = (interpolate(&ps, &l2, p), interpolate(&ps, &h2, p));
            if a_lo <= b_hi && b_lo <= a_hi {
                overlap.push(p);
            }
        }
        let (lo, hi) = match crossing {
            Some(c) => {
                // Contiguous run of overlapping grid points containing the crossing.
                let near = overlap
                    .iter()
                    .copied()
                    .min_by(|a, b| (a.ln() - c.ln()).abs().total_cmp(&(b.ln() - c.ln()).abs()));
                match near {
                    Some(n) => contiguous(&overlap, n, (pmax / pmin).powf(1.0 / steps as f64)),
                    None => (c, c),
                }
            }
            None if !overlap.is_empty() => (overlap[0], overlap[overlap.len() - 1]),
            None => (f64::NAN, f64::NAN),
        };
        out.push(ThresholdBracket { code, model, decoder, d_small: d1, d_large: d2, crossing, lo, hi });
    }
    out
}

fn contiguous(grid: &[f64], seed: f64, ratio: f64) -> (f64, f64) {
    let i = grid.iter().position(|&x| x == seed).unwrap();
    let tol = ratio.ln() * 1.5;
    let mut a = i;
    while a > 0 && grid[a].ln() - grid[a - 1].ln() <= tol {
        a -= 1;
    }
    let mut b = i;
    while b + 1 < grid.len() && grid[b + 1].ln() - grid[b].ln() <= tol {
        b += 1;
    }
    (grid[a], grid[b])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_block_fixed_points() {
        assert_eq!(per_block_rate(0.0, 3).unwrap(), 0.0);
        assert!((per_block_rate(0.5, 3).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(per_block_rate(0.6, 3), Err(AnalysisError::RateOutOfRange(0.6)));
        assert_eq!(per_block_rate(0.2, 1).unwrap(), 0.2);
    }

    #[test]
    fn lambda_of_exact_line() {
        let pts: Vec<FitPoint> = [3usize, 5, 7]
            .iter()
            .map(|&d| FitPoint { distance: d, p_block: 10f64.powf(-1.0 - d as f64 / 2.0), shots: 0, errors: 0 })
            .collect();
        let fit = LineFit::fit(&pts).unwrap();
        assert!((fit.lambda() - 10.0).abs() < 1e-9);
        assert!(fit.rss < 1e-20);
    }

    #[test]
    fn fit_rejects_increasing_rates() {
        let pts = [
            FitPoint { distance: 4, p_block: 0.1, shots: 10, errors: 1 },
            FitPoint { distance: 8, p_block: 0.2, shots: 10, errors: 2 },
        ];
        assert_eq!(LineFit::fit(&pts), Err(AnalysisError::AboveThreshold));
        assert_eq!(LineFit::fit(&pts[..1]), Err(AnalysisError::TooFewPoints(1)));
    }

    #[test]
    fn likelihood_region_edges() {
        let (lo, hi) = likelihood_region(0, 100);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.1);
        let (lo, hi) = likelihood_region(100, 100);
        assert_eq!(hi, 1.0);
        assert!(lo > 0.9);
    }
}
