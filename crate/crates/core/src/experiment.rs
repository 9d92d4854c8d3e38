//! Monte Carlo campaigns: case keys, adaptive shot collection, merging and
//! CSV persistence of per-case statistics.

use std::cmp::Ordering;
use std::fmt;
use std::io;
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::Circuit;
use crate::dem::{decompose, extract_dem, DemError};
use crate::generate::{
    gen_honeycomb, gen_surface, GenerateError, HoneycombObservable, HoneycombSpec, NoiseModel, SurfaceBasis,
    SurfaceSpec,
};
use crate::matching::{decode_batch, DecoderKind, MatchingError, MatchingGraph};
use crate::sampler::{FrameSampler, SampleError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Code {
    Honeycomb,
    Surface,
}

impl Code {
    pub fn name(self) -> &'static str {
        match self {
            Code::Honeycomb => "honeycomb",
            Code::Surface => "surface",
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Code {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "honeycomb" => Ok(Code::Honeycomb),
            "surface" => Ok(Code::Surface),
            _ => Err(format!("unknown code {s:?}")),
        }
    }
}

/// Tracked logical observable. H/V belong to the honeycomb code, X/Z to
/// the surface code. `Both` only appears in configs and expands into the
/// code's two observables, run as separate cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Observable {
    H,
    V,
    X,
    Z,
    #[serde(rename = "both")]
    Both,
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Observable::H => "H",
            Observable::V => "V",
            Observable::X => "X",
            Observable::Z => "Z",
            Observable::Both => "both",
        }
    }

    pub fn pair(code: Code) -> [Observable; 2] {
        match code {
            Code::Honeycomb => [Observable::H, Observable::V],
            Code::Surface => [Observable::X, Observable::Z],
        }
    }

    fn fits(self, code: Code) -> bool {
        match self {
            Observable::H | Observable::V => code == Code::Honeycomb,
            Observable::X | Observable::Z => code == Code::Surface,
            Observable::Both => true,
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "H" | "h" => Ok(Observable::H),
            "V" | "v" => Ok(Observable::V),
            "X" | "x" => Ok(Observable::X),
            "Z" | "z" => Ok(Observable::Z),
            "both" => Ok(Observable::Both),
            _ => Err(format!("unknown observable {s:?}")),
        }
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{case}: {message}")]
    Config { case: String, message: String },
    #[error("{case}: {source}")]
    Generate { case: String, source: GenerateError },
    #[error("{case}: {source}")]
    Dem { case: String, source: DemError },
    #[error("{case}: {source}")]
    Matching { case: String, source: MatchingError },
    #[error("{case}: {source}")]
    Sample { case: String, source: SampleError },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("config: {0}")]
    Json(#[from] serde_json::Error),
}

/// Everything that identifies a case. Rows with equal keys are merged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseKey {
    pub code: Code,
    pub model: NoiseModel,
    pub distance: usize,
    pub rounds: usize,
    pub p: f64,
    pub decoder: DecoderKind,
    pub observable: Observable,
}

impl CaseKey {
    /// A case with the usual `3d` rounds.
    pub fn new(code: Code, model: NoiseModel, distance: usize, p: f64, decoder: DecoderKind, observable: Observable) -> Self {
        CaseKey {
            code,
            model,
            distance,
            rounds: 3 * distance,
            p,
            decoder,
            observable,
        }
    }

    fn cmp_key(&self, other: &Self) -> Ordering {
        (self.code, self.model, self.distance, self.rounds)
            .cmp(&(other.code, other.model, other.distance, other.rounds))
            .then(self.p.total_cmp(&other.p))
            .then((self.decoder, self.observable).cmp(&(other.decoder, other.observable)))
    }

    /// Builds the noisy memory circuit for this case.
    pub fn circuit(&self) -> Result<Circuit, ExperimentError> {
        let err = |source| ExperimentError::Generate { case: self.to_string(), source };
        match (self.code, self.observable) {
            (Code::Honeycomb, Observable::H | Observable::V) => {
                let obs = if self.observable == Observable::H {
                    HoneycombObservable::Horizontal
                } else {
                    HoneycombObservable::Vertical
                };
                let spec = HoneycombSpec::for_distance(self.distance, self.model, self.p, obs).with_rounds(self.rounds);
                gen_honeycomb(&spec).map_err(err)
            }
            (Code::Surface, Observable::X | Observable::Z) => {
                let basis = if self.observable == Observable::X { SurfaceBasis::X } else { SurfaceBasis::Z };
                let spec = SurfaceSpec::new(self.distance, self.model, self.p, basis).with_rounds(self.rounds);
                gen_surface(&spec).map_err(err)
            }
            _ => Err(ExperimentError::Config {
                case: self.to_string(),
                message: format!("observable {} does not name a single {} observable", self.observable, self.code),
            }),
        }
    }

    /// Seed for this case derived from a master seed. Stable across runs,
    /// platforms and compiler versions (FNV-1a over the key text).
    pub fn seed(&self, master: u64) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325 ^ master;
        for b in self.to_string().bytes().chain(master.to_le_bytes()) {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        h
    }
}

impl fmt::Display for CaseKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} d={} r={} p={} {} {}",
            self.code, self.model, self.distance, self.rounds, self.p, self.decoder, self.observable
        )
    }
}

/// One CSV row: a case key plus the statistics collected for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseStats {
    pub code: Code,
    pub model: NoiseModel,
    pub distance: usize,
    pub rounds: usize,
    pub p: f64,
    pub decoder: DecoderKind,
    pub observable: Observable,
    pub shots: u64,
    pub errors: u64,
    pub seconds: f64,
}

impl CaseStats {
    pub fn empty(key: CaseKey) -> Self {
        CaseStats {
            code: key.code,
            model: key.model,
            distance: key.distance,
            rounds: key.rounds,
            p: key.p,
            decoder: key.decoder,
            observable: key.observable,
            shots: 0,
            errors: 0,
            seconds: 0.0,
        }
    }

    pub fn key(&self) -> CaseKey {
        CaseKey {
            code: self.code,
            model: self.model,
            distance: self.distance,
            rounds: self.rounds,
            p: self.p,
            decoder: self.decoder,
            observable: self.observable,
        }
    }

    /// Logical error rate per shot.
    pub fn rate(&self) -> f64 {
        if self.shots == 0 {
            0.0
        } else {
            self.errors as f64 / self.shots as f64
        }
    }
}

/// Stopping rule for one case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Budget {
    pub max_shots: u64,
    pub max_errors: u64,
    pub batch: usize,
    /// Early stop once this many shots are in and the error rate is at
    /// least `early_stop_rate`.
    pub early_stop_shots: u64,
    pub early_stop_rate: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_shots: 1_000_000,
            max_errors: 100,
            batch: 1 << 14,
            early_stop_shots: 10_000,
            early_stop_rate: 0.4,
        }
    }
}

impl Budget {
    fn done(&self, shots: u64, errors: u64) -> bool {
        shots >= self.max_shots
            || errors >= self.max_errors
            || (shots >= self.early_stop_shots && errors as f64 >= self.early_stop_rate * shots as f64)
    }
}

/// Circuit, sampler and matching graph for one case, ready for shots.
pub struct PreparedCase {
    pub key: CaseKey,
    pub graph: MatchingGraph,
    sampler: FrameSampler,
}

impl PreparedCase {
    pub fn new(key: CaseKey, master_seed: u64) -> Result<Self, ExperimentError> {
        let case = key.to_string();
        let circuit = key.circuit()?;
        let mut dem = extract_dem(&circuit).map_err(|source| ExperimentError::Dem { case: case.clone(), source })?;
        decompose(&mut dem).map_err(|source| ExperimentError::Dem { case: case.clone(), source })?;
        let graph = MatchingGraph::from_dem(&dem).map_err(|source| ExperimentError::Matching { case: case.clone(), source })?;
        let sampler = FrameSampler::new(&circuit, key.seed(master_seed)).map_err(|source| ExperimentError::Sample { case, source })?;
        Ok(PreparedCase { key, graph, sampler })
    }

    /// Samples and decodes batch number `batch` of `shots` shots, returning
    /// the number of logical errors.
    pub fn run_batch(&self, batch: u64, shots: usize) -> Result<u64, ExperimentError> {
        let table = self.sampler.sample_batch(batch, shots);
        let tracked = (1u64 << self.graph.num_observables) - 1;
        let res = decode_batch(&self.graph, &table, self.key.decoder, tracked).map_err(|source| ExperimentError::Matching {
            case: self.key.to_string(),
            source,
        })?;
        Ok(res.errors as u64)
    }
}

/// Collects shots for one case until the budget's stopping rule fires.
/// The last batch is trimmed so the shot cap is never exceeded.
pub fn run_case(key: CaseKey, budget: &Budget, master_seed: u64) -> Result<CaseStats, ExperimentError> {
    if !key.observable.fits(key.code) || key.observable == Observable::Both {
        return Err(ExperimentError::Config {
            case: key.to_string(),
            message: "observable must be one of the code's own".into(),
        });
    }
    if budget.batch == 0 {
        return Err(ExperimentError::Config { case: key.to_string(), message: "batch size must be positive".into() });
    }
    let start = Instant::now();
    let prepared = PreparedCase::new(key, master_seed)?;
    let mut stats = CaseStats::empty(key);
    let mut batch = 0;
    while !budget.done(stats.shots, stats.errors) {
        let n = (budget.batch as u64).min(budget.max_shots - stats.shots) as usize;
        stats.errors += prepared.run_batch(batch, n)?;
        stats.shots += n as u64;
        batch += 1;
    }
    stats.seconds = start.elapsed().as_secs_f64();
    Ok(stats)
}

/// Sums rows with identical keys. Output is sorted by key, so the result
/// does not depend on input order.
pub fn merge_stats(rows: &[CaseStats]) -> Vec<CaseStats> {
    let mut out: Vec<CaseStats> = rows.to_vec();
    out.sort_by(|a, b| a.key().cmp_key(&b.key()));
    out.dedup_by(|later, kept| {
        if later.key().cmp_key(&kept.key()) == Ordering::Equal {
            kept.shots += later.shots;
            kept.errors += later.errors;
            kept.seconds += later.seconds;
            true
        } else {
            false
        }
    });
    out
}

pub fn write_csv_to<W: io::Write>(rows: &[CaseStats], writer: W) -> Result<(), ExperimentError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(CSV_COLUMNS)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(rows: &[CaseStats], path: &Path) -> Result<(), ExperimentError> {
    write_csv_to(rows, std::fs::File::create(path)?)
}

pub fn read_csv_from<R: io::Read>(reader: R) -> Result<Vec<CaseStats>, ExperimentError> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        return Err(ExperimentError::Config {
            case: "csv".into(),
            message: format!("unexpected header {header:?}"),
        });
    }
    let mut rows = Vec::new();
    for row in r.deserialize() {
        let row: CaseStats = row?;
        if row.errors > row.shots {
            return Err(ExperimentError::Config {
                case: row.key().to_string(),
                message: format!("{} errors in {} shots", row.errors, row.shots),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_csv(path: &Path) -> Result<Vec<CaseStats>, ExperimentError> {
    read_csv_from(std::fs::File::open(path)?)
}

pub const CSV_COLUMNS: [&str; 10] = [
    "code",
    "model",
    "distance",
    "rounds",
    "p",
    "decoder",
    "observable",
    "shots",
    "errors",
    "seconds",
];

/// A grid of cases: every combination of the listed values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseGroup {
    pub code: Code,
    pub models: Vec<NoiseModel>,
    pub distances: Vec<usize>,
    /// Rounds as a multiple of the distance; defaults to 3.
    #[serde(default = "default_rounds_factor")]
    pub rounds_factor: usize,
    pub ps: Vec<f64>,
    #[serde(default = "default_decoders")]
    pub decoders: Vec<DecoderKind>,
    #[serde(default = "default_observables")]
    pub observables: Vec<Observable>,
    /// Overrides the campaign budget for this group.
    #[serde(default)]
    pub budget: Option<Budget>,
}

fn default_rounds_factor() -> usize {
    3
}

fn default_decoders() -> Vec<DecoderKind> {
    vec![DecoderKind::Standard]
}

fn default_observables() -> Vec<Observable> {
    vec![Observable::Both]
}

/// Campaign config file (JSON).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Campaign {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub budget: Budget,
    pub groups: Vec<CaseGroup>,
}

impl Campaign {
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Expands the groups into cases, `both` into the code's two
    /// observables. Duplicates keep the first budget seen.
    pub fn cases(&self) -> Result<Vec<(CaseKey, Budget)>, ExperimentError> {
        let mut out = Vec::new();
        for g in &self.groups {
            for &model in &g.models {
                for &distance in &g.distances {
                    for &p in &g.ps {
                        for &decoder in &g.decoders {
                            for &obs in &g.observables {
                                let list = if obs == Observable::Both { Observable::pair(g.code).to_vec() } else { vec![obs] };
                                for observable in list {
                                    let key = CaseKey {
                                        code: g.code,
                                        model,
                                        distance,
                                        rounds: g.rounds_factor * distance,
                                        p,
                                        decoder,
                                        observable,
                                    };
                                    if !observable.fits(g.code) {
                                        return Err(ExperimentError::Config {
                                            case: key.to_string(),
                                            message: "observable does not belong to the code".into(),
                                        });
                                    }
                                    if !out.iter().any(|(k, _): &(CaseKey, Budget)| k.cmp_key(&key) == Ordering::Equal) {
                                        out.push((key, g.budget.unwrap_or(self.budget)));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Runs cases on `threads` workers. `sink` sees each finished row (in
/// completion order) and may persist it; the returned rows are merged and
/// sorted, so they depend only on the cases and the seed.
pub fn run_cases(
    cases: &[(CaseKey, Budget)],
    master_seed: u64,
    threads: usize,
    sink: &mut (dyn FnMut(&CaseStats) -> Result<(), ExperimentError> + Send),
) -> Result<Vec<CaseStats>, ExperimentError> {
    let next = AtomicUsize::new(0);
    let shared = Mutex::new((Vec::new(), sink, None::<ExperimentError>));
    std::thread::scope(|s| {
        for _ in 0..threads.max(1) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, AtomicOrdering::Relaxed);
                if i >= cases.len() || shared.lock().unwrap().2.is_some() {
                    break;
                }
                let (key, budget) = &cases[i];
                let result = run_case(*key, budget, master_seed);
                let mut guard = shared.lock().unwrap();
                let (rows, sink, failure) = &mut *guard;
                match result.and_then(|row| sink(&row).map(|_| row)) {
                    Ok(row) => rows.push(row),
                    Err(e) => {
                        failure.get_or_insert(e);
                    }
                }
            });
        }
    });
    let (rows, _, failure) = shared.into_inner().unwrap();
    match failure {
        Some(e) => Err(e),
        None => Ok(merge_stats(&rows)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(p: f64, shots: u64, errors: u64) -> CaseStats {
        let mut r = CaseStats::empty(CaseKey::new(
            Code::Honeycomb,
            NoiseModel::Sd6,
            8,
            p,
            DecoderKind::Standard,
            Observable::V,
        ));
        r.shots = shots;
        r.errors = errors;
        r
    }

    #[test]
    fn merge_sums_identical_keys() {
        let merged = merge_stats(&[row(1e-3, 1000, 7), row(2e-3, 5, 1), row(1e-3, 2000, 13)]);
        assert_eq!(merged.len(), 2);
        assert_eq!((merged[0].shots, merged[0].errors), (3000, 20));
        assert_eq!(merged[1].p, 2e-3);
    }

    #[test]
    fn budget_rules() {
        let b = Budget::default();
        assert!(!b.done(0, 0));
        assert!(b.done(1_000_000, 0));
        assert!(b.done(10, 100));
        let large = Budget { max_shots: 100_000_000, max_errors: 1000, ..b };
        assert!(!large.done(9_000, 900));
        assert!(!large.done(10_000, 999));
        assert!(b.done(10_000, 4_000));
        let no_cap = Budget { max_errors: u64::MAX, ..b };
        assert!(!no_cap.done(9_000, 4_000));
        assert!(!no_cap.done(10_000, 3_999));
    }

    #[test]
    fn seeds_differ_per_case_and_master() {
        let a = row(1e-3, 0, 0).key();
        let b = row(2e-3, 0, 0).key();
        assert_ne!(a.seed(0), b.seed(0));
        assert_ne!(a.seed(0), a.seed(1));
        assert_eq!(a.seed(7), a.seed(7));
    }

    #[test]
    fn both_expands_to_the_code_pair() {
        let c = Campaign::from_json(
            r#"{"seed": 3, "groups": [{"code": "surface", "models": ["SD6"], "distances": [3, 5], "ps": [0.001]}]}"#,
        )
        .unwrap();
        let cases = c.cases().unwrap();
        assert_eq!(cases.len(), 4);
        assert_eq!(cases[0].0.observable, Observable::X);
        assert_eq!(cases[1].0.observable, Observable::Z);
        assert_eq!(cases[2].0.rounds, 15);
        assert_eq!(cases[0].1, Budget::default());
    }
}
