use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use honeycomb_memory::analysis::{metrics, threshold_brackets, write_metrics_to};
use honeycomb_memory::dem::{decompose, extract_dem};
use honeycomb_memory::experiment::{
    merge_stats, read_csv, run_cases, write_csv, Budget, Campaign, CaseGroup, CaseKey, CaseStats, Code, Observable,
};
use honeycomb_memory::generate::NoiseModel;
use honeycomb_memory::matching::DecoderKind;
use honeycomb_memory::sampler::sample;

#[derive(Parser)]
#[command(name = "hcmem", about = "Honeycomb and surface code memory experiments", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a noisy memory circuit.
    Gen(CircuitArgs),
    /// Print the detector error model of a circuit.
    Dem {
        #[command(flatten)]
        circuit: CircuitArgs,
        /// Leave hyperedges undecomposed.
        #[arg(long)]
        raw: bool,
    },
    /// Sample detection events: per-detector fractions as JSON, or raw
    /// events (one line of 0/1 per shot, detectors then observables).
    Sample {
        #[command(flatten)]
        circuit: CircuitArgs,
        #[arg(long, default_value_t = 10_000)]
        shots: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        raw_events: bool,
    },
    /// Run a campaign and write per-case statistics as CSV.
    Run(RunArgs),
    /// Fit a statistics CSV: metrics CSV plus threshold brackets as JSON.
    Fit {
        stats: Vec<PathBuf>,
        /// Metrics CSV destination (stdout if absent).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Threshold brackets JSON destination.
        #[arg(long)]
        thresholds: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CircuitArgs {
    #[arg(long, default_value = "honeycomb")]
    code: Code,
    #[arg(long, default_value = "SD6")]
    model: NoiseModel,
    #[arg(long, default_value_t = 4)]
    distance: usize,
    /// Defaults to 3 * distance.
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long, default_value_t = 1e-3)]
    p: f64,
    /// H or V for the honeycomb code, X or Z for the surface code.
    #[arg(long)]
    observable: Option<Observable>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl CircuitArgs {
    fn key(&self) -> CaseKey {
        let observable = self.observable.unwrap_or(Observable::pair(self.code)[1]);
        let mut key = CaseKey::new(self.code, self.model, self.distance, self.p, DecoderKind::Standard, observable);
        if let Some(r) = self.rounds {
            key.rounds = r;
        }
        key
    }
}

#[derive(Args)]
struct RunArgs {
    /// JSON campaign file; when given, the case flags are ignored.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "honeycomb")]
    code: Code,
    #[arg(long, default_value = "SD6", num_args = 1..)]
    model: Vec<NoiseModel>,
    #[arg(long, default_value = "4", num_args = 1..)]
    distance: Vec<usize>,
    /// Rounds as a multiple of the distance.
    #[arg(long, default_value_t = 3)]
    rounds: usize,
    #[arg(long, default_value = "0.001", num_args = 1..)]
    p: Vec<f64>,
    #[arg(long, default_value = "standard", num_args = 1..)]
    decoder: Vec<DecoderKind>,
    #[arg(long, default_value = "both", num_args = 1..)]
    observable: Vec<Observable>,
    #[arg(long)]
    shots_cap: Option<u64>,
    #[arg(long)]
    errors_cap: Option<u64>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (defaults to available cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Destination CSV. Existing rows are kept and merged with new ones.
    #[arg(long)]
    out: PathBuf,
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn campaign(args: &RunArgs) -> Result<Campaign> {
    let mut c = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Campaign::from_json(&text)?
        }
        None => Campaign {
            seed: 0,
            budget: Budget::default(),
            groups: vec![CaseGroup {
                code: args.code,
                models: args.model.clone(),
                distances: args.distance.clone(),
                rounds_factor: args.rounds,
                ps: args.p.clone(),
                decoders: args.decoder.clone(),
                observables: args.observable.clone(),
                budget: None,
            }],
        },
    };
    if let Some(s) = args.seed {
        c.seed = s;
    }
    let budgets = std::iter::once(&mut c.budget).chain(c.groups.iter_mut().filter_map(|g| g.budget.as_mut()));
    for b in budgets {
        if let Some(v) = args.shots_cap {
            b.max_shots = v;
        }
        if let Some(v) = args.errors_cap {
            b.max_errors = v;
        }
        if let Some(v) = args.batch {
            b.batch = v;
        }
    }
    Ok(c)
}

fn run(args: &RunArgs) -> Result<()> {
    let c = campaign(args)?;
    let cases = c.cases()?;
    let existing: Vec<CaseStats> = if args.out.exists() { read_csv(&args.out)? } else { Vec::new() };
    let threads = args
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    eprintln!("{} cases on {} thread(s)", cases.len(), threads);
    let mut done = existing.clone();
    let out: &Path = &args.out;
    let mut sink = |row: &CaseStats| {
        eprintln!(
            "{}  shots={} errors={} {:.1}s",
            row.key(),
            row.shots,
            row.errors,
            row.seconds
        );
        done.push(row.clone());
        write_csv(&merge_stats(&done), out)
    };
    run_cases(&cases, c.seed, threads, &mut sink)?;
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Gen(a) => emit(&a.out, &a.key().circuit()?.to_string()),
        Command::Dem { circuit, raw } => {
            let mut dem = extract_dem(&circuit.key().circuit()?)?;
            if !raw {
                decompose(&mut dem)?;
            }
            emit(&circuit.out, &dem.to_string())
        }
        Command::Sample { circuit, shots, seed, raw_events } => {
            if shots == 0 {
                bail!("--shots must be positive");
            }
            let table = sample(&circuit.key().circuit()?, shots, seed)?;
            let text = if raw_events {
                let mut s = String::new();
                for shot in 0..table.shots {
                    for d in 0..table.num_detectors {
                        s.push(if table.detector(shot, d) { '1' } else { '0' });
                    }
                    let mask = table.observable_mask(shot);
                    for k in 0..table.num_observables {
                        s.push(if mask >> k & 1 == 1 { '1' } else { '0' });
                    }
                    s.push('\n');
                }
                s
            } else {
                let f = table.fractions()?;
                let mut s = serde_json::to_string_pretty(&serde_json::json!({
                    "shots": table.shots,
                    "mean": f.mean,
                    "per_detector": f.per_detector,
                }))?;
                s.push('\n');
                s
            };
            emit(&circuit.out, &text)
        }
        Command::Run(a) => run(&a),
        Command::Fit { stats, out, thresholds } => {
            if stats.is_empty() {
                bail!("no statistics files given");
            }
            let mut rows = Vec::new();
            for path in &stats {
                rows.extend(read_csv(path).with_context(|| format!("reading {}", path.display()))?);
            }
            let mut buf = Vec::new();
            write_metrics_to(&metrics(&rows), &mut buf)?;
            emit(&out, std::str::from_utf8(&buf)?)?;
            if let Some(path) = thresholds {
                let text = serde_json::to_string_pretty(&threshold_brackets(&rows))?;
                fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(())
        }
    }
}
