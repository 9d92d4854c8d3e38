use honeycomb_memory::experiment::*;
use honeycomb_memory::generate::NoiseModel;
use honeycomb_memory::matching::DecoderKind;

fn key(code: Code, model: NoiseModel, d: usize, p: f64, obs: Observable) -> CaseKey {
    CaseKey::new(code, model, d, p, DecoderKind::Standard, obs)
}

fn budget(max_shots: u64, max_errors: u64, batch: usize) -> Budget {
    Budget { max_shots, max_errors, batch, ..Budget::default() }
}

#[test]
fn noiseless_case_runs_to_the_shot_cap() {
    let k = key(Code::Honeycomb, NoiseModel::Sd6, 4, 0.0, Observable::V);
    let s = run_case(k, &budget(1000, 10, 300), 1).unwrap();
    assert_eq!((s.shots, s.errors), (1000, 0));
}

#[test]
fn far_above_threshold_stops_early() {
    let k = key(Code::Honeycomb, NoiseModel::Em3, 4, 0.05, Observable::H);
    let b = Budget { max_shots: 1_000_000, max_errors: 1_000_000, batch: 200, early_stop_shots: 400, early_stop_rate: 0.4 };
    let s = run_case(k, &b, 1).unwrap();
    assert!(s.shots >= 400 && s.shots <= 600, "{}", s.shots);
    assert!(s.errors as f64 >= 0.4 * s.shots as f64);
}

#[test]
fn error_cap_stops_the_case() {
    let k = key(Code::Surface, NoiseModel::Sd6, 3, 0.01, Observable::Z);
    let s = run_case(k, &budget(1_000_000, 20, 64), 3).unwrap();
    assert!(s.errors >= 20);
    // One batch more than necessary at most.
    assert!(s.errors < 20 + 64);
    assert!(s.shots < 1_000_000);
}

#[test]
fn both_is_not_a_runnable_observable() {
    let k = key(Code::Surface, NoiseModel::Sd6, 3, 0.01, Observable::Both);
    assert!(run_case(k, &Budget::default(), 0).is_err());
    let k = key(Code::Surface, NoiseModel::Sd6, 3, 0.01, Observable::H);
    assert!(run_case(k, &Budget::default(), 0).is_err());
}

#[test]
fn same_seed_same_counts() {
    let cases: Vec<(CaseKey, Budget)> = [0.001, 0.0015]
        .iter()
        .flat_map(|&p| Observable::pair(Code::Honeycomb).map(|o| key(Code::Honeycomb, NoiseModel::Si1000, 4, p, o)))
        .map(|k| (k, budget(600, 1_000, 200)))
        .collect();
    let strip = |rows: Vec<CaseStats>| rows.into_iter().map(|r| (r.key(), r.shots, r.errors)).collect::<Vec<_>>();
    let mut none = |_: &CaseStats| Ok(());
    let a = strip(run_cases(&cases, 42, 1, &mut none).unwrap());
    let b = strip(run_cases(&cases, 42, 3, &mut none).unwrap());
    assert_eq!(a, b);
    assert!(a.iter().any(|r| r.2 > 0));
    let c = strip(run_cases(&cases, 43, 2, &mut none).unwrap());
    assert_ne!(a, c);
}

#[test]
fn sink_sees_every_case() {
    let cases: Vec<(CaseKey, Budget)> = [3usize, 5]
        .iter()
        .map(|&d| (key(Code::Surface, NoiseModel::Sd6, d, 0.002, Observable::X), budget(256, 10, 256)))
        .collect();
    let mut seen = Vec::new();
    let mut sink = |r: &CaseStats| {
        seen.push(r.distance);
        Ok(())
    };
    let rows = run_cases(&cases, 0, 2, &mut sink).unwrap();
    seen.sort_unstable();
    assert_eq!(seen, vec![3, 5]);
    assert_eq!(rows.len(), 2);
}

#[test]
fn csv_file_round_trip() {
    let mut rows = Vec::new();
    for i in 0..50u64 {
        let code = if i % 2 == 0 { Code::Honeycomb } else { Code::Surface };
        let obs = Observable::pair(code)[(i % 4 / 2) as usize];
        let d = if code == Code::Honeycomb { 4 + 4 * (i % 3) as usize } else { 3 + 2 * (i % 3) as usize };
        let mut r = CaseStats::empty(key(code, NoiseModel::ALL[(i % 4) as usize], d, 1e-3 * (1 + i) as f64, obs));
        r.shots = 1000 + i;
        r.errors = i;
        r.seconds = i as f64 * 0.25;
        rows.push(r);
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("stats.csv");
    write_csv(&rows, &path).unwrap();
    assert_eq!(read_csv(&path).unwrap(), rows);

    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
    assert_eq!(text.lines().count(), 51);
}

#[test]
fn header_only_csv_is_empty() {
    let text = CSV_COLUMNS.join(",") + "\n";
    assert!(read_csv_from(text.as_bytes()).unwrap().is_empty());
    let mut buf = Vec::new();
    write_csv_to(&[], &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), text);
}

#[test]
fn malformed_csv_is_rejected() {
    assert!(read_csv_from("code,model\nhoneycomb,SD6\n".as_bytes()).is_err());
    let bad = format!("{}\nsurface,SD6,3,9,0.001,standard,X,10,11,0.5\n", CSV_COLUMNS.join(","));
    assert!(read_csv_from(bad.as_bytes()).is_err());
}

#[test]
fn campaign_file_expands_and_dedups() {
    let text = r#"{
        "seed": 5,
        "budget": {"max_shots": 100},
        "groups": [
            {"code": "honeycomb", "models": ["SD6", "EM3"], "distances": [4, 8], "ps": [0.001],
             "budget": {"max_shots": 7}},
            {"code": "honeycomb", "models": ["SD6"], "distances": [4], "ps": [0.001, 0.002], "observables": ["H"]}
        ]
    }"#;
    let c = Campaign::from_json(text).unwrap();
    let cases = c.cases().unwrap();
    // 2 models x 2 distances x 2 observables, plus one new (p=0.002, H).
    assert_eq!(cases.len(), 9);
    let first = cases.iter().find(|(k, _)| k.p == 0.001 && k.model == NoiseModel::Sd6 && k.distance == 4 && k.observable == Observable::H);
    assert_eq!(first.unwrap().1.max_shots, 7);
    assert!(cases.iter().all(|(k, _)| k.rounds == 3 * k.distance));
    assert_eq!(cases.iter().find(|(k, _)| k.p == 0.002).unwrap().1.max_shots, 100);
    assert!(Campaign::from_json("{\"groups\": 3}").is_err());
}
