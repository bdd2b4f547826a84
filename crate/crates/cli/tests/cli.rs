use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use outbreak_core::analytics::case_fatality_rate;
use outbreak_core::dataset::load_dataset;
use outbreak_core::net::{export_graph, ExportFormat};

fn core_file(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core").join(rel)
}

fn fixture(name: &str) -> String {
    core_file(&format!("fixtures/{name}")).display().to_string()
}

fn outbreak(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_outbreak"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn cfr_matches_library() {
    let o = outbreak(&["analyze", "cfr", "--deaths", "4493", "--cases", "8997"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "0.4994");
    assert_eq!(stdout(&o).trim(), case_fatality_rate(4493, 8997).unwrap().rounded(4));
}

#[test]
fn cfr_with_zero_cases_is_domain_error() {
    let o = outbreak(&["analyze", "cfr", "--deaths", "0", "--cases", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("ZeroCases"));
}

#[test]
fn missing_flag_is_usage_error() {
    let o = outbreak(&["analyze", "cfr", "--deaths", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"));
    let o = outbreak(&[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn version_is_one_stable_line() {
    let a = stdout(&outbreak(&["--version"]));
    let b = stdout(&outbreak(&["--version"]));
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 1);
    assert!(a.contains(env!("CARGO_PKG_VERSION")));
    assert!(a.contains(&format!("format-rev {}", outbreak_core::FORMAT_REVISION)));
}

#[test]
fn nigeria_dot_export_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.dot");
    let o = outbreak(&["net", "--in", &fixture("nigeria.jsonl"), "--export", "dot", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let written = fs::read_to_string(&out).unwrap();
    let golden = fs::read_to_string(core_file("tests/golden/nigeria.dot")).unwrap();
    assert_eq!(written, golden);

    let file = fs::File::open(fixture("nigeria.jsonl")).unwrap();
    let g = load_dataset(std::io::BufReader::new(file)).unwrap().graph;
    assert_eq!(written, export_graph(&g, ExportFormat::Dot));
    let leftovers: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(leftovers.len(), 1);
}

#[test]
fn net_summary_and_chain() {
    let o = outbreak(&["net", "--in", &fixture("nigeria.jsonl")]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["nodes"], 20);
    assert_eq!(v["cluster_sizes"], serde_json::json!([20]));
    assert_eq!(v["cross_border"][0]["downstream_size"], 20);

    let o = outbreak(&["net", "--in", &fixture("nigeria.jsonl"), "--chain", "NG-17"]);
    assert_eq!(stdout(&o).trim(), "NG-01 -> NG-05 -> NG-14 -> NG-17");
}

#[test]
fn graph_json_round_trips_through_cli() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("us.json");
    let o = outbreak(&["export", "--in", &fixture("us.jsonl"), "--format", "json", "--out", json.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = outbreak(&["net", "--in", json.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!((v["nodes"].as_u64(), v["infection_edges"].as_u64(), v["travel_events"].as_u64()), (Some(9), Some(2), Some(7)));
}

#[test]
fn spreaders_and_hcw() {
    let o = outbreak(&["analyze", "spreaders", "--in", &fixture("nigeria.jsonl"), "--k", "5"]);
    assert_eq!(stdout(&o), "NG-01\t12\n");
    let o = outbreak(&["analyze", "spreaders", "--in", &fixture("nigeria.jsonl"), "--k", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = outbreak(&["analyze", "hcw", "--in", &fixture("nigeria.jsonl")]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["cases"], 11);
}

#[test]
fn epi_week_and_lag() {
    let o = outbreak(&["analyze", "epi-week", "--date", "2014-08-07", "--anchor", "2014-03-19"]);
    assert_eq!(stdout(&o).trim(), "21");
    let o = outbreak(&["analyze", "epi-week", "--date", "2014-03-01", "--anchor", "2014-03-19"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("BeforeAnchor"));
    let o = outbreak(&[
        "analyze", "lag", "--in", &fixture("milestones.csv"), "--from", "outbreak_report", "--to", "who_action",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["weeks"], 20);
}

#[test]
fn timeline_csv() {
    let o = outbreak(&["timeline", "--in", &fixture("milestones.csv")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("date,week,kind,country,description\n2014-03-19,1,outbreak_report"));
    assert!(text.contains("2014-08-08,21,who_action"));
}

#[test]
fn malformed_headline_reports_line() {
    let o = outbreak(&["ingest", "--in", &fixture("promed_headlines_malformed.txt"), "--schema", "headlines"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("MalformedHeadline"), "{err}");
    assert!(err.contains("line 2"), "{err}");

    let o = outbreak(&["ingest", "--in", &fixture("promed_headlines.txt"), "--schema", "headlines"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 30);
}

#[test]
fn ingest_promed_window() {
    let o = outbreak(&[
        "ingest", "--in", &fixture("promed_reports.csv"), "--schema", "reports",
        "--window", "2014-03-19:2014-10-15", "--keyword", "ebola", "--drop-summaries",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 240);
    let o = outbreak(&["ingest", "--in", &fixture("promed_reports.csv"), "--schema", "reports", "--window", "2014-10-15:2014-03-19"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("InvalidWindow"));
}

#[test]
fn media_commands() {
    let table = fixture("table1.csv");
    let o = outbreak(&["media", "lookup", "--in", &table, "--outlet", "CNN", "--window", "2014-08-01:2014-08-31"]);
    assert_eq!(stdout(&o).trim(), "412");
    let o = outbreak(&["media", "reconcile", "--in", &table, "--outlet", "BBC", "--window", "2014-04-16:2014-10-15"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!((v["full_window_count"].as_u64(), v["sub_period_sum"].as_u64()), (Some(650), Some(651)));
    let o = outbreak(&["media", "lookup", "--in", &table, "--outlet", "Reuters", "--window", "2014-08-01:2014-08-31"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("NotFound"));

    let dir = tempfile::tempdir().unwrap();
    let (cnn, bbc) = (dir.path().join("cnn.csv"), dir.path().join("bbc.csv"));
    for (outlet, path) in [("CNN", &cnn), ("BBC", &bbc)] {
        let o = outbreak(&[
            "media", "series", "--in", &table, "--outlet", outlet, "--window", "2014-04-16:2014-10-15",
            "--out", path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let o = outbreak(&["media", "correlate", cnn.to_str().unwrap(), bbc.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r: f64 = stdout(&o).trim().parse().unwrap();
    assert!(r > 0.0 && r <= 1.0);

    let o = outbreak(&[
        "media", "bucket", "--in", &fixture("promed_reports.csv"), "--window", "2014-03-19:2014-10-15",
        "--granularity", "weekly",
    ]);
    assert_eq!(stdout(&o).lines().count(), 32);
}

#[test]
fn registry_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let reg = dir.path().join("reg.jsonl");
    let o = outbreak(&["registry", "build", "--in", &fixture("nigeria.jsonl"), "--out", reg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = outbreak(&["registry", "counts", "--in", reg.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["by_outcome"]["dead"], 8);
    let o = outbreak(&["registry", "backtrack", "--in", reg.to_str().unwrap(), "--case", "NG-01"]);
    assert_eq!(stdout(&o).lines().count(), 19);
    let o = outbreak(&["registry", "backtrack", "--in", reg.to_str().unwrap(), "--case", "NG-99"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("UnknownCase"));
}

#[test]
fn simulate_is_seeded() {
    let cfg = fixture("sim_star.json");
    let a = outbreak(&["simulate", "--in", &cfg, "--seed", "11"]);
    let b = outbreak(&["simulate", "--in", &cfg, "--seed", "11"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let r: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(r["total_infected"].as_u64().unwrap() >= 1);

    let e1 = outbreak(&["simulate", "--in", &cfg, "--seed", "3", "--runs", "500"]);
    let e2 = outbreak(&["simulate", "--in", &cfg, "--seed", "3", "--runs", "500"]);
    assert_eq!(e1.stdout, e2.stdout);
    let s: serde_json::Value = serde_json::from_slice(&e1.stdout).unwrap();
    assert_eq!(s["runs"], 500);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"contacts":{"persons":[]},"seed_person":"ghost"}"#).unwrap();
    let o = outbreak(&["simulate", "--in", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("UnknownSeedPerson"));
}
