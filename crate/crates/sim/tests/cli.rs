use std::path::Path;
use std::process::Command;

use hav_sim::formats::{read_records, read_scenario};

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_hav-sim")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_run_batch_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let scen = d.join("s.json");
    let out = cli(&["generate", "--seed", "5", "--havs", "2", "--out", s(&scen)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read_scenario(&scen).unwrap().scenario.hav_count(), 2);

    let rec = d.join("rec.json");
    let trace = d.join("trace");
    let out = cli(&["run", "--scenario", s(&scen), "--trace", s(&trace), "--out", s(&rec)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(rec.exists());
    for f in ["hav_0.csv", "hav_1.csv", "events.jsonl"] {
        assert!(trace.join(f).exists(), "{f}");
    }

    let recs = d.join("recs.jsonl");
    let out = cli(&["batch", "--experiments", "3", "--havs", "1", "--seed", "1", "--max-steps", "500", "--out", s(&recs)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read_records(&recs).unwrap().len(), 3);

    let report = d.join("report.json");
    let hist = d.join("hist");
    let out = cli(&["analyze", "--in", s(&recs), "--report", s(&report), "--hist", s(&hist)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(report.exists());
    assert!(hist.join("m1_trailer_count_all.csv").exists());
}

#[test]
fn invalid_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{}").unwrap();
    let out = cli(&["run", "--scenario", s(&bad), "--out", s(&dir.path().join("r.json"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("hav-sim: "));

    let out = cli(&["batch", "--experiments", "0", "--havs", "1", "--seed", "1", "--out", s(&dir.path().join("x.jsonl"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_file_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&["analyze", "--in", s(&dir.path().join("none.jsonl")), "--report", s(&dir.path().join("r.json")), "--hist", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
}
