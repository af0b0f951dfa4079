use std::fs;

use hav_core::scenario::generate;
use hav_core::simulator::{run, run_experiment, ExperimentRecord, RECORD_VERSION};
use hav_core::{aggregate, ScenarioError, ScenarioParams};
use hav_sim::error::{Error, EXIT_GENERATION, EXIT_INVALID};
use hav_sim::formats::{
    read_histogram, read_records, read_scenario, write_histogram, write_records, write_report, write_scenario,
    write_trace, ScenarioFile, SCENARIO_VERSION,
};

fn records() -> Vec<ExperimentRecord> {
    let p = ScenarioParams { seed: 8, hav_count: 2, max_steps: 800, ..Default::default() };
    (0..4).map(|i| run_experiment(&p, i).unwrap()).collect()
}

#[test]
fn scenario_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let p = ScenarioParams { seed: 3, hav_count: 3, ..Default::default() };
    let file = ScenarioFile::new(p.clone(), generate(&p, 1, 0).unwrap());
    write_scenario(&path, &file).unwrap();
    assert_eq!(read_scenario(&path).unwrap(), file);
}

#[test]
fn scenario_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let p = ScenarioParams { seed: 3, hav_count: 2, ..Default::default() };
    let mut file = ScenarioFile::new(p.clone(), generate(&p, 0, 0).unwrap());

    file.version = SCENARIO_VERSION + 1;
    write_scenario(&path, &file).unwrap();
    assert!(matches!(read_scenario(&path), Err(Error::Version { .. })));

    file.version = SCENARIO_VERSION;
    file.scenario.starts.pop();
    write_scenario(&path, &file).unwrap();
    let e = read_scenario(&path).unwrap_err();
    assert_eq!(e.exit_code(), EXIT_INVALID);

    fs::write(&path, "{ not json").unwrap();
    assert!(matches!(read_scenario(&path), Err(Error::Json { .. })));
}

#[test]
fn records_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.jsonl");
    let recs = records();
    write_records(&path, &recs).unwrap();
    assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), recs.len());
    assert_eq!(read_records(&path).unwrap(), recs);
}

#[test]
fn records_reject_wrong_version_and_empty_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.jsonl");
    let mut recs = records();
    recs[2].version = RECORD_VERSION + 1;
    write_records(&path, &recs).unwrap();
    assert!(matches!(read_records(&path), Err(Error::Version { .. })));

    fs::write(&path, "").unwrap();
    assert_eq!(read_records(&path).unwrap_err().exit_code(), EXIT_INVALID);
}

#[test]
fn histogram_round_trip_and_report_files() {
    let dir = tempfile::tempdir().unwrap();
    let report = aggregate(&records());
    let paths = write_report(&dir.path().join("report.json"), &dir.path().join("hist"), &report).unwrap();
    let cohort = &report.cohorts[0];
    assert_eq!(paths.len(), cohort.histograms.len());
    for (h, path) in cohort.histograms.iter().zip(&paths) {
        assert_eq!(path.file_name().unwrap().to_str().unwrap(), format!("m2_{}.csv", h.name));
        assert_eq!(&read_histogram(path, &h.name).unwrap(), h);
    }

    let h = &cohort.histograms[0];
    let path = dir.path().join("h.csv");
    write_histogram(&path, h).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("lower,upper,count\n"));
    let mut lines: Vec<&str> = text.lines().collect();
    lines.swap(1, 2);
    fs::write(&path, lines.join("\n")).unwrap();
    assert!(matches!(read_histogram(&path, &h.name), Err(Error::Invalid(_))));
}

#[test]
fn trace_files_have_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let p = ScenarioParams { seed: 4, hav_count: 2, max_steps: 300, ..Default::default() };
    let s = generate(&p, 0, 0).unwrap();
    let out = run(&s, &p, true).unwrap();
    let paths = write_trace(dir.path(), out.trace.as_ref().unwrap()).unwrap();
    assert_eq!(paths.len(), 2);
    for (i, path) in paths.iter().enumerate() {
        let text = fs::read_to_string(path).unwrap();
        let mut lines = text.lines();
        let mut header = vec!["step".to_string(), "hav".into(), "x1".into(), "y1".into()];
        header.extend((0..=s.configs[i].trailer_count()).map(|j| format!("theta{j}")));
        header.extend(["v".to_string(), "phi".into()]);
        assert_eq!(lines.next().unwrap(), header.join(","));
        assert_eq!(lines.count(), out.record.final_step as usize + 1);
    }
}

#[test]
fn exit_codes() {
    let e = Error::from(ScenarioError::GenerationExhausted { index: 0, attempts: 16 });
    assert_eq!(e.exit_code(), EXIT_GENERATION);
    assert_eq!(Error::from(ScenarioError::ShapeMismatch).exit_code(), EXIT_INVALID);
}
