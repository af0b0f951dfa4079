//! On-disk formats.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use hav_core::analysis::Histogram;
use hav_core::angle::wrap;
use hav_core::simulator::{TraceRow, RECORD_VERSION};
use hav_core::{ExperimentRecord, Scenario, ScenarioParams, SimEvent, SummaryReport};
use serde::{Deserialize, Serialize};

use crate::Error;

pub const SCENARIO_VERSION: u32 = 1;

/// A replayable scenario: the generation parameters plus the sampled
/// vehicles and poses.
///
/// ```json
/// { "version": 1, "params": { ... }, "seed": 42, "index": 0,
///   "configs": [{ "truck_length": 4.0, "trailer_lengths": [3.0] }],
///   "starts": [{ "x": 0, "y": 0, "heading": 0 }],
///   "first_goals": [...], "second_goals": [...], "area_side": 17.7 }
/// ```
///
/// Missing `params` fields take their defaults; missing vehicle limits
/// default to 48 deg steering, 90 deg articulation and a 75 deg threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub version: u32,
    #[serde(default)]
    pub params: ScenarioParams,
    #[serde(flatten)]
    pub scenario: Scenario,
}

impl ScenarioFile {
    pub fn new(params: ScenarioParams, scenario: Scenario) -> Self {
        Self {
            version: SCENARIO_VERSION,
            params,
            scenario,
        }
    }
}

fn json_err(path: &Path) -> impl FnOnce(serde_json::Error) -> Error + '_ {
    move |source| Error::Json {
        path: path.to_path_buf(),
        source,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<(), Error> {
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_scenario(path: &Path) -> Result<ScenarioFile, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut file: ScenarioFile = serde_json::from_str(&text).map_err(json_err(path))?;
    if file.version != SCENARIO_VERSION {
        return Err(Error::Version {
            path: path.to_path_buf(),
            found: file.version,
            expected: SCENARIO_VERSION,
        });
    }
    file.scenario.check()?;
    file.params.validate()?;
    let s = &mut file.scenario;
    for pose in s
        .starts
        .iter_mut()
        .chain(s.first_goals.iter_mut())
        .chain(s.second_goals.iter_mut())
    {
        pose.heading = wrap(pose.heading);
    }
    file.params.hav_count = s.configs.len();
    Ok(file)
}

pub fn write_scenario(path: &Path, file: &ScenarioFile) -> Result<(), Error> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, file).map_err(json_err(path))?;
    writeln!(w).map_err(|e| Error::io(path, e))?;
    finish(w, path)
}

/// Records as JSON lines, one per experiment.
pub fn records_to_jsonl(records: &[ExperimentRecord]) -> Result<String, serde_json::Error> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_records(path: &Path, records: &[ExperimentRecord]) -> Result<(), Error> {
    let text = records_to_jsonl(records).map_err(json_err(path))?;
    let mut w = create(path)?;
    w.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
    finish(w, path)
}

pub fn read_records(path: &Path) -> Result<Vec<ExperimentRecord>, Error> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (n, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ExperimentRecord = serde_json::from_str(&line).map_err(|source| Error::Json {
            path: PathBuf::from(format!("{}:{}", path.display(), n + 1)),
            source,
        })?;
        if record.version != RECORD_VERSION {
            return Err(Error::Version {
                path: path.to_path_buf(),
                found: record.version,
                expected: RECORD_VERSION,
            });
        }
        records.push(record);
    }
    if records.is_empty() {
        return Err(Error::Invalid(format!("{}: no records", path.display())));
    }
    Ok(records)
}

pub fn write_record(path: &Path, record: &ExperimentRecord) -> Result<(), Error> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, record).map_err(json_err(path))?;
    writeln!(w).map_err(|e| Error::io(path, e))?;
    finish(w, path)
}

pub fn write_events(path: &Path, events: &[SimEvent]) -> Result<(), Error> {
    let mut w = create(path)?;
    for e in events {
        serde_json::to_writer(&mut w, e).map_err(json_err(path))?;
        writeln!(w).map_err(|e| Error::io(path, e))?;
    }
    finish(w, path)
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `hav_<i>.csv` for every vehicle in `rows` into `dir`.
pub fn write_trace(dir: &Path, rows: &[TraceRow]) -> Result<Vec<PathBuf>, Error> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let havs = rows.iter().map(|r| r.hav + 1).max().unwrap_or(0);
    let mut paths = Vec::with_capacity(havs);
    for hav in 0..havs {
        let path = dir.join(format!("hav_{hav}.csv"));
        let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
        let mut header_done = false;
        for r in rows.iter().filter(|r| r.hav == hav) {
            if !header_done {
                let mut header = vec!["step".to_string(), "hav".into(), "x1".into(), "y1".into()];
                header.extend((0..r.headings.len()).map(|j| format!("theta{j}")));
                header.extend(["v".to_string(), "phi".into()]);
                w.write_record(&header).map_err(csv_err(&path))?;
                header_done = true;
            }
            let mut rec = vec![
                r.step.to_string(),
                r.hav.to_string(),
                r.rear_axle.x.to_string(),
                r.rear_axle.y.to_string(),
            ];
            rec.extend(r.headings.iter().map(f64::to_string));
            rec.push(r.control.speed.to_string());
            rec.push(r.control.steering.to_string());
            w.write_record(&rec).map_err(csv_err(&path))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        paths.push(path);
    }
    Ok(paths)
}

#[derive(Debug, Serialize, Deserialize)]
struct BinRow {
    lower: f64,
    upper: f64,
    count: u64,
}

pub fn write_histogram(path: &Path, hist: &Histogram) -> Result<(), Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for (k, &count) in hist.counts.iter().enumerate() {
        w.serialize(BinRow {
            lower: hist.edges[k],
            upper: hist.edges[k + 1],
            count,
        })
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_histogram(path: &Path, name: &str) -> Result<Histogram, Error> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let mut edges = Vec::new();
    let mut counts = Vec::new();
    for row in r.deserialize() {
        let row: BinRow = row.map_err(csv_err(path))?;
        if edges.is_empty() {
            edges.push(row.lower);
        } else if edges.last() != Some(&row.lower) {
            return Err(Error::Invalid(format!("{}: bins are not contiguous", path.display())));
        }
        edges.push(row.upper);
        counts.push(row.count);
    }
    Ok(Histogram {
        name: name.to_string(),
        edges,
        counts,
    })
}

/// Writes the report JSON and `m<M>_<name>.csv` for every histogram of every
/// cohort into `hist_dir`. Returns the CSV paths.
pub fn write_report(
    report_path: &Path,
    hist_dir: &Path,
    report: &SummaryReport,
) -> Result<Vec<PathBuf>, Error> {
    let mut w = create(report_path)?;
    serde_json::to_writer_pretty(&mut w, report).map_err(json_err(report_path))?;
    writeln!(w).map_err(|e| Error::io(report_path, e))?;
    finish(w, report_path)?;

    let mut paths = Vec::new();
    for cohort in &report.cohorts {
        for h in &cohort.histograms {
            let path = hist_dir.join(format!("m{}_{}.csv", cohort.hav_count, h.name));
            write_histogram(&path, h)?;
            paths.push(path);
        }
    }
    Ok(paths)
}
