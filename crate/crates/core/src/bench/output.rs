use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::case::BenchCase;
use super::stats::RunStats;
use crate::error::Result;
use crate::typecore::attributes;

/// Seconds with nine fractional digits, independent of locale.
pub fn format_seconds(s: f64) -> String {
    format!("{s:.9}")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub case_id: String,
    pub spec_json: String,
    pub variant: String,
    pub engine: String,
    pub transport: String,
    pub m_bytes: u64,
    #[serde(rename = "A")]
    pub a: Option<u64>,
    pub r: usize,
    pub nrep: usize,
    pub mean_s: String,
    pub min_s: String,
    pub max_s: String,
}

impl BenchRow {
    pub fn new(case: &BenchCase, stats: &RunStats) -> Result<Self> {
        let m_bytes = attributes(&case.datatype)?.size * case.count;
        let spec_json = match &case.spec {
            Some(s) => serde_json::to_string(s)?,
            None => serde_json::to_string(&*case.datatype)?,
        };
        Ok(BenchRow {
            case_id: case.case_id.clone(),
            spec_json,
            variant: case.method.to_string(),
            engine: case.engine.to_string(),
            transport: case.transport.to_string(),
            m_bytes,
            a: case.spec.as_ref().and_then(|s| s.a),
            r: stats.r,
            nrep: stats.nrep,
            mean_s: format_seconds(stats.mean_of_medians),
            min_s: format_seconds(stats.min_of_medians),
            max_s: format_seconds(stats.max_of_medians),
        })
    }

    pub fn mean(&self) -> f64 {
        self.mean_s.parse().unwrap_or(f64::NAN)
    }
}

pub fn write_bench_csv<W: Write>(out: W, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record([
            "case_id",
            "spec_json",
            "variant",
            "engine",
            "transport",
            "m_bytes",
            "A",
            "r",
            "nrep",
            "mean_s",
            "min_s",
            "max_s",
        ])?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_bench_csv<R: Read>(input: R) -> Result<Vec<BenchRow>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

pub fn write_bench_csv_file(path: &Path, rows: &[BenchRow]) -> Result<()> {
    write_bench_csv(std::fs::File::create(path)?, rows)
}

pub fn read_bench_csv_file(path: &Path) -> Result<Vec<BenchRow>> {
    read_bench_csv(std::fs::File::open(path)?)
}

#[derive(Serialize)]
struct RawEntry<'a> {
    case_id: &'a str,
    per_run_medians: &'a [f64],
    samples_s: &'a Option<Vec<Vec<f64>>>,
}

/// JSON list with every raw sample of every case.
pub fn write_raw_sidecar(path: &Path, stats: &[RunStats]) -> Result<()> {
    let entries: Vec<RawEntry> = stats
        .iter()
        .map(|s| RawEntry {
            case_id: &s.case_id,
            per_run_medians: &s.per_run_medians,
            samples_s: &s.raw,
        })
        .collect();
    let file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(file, &entries)?;
    Ok(())
}
