//! Merge bench CSVs into one summary table per experiment, A and size.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::bench::{format_seconds, BenchRow};
use crate::error::Result;
use crate::layouts::LayoutSpec;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub experiment: String,
    pub layout: String,
    #[serde(rename = "A")]
    pub a: Option<u64>,
    pub m_bytes: u64,
    pub variant: String,
    pub engine: String,
    pub transport: String,
    pub case_id: String,
    pub mean_s: String,
    pub min_s: String,
    pub max_s: String,
    /// Mean over the fastest mean among rows of the same experiment, A and size.
    pub ratio_to_best: String,
}

struct Merged {
    row: BenchRow,
    means: Vec<f64>,
    min: f64,
    max: f64,
}

/// Rows sharing a case id are merged: means averaged, extremes kept.
pub fn summarize(rows: impl IntoIterator<Item = BenchRow>) -> Vec<SummaryRow> {
    let mut merged: BTreeMap<String, Merged> = BTreeMap::new();
    for row in rows {
        let (mean, min, max) = (
            row.mean(),
            row.min_s.parse().unwrap_or(f64::NAN),
            row.max_s.parse().unwrap_or(f64::NAN),
        );
        match merged.get_mut(&row.case_id) {
            Some(m) => {
                if !m.means.contains(&mean) {
                    m.means.push(mean);
                }
                m.min = m.min.min(min);
                m.max = m.max.max(max);
            }
            None => {
                merged.insert(
                    row.case_id.clone(),
                    Merged {
                        row,
                        means: vec![mean],
                        min,
                        max,
                    },
                );
            }
        }
    }
    let entries: Vec<(String, Merged)> = merged.into_iter().collect();
    let experiment = |id: &str| id.split('/').next().unwrap_or(id).to_string();
    let mean_of = |m: &Merged| m.means.iter().sum::<f64>() / m.means.len() as f64;
    let mut best: BTreeMap<(String, Option<u64>, u64), f64> = BTreeMap::new();
    for (id, m) in &entries {
        let key = (experiment(id), m.row.a, m.row.m_bytes);
        let v = best.entry(key).or_insert(f64::INFINITY);
        *v = v.min(mean_of(m));
    }
    let mut out: Vec<SummaryRow> = entries
        .into_iter()
        .map(|(id, m)| {
            let mean = mean_of(&m);
            let b = best[&(experiment(&id), m.row.a, m.row.m_bytes)];
            let layout = serde_json::from_str::<LayoutSpec>(&m.row.spec_json)
                .map(|s| s.id.to_string())
                .unwrap_or_else(|_| "custom".into());
            SummaryRow {
                experiment: experiment(&id),
                layout,
                a: m.row.a,
                m_bytes: m.row.m_bytes,
                variant: m.row.variant.clone(),
                engine: m.row.engine.clone(),
                transport: m.row.transport.clone(),
                mean_s: format_seconds(mean),
                min_s: format_seconds(m.min),
                max_s: format_seconds(m.max),
                ratio_to_best: if b > 0.0 {
                    format!("{:.3}", mean / b)
                } else {
                    "1.000".into()
                },
                case_id: id,
            }
        })
        .collect();
    out.sort_by(|x, y| {
        (&x.experiment, x.a, x.m_bytes, &x.case_id).cmp(&(
            &y.experiment,
            y.a,
            y.m_bytes,
            &y.case_id,
        ))
    });
    out
}

pub fn write_summary_csv<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
