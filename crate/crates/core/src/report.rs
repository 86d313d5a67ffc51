//! CSV summary format.
//!
//! One row per `(experiment, sweep value, method, metric)`:
//!
//! ```text
//! experiment,method,param_name,param_value,metric,p25,p50,p75
//! shepard-snr,multi,snr,1,bias_ratio,0.0123,0.0456,0.0789
//! ```
//!
//! Numbers use the shortest decimal that round-trips to the same `f64`.
//! Rows are sorted by experiment, parameter value, method, then metric.

use std::io::{Read, Write};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use crate::experiments::{Approach, MetricsTable};
use crate::stats::PercentileSummary;

pub const CSV_HEADER: &str = "experiment,method,param_name,param_value,metric,p25,p50,p75";

pub const METHODS: [&str; 2] = ["single", "multi"];
pub const METRICS: [&str; 2] = ["mse", "bias_ratio"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub experiment: String,
    pub method: String,
    pub param_name: String,
    pub param_value: f64,
    pub metric: String,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
}

impl CsvRow {
    fn sort_key(&self) -> (&str, f64, &str, &str) {
        (&self.experiment, self.param_value, &self.method, &self.metric)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if !METHODS.contains(&self.method.as_str()) {
            bail!("unknown method {:?}", self.method);
        }
        if !METRICS.contains(&self.metric.as_str()) {
            bail!("unknown metric {:?}", self.metric);
        }
        if !(self.p25 <= self.p50 && self.p50 <= self.p75) {
            bail!("percentiles out of order: {} {} {}", self.p25, self.p50, self.p75);
        }
        Ok(())
    }

    fn percentiles(&self) -> PercentileSummary {
        PercentileSummary {
            p25: self.p25,
            p50: self.p50,
            p75: self.p75,
        }
    }
}

/// Flattens a table into sorted CSV rows.
pub fn table_rows(table: &MetricsTable) -> Vec<CsvRow> {
    let experiment = table.experiment.name();
    let param_name = table.experiment.param_name();
    let mut rows = Vec::new();
    for sweep in &table.sweeps {
        for approach in [Approach::Single, Approach::Multi] {
            let summary = sweep.approach(approach).summary;
            for (metric, p) in [("mse", summary.mse), ("bias_ratio", summary.bias_ratio)] {
                rows.push(CsvRow {
                    experiment: experiment.to_string(),
                    method: approach.name().to_string(),
                    param_name: param_name.to_string(),
                    param_value: sweep.param_value,
                    metric: metric.to_string(),
                    p25: p.p25,
                    p50: p.p50,
                    p75: p.p75,
                });
            }
        }
    }
    sort_rows(&mut rows);
    rows
}

pub fn sort_rows(rows: &mut [CsvRow]) {
    rows.sort_by(|a, b| {
        let (ea, va, ma, ka) = a.sort_key();
        let (eb, vb, mb, kb) = b.sort_key();
        ea.cmp(eb)
            .then(va.total_cmp(&vb))
            .then(ma.cmp(mb))
            .then(ka.cmp(kb))
    });
}

pub fn write_csv<W: Write>(rows: &[CsvRow], mut out: W) -> std::io::Result<()> {
    let mut buf = String::with_capacity(64 * (rows.len() + 1));
    buf.push_str(CSV_HEADER);
    buf.push('\n');
    for r in rows {
        buf.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.experiment, r.method, r.param_name, r.param_value, r.metric, r.p25, r.p50, r.p75
        ));
    }
    out.write_all(buf.as_bytes())
}

pub fn render_csv(rows: &[CsvRow]) -> String {
    let mut out = Vec::new();
    write_csv(rows, &mut out).expect("writing to memory");
    String::from_utf8(out).expect("ASCII output")
}

/// Parses and validates a summary CSV. Errors name the offending line.
pub fn read_csv<R: Read>(input: R) -> anyhow::Result<Vec<CsvRow>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        bail!("line 1: unexpected header {:?}", header.join(","));
    }
    let mut rows = Vec::new();
    for (k, record) in reader.deserialize::<CsvRow>().enumerate() {
        let line = k + 2;
        let row = record.with_context(|| format!("line {line}: malformed row"))?;
        row.validate().with_context(|| format!("line {line}"))?;
        rows.push(row);
    }
    Ok(rows)
}

/// Percentile bands of one `(method, metric)` series, in sweep order.
pub fn series<'a>(
    rows: &'a [CsvRow],
    method: &'a str,
    metric: &'a str,
) -> impl Iterator<Item = (f64, PercentileSummary)> + 'a {
    rows.iter()
        .filter(move |r| r.method == method && r.metric == metric)
        .map(|r| (r.param_value, r.percentiles()))
}
