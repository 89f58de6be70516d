//! CSV outputs.
//!
//! Numbers are written with Rust's shortest round-trip `Display` formatting.
//! Files are written to a temporary sibling and renamed into place.

use std::io::Write;
use std::path::Path;

use num_traits::Float;
use serde::Deserialize;

use crate::bounds::BoundReport;
use crate::error::Result;
use crate::simulator::PolicyOutcome;

pub const REGRET_HEADER: [&str; 6] = ["policy", "checkpoint", "mean_regret", "stderr", "n_runs", "baseline_mode"];
pub const PULLS_HEADER: [&str; 4] = ["policy", "arm", "mean_pulls", "stderr"];
pub const BOUNDS_HEADER: [&str; 8] = ["kind", "T", "value", "t0", "tb", "beta", "alpha", "M"];

/// Writes `bytes` to `path` atomically.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn to_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

pub fn regret_csv(outcomes: &[PolicyOutcome]) -> Result<Vec<u8>> {
    let rows = outcomes.iter().flat_map(|o| {
        o.curve.points.iter().map(move |p| {
            vec![
                o.curve.policy.clone(),
                p.checkpoint.to_string(),
                p.mean_regret.to_string(),
                p.stderr.to_string(),
                p.n_runs.to_string(),
                o.curve.baseline_mode.as_str().to_string(),
            ]
        })
    });
    to_csv(&REGRET_HEADER, rows)
}

/// Arms are reported 1-based.
pub fn pulls_csv(outcomes: &[PolicyOutcome]) -> Result<Vec<u8>> {
    let rows = outcomes.iter().flat_map(|o| {
        let label = o.label();
        o.pulls.iter().enumerate().map(move |(k, p)| {
            vec![
                label.clone(),
                (k + 1).to_string(),
                p.mean_pulls.to_string(),
                p.stderr.to_string(),
            ]
        })
    });
    to_csv(&PULLS_HEADER, rows)
}

/// One row per (kind, horizon); `lower` rows only when the report has them.
pub fn bounds_csv<T: Float + std::fmt::Display>(report: &BoundReport<T>) -> Result<Vec<u8>> {
    let common = |kind: &str, horizon: u64, value: T| {
        vec![
            kind.to_string(),
            horizon.to_string(),
            value.to_string(),
            report.t0.to_string(),
            report.tb.to_string(),
            report.beta.to_string(),
            report.alpha.to_string(),
            report.m.to_string(),
        ]
    };
    let mut rows = Vec::new();
    if report.rows.iter().all(|r| r.lower.is_some()) && !report.rows.is_empty() {
        rows.extend(report.rows.iter().map(|r| common("lower", r.horizon, r.lower.unwrap())));
    }
    rows.extend(report.rows.iter().map(|r| common("upper_cucb", r.horizon, r.upper_cucb)));
    rows.extend(report.rows.iter().map(|r| common("upper_cts", r.horizon, r.upper_cts)));
    to_csv(&BOUNDS_HEADER, rows)
}

/// One row of a regret CSV.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct RegretRow {
    pub policy: String,
    pub checkpoint: u64,
    pub mean_regret: f64,
    pub stderr: f64,
    pub n_runs: usize,
    pub baseline_mode: String,
}

pub fn read_regret_csv(path: &Path) -> Result<Vec<RegretRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    let rows = reader.deserialize().collect::<std::result::Result<Vec<RegretRow>, _>>()?;
    Ok(rows)
}
