use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::{Metrics, StepRecord};
use crate::error::{input_err, Result};
use crate::forecast::Method;

pub const RUN_CSV_HEADER: [&str; 10] = [
    "t", "T", "u", "mdot_true", "mdot_meas", "env_lo", "env_hi", "switch", "J_step", "solve_ms",
];

#[derive(Serialize, Deserialize)]
struct RunRow {
    t: f64,
    #[serde(rename = "T")]
    temperature: f64,
    u: f64,
    mdot_true: f64,
    mdot_meas: f64,
    env_lo: f64,
    env_hi: f64,
    switch: String,
    #[serde(rename = "J_step")]
    j_step: f64,
    solve_ms: f64,
}

/// Writes `bytes` to a sibling temporary file and renames it into place, so
/// readers never observe a partially written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn run_csv_bytes(rows: &[StepRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(RunRow {
            t: r.t,
            temperature: r.temperature,
            u: r.u,
            mdot_true: r.mdot_true,
            mdot_meas: r.mdot_meas,
            env_lo: r.env_lo,
            env_hi: r.env_hi,
            switch: r.switch.map(|m| m.as_str().to_string()).unwrap_or_default(),
            j_step: r.j_step,
            solve_ms: r.solve_ms,
        })?;
    }
    if rows.is_empty() {
        w.write_record(RUN_CSV_HEADER)?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

pub fn write_run_csv(path: &Path, rows: &[StepRecord]) -> Result<()> {
    write_atomic(path, &run_csv_bytes(rows)?)
}

pub fn read_run_csv(path: &Path) -> Result<Vec<StepRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != RUN_CSV_HEADER {
        return input_err(format!("unexpected run log header {header:?}"));
    }
    let mut rows = Vec::new();
    for row in r.deserialize() {
        let row: RunRow = row?;
        let switch = match row.switch.as_str() {
            "" => None,
            "KC" => Some(Method::Kc),
            "NAR" => Some(Method::Nar),
            other => return input_err(format!("unknown switch value '{other}'")),
        };
        rows.push(StepRecord {
            t: row.t,
            temperature: row.temperature,
            u: row.u,
            mdot_true: row.mdot_true,
            mdot_meas: row.mdot_meas,
            env_lo: row.env_lo,
            env_hi: row.env_hi,
            switch,
            j_step: row.j_step,
            solve_ms: row.solve_ms,
        });
    }
    Ok(rows)
}

pub fn write_metrics_json(path: &Path, metrics: &Metrics) -> Result<()> {
    let mut text = serde_json::to_string_pretty(metrics)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}
