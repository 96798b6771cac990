//! JSON and CSV writers. Numbers in CSV carry 17 significant digits.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use hermshock_core::models::ProfileTable;
use hermshock_core::residual::DeficitSequence;
use serde::Serialize;

use crate::run::Failure;

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("cannot write {}: {e}", path.display()))
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn emit_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::Io(format!("cannot encode JSON: {e}")))?;
    text.push('\n');
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| io_failure(p, e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io(format!("cannot write to standard output: {e}"))),
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>, Failure> {
    csv::Writer::from_path(path).map_err(|e| io_failure(path, e))
}

pub fn write_profile_csv(path: &Path, table: &ProfileTable) -> Result<(), Failure> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["x".to_string()];
    header.extend(table.fields.iter().cloned());
    w.write_record(&header).map_err(|e| io_failure(path, e))?;
    for (x, row) in table.x.iter().zip(&table.values) {
        let mut rec = vec![num(*x)];
        rec.extend(row.iter().map(|v| num(*v)));
        w.write_record(&rec).map_err(|e| io_failure(path, e))?;
    }
    w.flush().map_err(|e| io_failure(path, e))
}

pub fn write_deficits_csv(path: &Path, seqs: &[DeficitSequence]) -> Result<(), Failure> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "equation",
        "k",
        "eps_power",
        "deficit",
        "threshold",
        "constrained",
    ])
    .map_err(|e| io_failure(path, e))?;
    for s in seqs {
        let name = serde_json::to_value(s.equation)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        for (k, (d, th)) in s.d.iter().zip(&s.thresholds).enumerate() {
            w.write_record([
                name.clone(),
                k.to_string(),
                (k as i64 + s.offset).to_string(),
                num(*d),
                num(*th),
                u8::from(s.constrained.contains(&k)).to_string(),
            ])
            .map_err(|e| io_failure(path, e))?;
        }
    }
    w.flush().map_err(|e| io_failure(path, e))
}
