//! Atomic file output and the tabular formats.

use std::io::Write;
use std::path::{Path, PathBuf};

use pseudomode::Trajectory;
use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::CliError;

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place, so a failed run never leaves a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = NamedTempFile::new_in(&dir)
        .map_err(|e| CliError::Validation(format!("cannot write to {}: {e}", dir.display())))?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path)
        .map_err(|e| CliError::Validation(format!("cannot write {}: {}", path.display(), e.error)))?;
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// `path` with its extension replaced, or `stem-suffix.ext` when `suffix`
/// is non-empty.
pub fn sibling(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    let name = if suffix.is_empty() { format!("{stem}.{ext}") } else { format!("{stem}-{suffix}.{ext}") };
    path.with_file_name(name)
}

pub fn trajectory_header(n: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    for a in 0..n {
        cols.push(format!("psi_{a}_re"));
        cols.push(format!("psi_{a}_im"));
    }
    for a in 0..n {
        for b in a..n {
            cols.push(format!("sigma_{a}_{b}_re"));
            cols.push(format!("sigma_{a}_{b}_im"));
        }
    }
    cols.push("rho00".into());
    cols.push("method".into());
    cols
}

pub fn trajectory_rows(tr: &Trajectory) -> Vec<Vec<f64>> {
    tr.times
        .iter()
        .zip(&tr.psi)
        .zip(&tr.states)
        .map(|((&t, psi), st)| {
            let n = psi.len();
            let sigma = st.sigma();
            let mut row = vec![t];
            for p in psi.iter() {
                row.extend([p.re, p.im]);
            }
            for a in 0..n {
                for b in a..n {
                    row.extend([sigma[(a, b)].re, sigma[(a, b)].im]);
                }
            }
            row.push(st.rho00());
            row
        })
        .collect()
}

/// Time-series CSV with trailing `# key=value` metadata lines.
pub fn trajectory_csv(tr: &Trajectory, metadata: &[(String, String)]) -> Result<Vec<u8>, CliError> {
    let n = tr.psi.first().map_or(0, |p| p.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(trajectory_header(n))?;
    for row in trajectory_rows(tr) {
        let mut rec: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        rec.push(tr.method.name().to_string());
        w.write_record(rec)?;
    }
    let mut bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    for (k, v) in metadata {
        writeln!(bytes, "# {k}={v}")?;
    }
    Ok(bytes)
}

#[derive(Serialize)]
struct TrajectoryJson<'a> {
    method: &'a str,
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
    metadata: std::collections::BTreeMap<&'a str, &'a str>,
}

pub fn trajectory_json(tr: &Trajectory, metadata: &[(String, String)]) -> Result<Vec<u8>, CliError> {
    let n = tr.psi.first().map_or(0, |p| p.len());
    let mut columns = trajectory_header(n);
    columns.pop();
    to_json(&TrajectoryJson {
        method: tr.method.name(),
        columns,
        rows: trajectory_rows(tr),
        metadata: metadata.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect(),
    })
}

/// Rows of `f64` plus trailing string columns.
pub fn table_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}
