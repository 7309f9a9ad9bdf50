// Copyright 2026 The homjump Authors
// SPDX-License-Identifier: Apache-2.0

//! Bit-stable CSV and JSON output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use homjump_core::statistics::{CoincidenceResult, DelayHistogram, ExpectationSeries, Observable};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const EXPECTATIONS_HEADER: [&str; 11] = [
    "t",
    "n1_mean",
    "n1_se",
    "n2_mean",
    "n2_se",
    "e1_mean",
    "e1_se",
    "e2_mean",
    "e2_se",
    "total_mean",
    "total_se",
];
pub const COINCIDENCE_HEADER: [&str; 8] = [
    "ratio",
    "n_traj",
    "n_two_click",
    "n_same",
    "n_diff",
    "n_discarded",
    "fraction",
    "se",
];
pub const DELAYS_HEADER: [&str; 4] = [
    "bin_left",
    "bin_right",
    "coincidence_count",
    "anticoincidence_count",
];
pub const SCALING_HEADER: [&str; 2] = ["n_traj", "wall_seconds"];

/// Shortest decimal string that parses back to the same `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:?}")
}

/// A file written by a command, with its SHA-256.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WrittenFile {
    pub name: String,
    pub path: PathBuf,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes via a temporary sibling and a rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Config(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(CliError::io(path, e));
    }
    Ok(())
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let to_err = |e: csv::Error| CliError::Config(format!("csv encoding: {e}"));
    w.write_record(header).map_err(to_err)?;
    for row in rows {
        w.write_record(row).map_err(to_err)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Config(format!("csv encoding: {e}")))
}

/// Writes a CSV table into `dir`, then reads it back and checks header, row
/// count and checksum.
pub fn write_csv(
    dir: &Path,
    name: &str,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<WrittenFile> {
    let path = dir.join(name);
    let bytes = csv_bytes(header, rows)?;
    write_atomic(&path, &bytes)?;
    let back = fs::read(&path).map_err(|e| CliError::io(&path, e))?;
    let sha256 = sha256_hex(&bytes);
    let invalid = |reason: String| CliError::Validation {
        path: path.clone(),
        reason,
    };
    if sha256_hex(&back) != sha256 {
        return Err(invalid("file contents differ from what was written".into()));
    }
    let mut reader = csv::Reader::from_reader(back.as_slice());
    let got_header = reader.headers().map_err(|e| invalid(e.to_string()))?;
    if got_header.iter().ne(header.iter().copied()) {
        return Err(invalid("header mismatch".into()));
    }
    let n_rows = reader.records().try_fold(0usize, |n, r| {
        r.map(|rec| (n + 1, rec.len()))
            .map_err(|e| invalid(e.to_string()))
            .and_then(|(n, len)| {
                if len == header.len() {
                    Ok(n)
                } else {
                    Err(invalid(format!("row {n} has {len} fields")))
                }
            })
    })?;
    if n_rows != rows.len() {
        return Err(invalid(format!(
            "expected {} rows, found {n_rows}",
            rows.len()
        )));
    }
    Ok(WrittenFile {
        name: name.to_string(),
        path,
        sha256,
    })
}

pub fn expectation_rows(series: &ExpectationSeries) -> Vec<Vec<String>> {
    series
        .t_grid
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let mut row = vec![format_float(t)];
            for obs in Observable::ALL {
                let s = series.get(obs);
                row.push(format_float(s.mean[k]));
                row.push(format_float(s.se[k]));
            }
            row
        })
        .collect()
}

pub fn coincidence_rows(points: &[(f64, CoincidenceResult)]) -> Vec<Vec<String>> {
    points
        .iter()
        .map(|(ratio, r)| {
            vec![
                format_float(*ratio),
                r.n_trajectories.to_string(),
                r.n_two_click.to_string(),
                r.n_same_detector.to_string(),
                r.n_diff_detector.to_string(),
                r.n_discarded.to_string(),
                format_float(r.coincidence_fraction),
                format_float(r.standard_error),
            ]
        })
        .collect()
}

pub fn delay_rows(h: &DelayHistogram) -> Vec<Vec<String>> {
    (0..h.n_bins())
        .map(|k| {
            vec![
                format_float(h.edges[k]),
                format_float(h.edges[k + 1]),
                h.coincidence[k].to_string(),
                h.anticoincidence[k].to_string(),
            ]
        })
        .collect()
}

pub fn scaling_rows(points: &[(u64, f64)]) -> Vec<Vec<String>> {
    points
        .iter()
        .map(|(n, secs)| vec![n.to_string(), format_float(*secs)])
        .collect()
}
