//! File formats: trajectories (CSV and binary), spectral tables, square
//! matrices, heatmaps and JSON documents.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ctc_core::liouvillian::SpaceSpectrum;
use ctc_core::meanfield::TrajectoryRecord;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{LabError, Result};

const MAGIC: &[u8; 8] = b"CTCTRAJ1";

pub fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| LabError::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| LabError::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(create(path)?))
}

fn csv_err(path: &Path, e: csv::Error) -> LabError {
    LabError::format(path, e)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| LabError::format(path, e))?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(|e| LabError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let f = File::open(path).map_err(|e| LabError::io(path, e))?;
    serde_json::from_reader(BufReader::new(f)).map_err(|e| LabError::format(path, e))
}

pub fn read_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    toml::from_str(&text).map_err(|e| LabError::format(path, e.message()))
}

/// Columns `t, mx_0, my_0, mz_0, mx_1, ...`.
pub fn write_trajectory_csv(path: &Path, rec: &TrajectoryRecord) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["t".to_string()];
    for a in 0..rec.n {
        header.extend(["mx", "my", "mz"].iter().map(|c| format!("{c}_{a}")));
    }
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for k in 0..rec.len() {
        let mut row = Vec::with_capacity(1 + 3 * rec.n);
        row.push(fmt(rec.times[k]));
        row.extend(rec.state(k).iter().map(|&v| fmt(v)));
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

pub fn read_trajectory_csv(path: &Path) -> Result<TrajectoryRecord> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if headers.is_empty() || &headers[0] != "t" || (headers.len() - 1) % 3 != 0 {
        return Err(LabError::format(
            path,
            "expected columns t, mx_0, my_0, mz_0, ...",
        ));
    }
    let n = (headers.len() - 1) / 3;
    let mut times = Vec::new();
    let mut states = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        if rec.len() != headers.len() {
            return Err(LabError::format(
                path,
                format!("row {} has {} fields", line + 2, rec.len()),
            ));
        }
        let mut vals = rec.iter().map(|s| {
            s.trim().parse::<f64>().map_err(|_| {
                LabError::format(path, format!("row {}: '{s}' is not a number", line + 2))
            })
        });
        times.push(vals.next().unwrap()?);
        for v in vals {
            states.push(v?);
        }
    }
    if times.is_empty() {
        return Err(LabError::format(path, "no samples"));
    }
    Ok(TrajectoryRecord::from_samples(n, times, states))
}

/// Binary layout, all little-endian: 8-byte magic `CTCTRAJ1`, `u64` spin
/// count `n`, `u64` sample count `len`, `len` times as `f64`, then
/// `len * 3n` state values as `f64`, row-major.
pub fn write_trajectory_bin(path: &Path, rec: &TrajectoryRecord) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| LabError::io(path, e);
    w.write_all(MAGIC).map_err(io)?;
    w.write_all(&(rec.n as u64).to_le_bytes()).map_err(io)?;
    w.write_all(&(rec.len() as u64).to_le_bytes()).map_err(io)?;
    for v in rec.times.iter().chain(&rec.states) {
        w.write_all(&v.to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_trajectory_bin(path: &Path) -> Result<TrajectoryRecord> {
    let mut f = BufReader::new(File::open(path).map_err(|e| LabError::io(path, e))?);
    let mut buf = Vec::new();
    f.read_to_end(&mut buf).map_err(|e| LabError::io(path, e))?;
    if buf.len() < 24 || &buf[..8] != MAGIC {
        return Err(LabError::format(path, "missing trajectory header"));
    }
    let word = |k: usize| u64::from_le_bytes(buf[k..k + 8].try_into().unwrap());
    let n = word(8) as usize;
    let len = word(16) as usize;
    let count = len
        .checked_mul(1 + 3 * n)
        .ok_or_else(|| LabError::format(path, "header overflow"))?;
    if buf.len() != 24 + 8 * count {
        return Err(LabError::format(path, "payload size disagrees with header"));
    }
    let vals: Vec<f64> = buf[24..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let (times, states) = vals.split_at(len);
    Ok(TrajectoryRecord::from_samples(
        n,
        times.to_vec(),
        states.to_vec(),
    ))
}

/// Reads either trajectory format, chosen by extension (`.csv` or `.bin`).
pub fn read_trajectory(path: &Path) -> Result<TrajectoryRecord> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => read_trajectory_csv(path),
        Some("bin") => read_trajectory_bin(path),
        _ => Err(LabError::format(
            path,
            "trajectory files must end in .csv or .bin",
        )),
    }
}

pub fn write_trajectory(path: &Path, rec: &TrajectoryRecord) -> Result<()> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("bin") => write_trajectory_bin(path, rec),
        _ => write_trajectory_csv(path, rec),
    }
}

/// One row per eigenvalue: `N, twice_J, J, m, re, im, is_dominant`.
pub fn write_spectrum_csv(path: &Path, spec: &SpaceSpectrum) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["N", "twice_J", "J", "m", "re", "im", "is_dominant"])
        .map_err(|e| csv_err(path, e))?;
    let n = spec.particles;
    for s in &spec.sectors {
        let tj = s.twice_j.map(|t| t.get()).unwrap_or(0);
        let owner = spec.dominant_sector.map(|t| t.get()) == Some(tj);
        let mut marked = false;
        for z in &s.eigenvalues {
            let dom = owner && !marked && Some(*z) == spec.lambda1;
            marked |= dom;
            w.write_record([
                n.to_string(),
                tj.to_string(),
                fmt(tj as f64 / 2.0),
                fmt(tj as f64 / n as f64),
                fmt(z.re),
                fmt(z.im),
                (dom as u8).to_string(),
            ])
            .map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

/// Row-major `n x n` matrix with a header row of column indices.
pub fn write_matrix_csv(path: &Path, matrix: &[f64], n: usize) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec![String::new()];
    header.extend((0..n).map(|b| b.to_string()));
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for a in 0..n {
        let mut row = vec![a.to_string()];
        row.extend(matrix[a * n..(a + 1) * n].iter().map(|&v| fmt(v)));
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

/// Heatmap with the column axis in the header row and the row axis in the
/// first column; missing cells are written as `NaN`.
pub fn write_heatmap_csv(
    path: &Path,
    corner: &str,
    rows: &[f64],
    cols: &[f64],
    values: &[Option<f64>],
) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec![corner.to_string()];
    header.extend(cols.iter().map(|&c| fmt(c)));
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for (i, &r) in rows.iter().enumerate() {
        let mut row = vec![fmt(r)];
        row.extend(
            values[i * cols.len()..(i + 1) * cols.len()]
                .iter()
                .map(|v| v.map_or_else(|| "NaN".to_string(), fmt)),
        );
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

/// Generic table writer.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

/// Shortest representation that round-trips.
pub fn fmt(v: f64) -> String {
    format!("{v:?}")
}
