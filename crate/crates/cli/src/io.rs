//! Dataset and truth files.
//!
//! Datasets are CSV (header `x_1,...,x_p`, optional when reading) or, for a
//! `.bin` extension, the binary layout `SPCA1`, `u32` rows, `u32` columns
//! and the entries as little-endian `f64` in row-major order. The truth
//! sidecar has one line `q,beta,i:v_i,...` per spike with 1-based `q` and
//! `i`, listing the nonzero entries only.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use covthresh_core::linalg::Matrix;
use covthresh_core::model::ModelParams;

use crate::error::CliError;

pub const MAGIC: &[u8; 5] = b"SPCA1";

fn is_binary(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("bin"))
}

/// `<path>.truth`.
pub fn truth_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".truth");
    PathBuf::from(s)
}

fn format_err(path: &Path, message: impl Into<String>) -> CliError {
    CliError::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

pub fn write_dataset(path: &Path, x: &Matrix) -> Result<(), CliError> {
    if is_binary(path) {
        write_binary(path, x)
    } else {
        write_csv(path, x)
    }
}

pub fn read_dataset(path: &Path) -> Result<Matrix, CliError> {
    if is_binary(path) {
        read_binary(path)
    } else {
        read_csv(path)
    }
}

fn write_csv(path: &Path, x: &Matrix) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::write(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record((1..=x.cols()).map(|j| format!("x_{j}"))).map_err(io)?;
    for i in 0..x.rows() {
        w.write_record(x.row(i).iter().map(|v| v.to_string())).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::write(path, e))
}

fn read_csv(path: &Path) -> Result<Matrix, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Read {
            path: path.to_path_buf(),
            source: e.into(),
        })?;
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| format_err(path, e.to_string()))?;
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if idx == 0 => {
                cols = Some(record.len());
                continue;
            }
            Err(_) => return Err(format_err(path, format!("line {}: non-numeric entry", idx + 1))),
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err(format_err(path, format!("line {}: non-finite entry", idx + 1)));
        }
        match cols {
            Some(c) if c != values.len() => {
                return Err(format_err(
                    path,
                    format!("line {}: expected {c} columns, found {}", idx + 1, values.len()),
                ))
            }
            _ => cols = Some(values.len()),
        }
        data.extend(values);
        rows += 1;
    }
    let cols = cols.unwrap_or(0);
    if rows == 0 || cols == 0 {
        return Err(format_err(path, "no data rows"));
    }
    Matrix::new(rows, cols, data).map_err(|e| format_err(path, e.to_string()))
}

fn write_binary(path: &Path, x: &Matrix) -> Result<(), CliError> {
    let rows = u32::try_from(x.rows()).map_err(|_| format_err(path, "too many rows for the binary format"))?;
    let cols = u32::try_from(x.cols()).map_err(|_| format_err(path, "too many columns for the binary format"))?;
    let file = fs::File::create(path).map_err(|e| CliError::write(path, e))?;
    let mut w = BufWriter::new(file);
    let mut put = |bytes: &[u8]| w.write_all(bytes).map_err(|e| CliError::write(path, e));
    put(MAGIC)?;
    put(&rows.to_le_bytes())?;
    put(&cols.to_le_bytes())?;
    for v in x.data() {
        put(&v.to_le_bytes())?;
    }
    w.flush().map_err(|e| CliError::write(path, e))
}

fn read_binary(path: &Path) -> Result<Matrix, CliError> {
    let bytes = fs::read(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    if bytes.len() < 13 || &bytes[..5] != MAGIC {
        return Err(format_err(path, "missing SPCA1 header"));
    }
    let rows = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[9..13].try_into().unwrap()) as usize;
    let body = &bytes[13..];
    let expected = rows.checked_mul(cols).and_then(|n| n.checked_mul(8));
    if expected != Some(body.len()) || rows == 0 || cols == 0 {
        return Err(format_err(
            path,
            format!("header says {rows}x{cols} but the file holds {} payload bytes", body.len()),
        ));
    }
    let data: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if data.iter().any(|v| !v.is_finite()) {
        return Err(format_err(path, "non-finite entry"));
    }
    Matrix::new(rows, cols, data).map_err(|e| format_err(path, e.to_string()))
}

pub fn write_truth(path: &Path, model: &ModelParams) -> Result<(), CliError> {
    let mut out = String::new();
    for (q, (beta, v)) in model.betas().iter().zip(model.spikes()).enumerate() {
        out.push_str(&format!("{},{beta}", q + 1));
        for (i, x) in v.iter().enumerate().filter(|(_, x)| **x != 0.0) {
            out.push_str(&format!(",{}:{x}", i + 1));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| CliError::write(path, e))
}

/// Reads a sidecar for data of dimension `p`.
pub fn read_truth(path: &Path, p: usize) -> Result<ModelParams, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut betas = Vec::new();
    let mut spikes = Vec::new();
    for (idx, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let bad = |what: &str| format_err(path, format!("line {}: {what}", idx + 1));
        let mut fields = line.split(',').map(str::trim);
        let q: usize = fields.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("bad spike index"))?;
        if q != spikes.len() + 1 {
            return Err(bad("spikes must be numbered 1, 2, ... in order"));
        }
        let beta: f64 = fields.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("bad strength"))?;
        let mut v = vec![0.0; p];
        for field in fields {
            let (i, x) = field.split_once(':').ok_or_else(|| bad("expected `i:v_i`"))?;
            let i: usize = i.trim().parse().map_err(|_| bad("bad coordinate"))?;
            let x: f64 = x.trim().parse().map_err(|_| bad("bad entry"))?;
            if i == 0 || i > p {
                return Err(bad(&format!("coordinate {i} outside 1..={p}")));
            }
            v[i - 1] = x;
        }
        betas.push(beta);
        spikes.push(v);
    }
    ModelParams::new(p, betas, spikes, None).map_err(|e| format_err(path, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use covthresh_core::model::SpikeKind;
    use covthresh_core::rng::Rng;

    fn sample() -> Matrix {
        let mut rng = Rng::new(3);
        Matrix::from_fn(4, 3, |_, _| rng.gaussian() * 1e-3)
    }

    #[test]
    fn csv_and_binary_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let x = sample();
        for name in ["a.csv", "a.bin"] {
            let path = dir.path().join(name);
            write_dataset(&path, &x).unwrap();
            assert_eq!(read_dataset(&path).unwrap(), x, "{name}");
        }
    }

    #[test]
    fn csv_header_is_optional() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("plain.csv");
        fs::write(&path, "1,2\n3,4\n").unwrap();
        assert_eq!(read_dataset(&path).unwrap().data(), &[1.0, 2.0, 3.0, 4.0]);
        fs::write(&path, "x_1,x_2\n1,2\n3\n").unwrap();
        assert!(read_dataset(&path).is_err());
    }

    #[test]
    fn binary_size_is_checked() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("short.bin");
        let mut bytes = MAGIC.to_vec();
        bytes.extend(2u32.to_le_bytes());
        bytes.extend(2u32.to_le_bytes());
        bytes.extend(1f64.to_le_bytes());
        fs::write(&path, bytes).unwrap();
        assert!(read_dataset(&path).is_err());
    }

    #[test]
    fn truth_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = Rng::new(8);
        let model = ModelParams::disjoint(30, &[3.0, 1.5], &[4, 6], SpikeKind::SignedUniform, 0.5, &mut rng).unwrap();
        let path = truth_path(&dir.path().join("d.csv"));
        assert!(path.to_string_lossy().ends_with("d.csv.truth"));
        write_truth(&path, &model).unwrap();
        assert_eq!(read_truth(&path, 30).unwrap(), model);
    }
}
