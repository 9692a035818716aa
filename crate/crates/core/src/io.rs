//! Matrix files.
//!
//! Two encodings are supported:
//!
//! * CSV: one header line, then one line per matrix row. Time-series and
//!   correlation files use the column indices `0,1,...` as header; embedding
//!   files use `x1,...,xd`. Values are written in Rust's shortest round-trip
//!   form, so reading back is bit-exact.
//! * CNM1 binary: the magic bytes `CNM1`, row count and column count as
//!   little-endian `u64`, then the entries as little-endian `f64` in
//!   row-major order.
//!
//! Writers go through a temporary file in the destination directory and a
//! rename, so an interrupted run never leaves a truncated file behind.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const CNM1_MAGIC: &[u8; 4] = b"CNM1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Binary,
}

impl MatrixFormat {
    /// `.cnm` / `.bin` select the binary format, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("cnm") | Some("bin") => MatrixFormat::Binary,
            _ => MatrixFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvHeader {
    /// `0,1,...,cols-1`
    ColumnIndices,
    /// `x1,...,xd`
    Embedding,
}

/// Writes `bytes` to `path` via a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => std::path::PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::domain(format!("{} has no file name", path.display())))?
        .to_string_lossy()
        .into_owned();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

/// Shortest round-trip decimal form, switching to exponent notation for very
/// small or very large magnitudes.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-5..1e16).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

pub fn encode_csv(m: &DMatrix<f64>, header: CsvHeader) -> String {
    let mut out = String::with_capacity(m.len() * 20);
    let cols: Vec<String> = (0..m.ncols())
        .map(|j| match header {
            CsvHeader::ColumnIndices => j.to_string(),
            CsvHeader::Embedding => format!("x{}", j + 1),
        })
        .collect();
    out.push_str(&cols.join(","));
    out.push('\n');
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&fmt_f64(m[(i, j)]));
        }
        out.push('\n');
    }
    out
}

pub fn decode_csv(text: &str) -> Result<DMatrix<f64>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
    let cols = header.split(',').count();
    let mut data = Vec::new();
    let mut rows = 0;
    for (lineno, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols {
            return Err(Error::Parse(format!(
                "line {}: {} fields, header has {cols}",
                lineno + 2,
                fields.len()
            )));
        }
        for f in fields {
            data.push(
                f.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: '{f}': {e}", lineno + 2)))?,
            );
        }
        rows += 1;
    }
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}

pub fn encode_binary(m: &DMatrix<f64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(20 + 8 * m.len());
    out.extend_from_slice(CNM1_MAGIC);
    out.extend_from_slice(&(m.nrows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.ncols() as u64).to_le_bytes());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.extend_from_slice(&m[(i, j)].to_le_bytes());
        }
    }
    out
}

pub fn decode_binary(bytes: &[u8]) -> Result<DMatrix<f64>> {
    if bytes.len() < 20 || &bytes[..4] != CNM1_MAGIC {
        return Err(Error::Parse("missing CNM1 header".into()));
    }
    let rows = u64::from_le_bytes(bytes[4..12].try_into().expect("8 bytes")) as usize;
    let cols = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes")) as usize;
    let expected = rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(8))
        .ok_or_else(|| Error::Parse("CNM1 dimensions overflow".into()))?;
    let payload = &bytes[20..];
    if payload.len() != expected {
        return Err(Error::Parse(format!(
            "CNM1 payload is {} bytes, expected {expected} for {rows}x{cols}",
            payload.len()
        )));
    }
    let data: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}

/// Reads a matrix, detecting the binary format by its magic bytes.
pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(CNM1_MAGIC) {
        decode_binary(&bytes)
    } else {
        let text = String::from_utf8(bytes).map_err(|_| Error::Parse(format!("{}: not UTF-8", path.display())))?;
        decode_csv(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

/// Writes a matrix in the format implied by the file extension.
pub fn write_matrix(path: &Path, m: &DMatrix<f64>, header: CsvHeader) -> Result<()> {
    match MatrixFormat::from_path(path) {
        MatrixFormat::Csv => write_atomic(path, encode_csv(m, header).as_bytes()),
        MatrixFormat::Binary => write_atomic(path, &encode_binary(m)),
    }
}
