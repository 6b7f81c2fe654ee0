//! Plain-text vector and matrix files, and atomic file output.
//!
//! * Vector file: one scalar per line.
//! * Matrix file: first line `n`, then `n` rows of `n` whitespace-separated reals.
//!
//! Blank lines and lines starting with `#` are ignored in both.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, Vector};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_scalar(path: &Path, line: usize, token: &str) -> Result<f64> {
    let v: f64 = token
        .parse()
        .map_err(|_| parse_err(path, format!("line {line}: '{token}' is not a number")))?;
    if !v.is_finite() {
        return Err(parse_err(
            path,
            format!("line {line}: value must be finite"),
        ));
    }
    Ok(v)
}

pub fn parse_vector(path: &Path, text: &str) -> Result<Vector> {
    let entries = content_lines(text)
        .map(|(line, l)| parse_scalar(path, line, l))
        .collect::<Result<Vec<_>>>()?;
    if entries.is_empty() {
        return Err(parse_err(path, "vector file has no entries"));
    }
    Vector::new(entries)
}

pub fn read_vector_file(path: &Path) -> Result<Vector> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_vector(path, &text)
}

pub fn parse_matrix(path: &Path, text: &str) -> Result<DenseMatrix> {
    let mut lines = content_lines(text);
    let (line, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, "matrix file is empty"))?;
    let n: usize = header
        .parse()
        .map_err(|_| parse_err(path, format!("line {line}: expected the dimension n")))?;
    if n == 0 {
        return Err(parse_err(path, "matrix dimension must be positive"));
    }
    let mut rows = Vec::with_capacity(n);
    for (line, l) in lines {
        let row = l
            .split_whitespace()
            .map(|t| parse_scalar(path, line, t))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != n {
            return Err(parse_err(
                path,
                format!("line {line}: expected {n} entries, found {}", row.len()),
            ));
        }
        rows.push(row);
    }
    if rows.len() != n {
        return Err(parse_err(
            path,
            format!("expected {n} rows, found {}", rows.len()),
        ));
    }
    DenseMatrix::from_rows(&rows)
}

pub fn read_matrix_file(path: &Path) -> Result<DenseMatrix> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_matrix(path, &text)
}

/// Writes a file through a temporary sibling and renames it into place, so a
/// failed write never leaves a partial file at `path`.
pub fn write_atomic(
    path: &Path,
    write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<()> {
    let dir: PathBuf = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io_err(path))?;
    {
        let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
        write(&mut buf).map_err(io_err(path))?;
        buf.flush().map_err(io_err(path))?;
    }
    tmp.persist(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

/// Formats a float with 17 significant digits (enough to round-trip exactly).
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}
