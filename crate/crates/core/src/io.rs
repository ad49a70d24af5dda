//! Reading counts, probabilities and sequences from text files.
//!
//! All readers accept an optional header line (any first line whose first
//! field is not a number) and skip blank lines.

use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use csv::{ReaderBuilder, StringRecord, Trim};

use crate::error::{Error, Result};

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_err(path: &Path, line: u64, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Records with their 1-based line numbers, header dropped.
fn records<R: Read>(rdr: R, path: &Path) -> Result<Vec<(u64, StringRecord)>> {
    let mut csv = ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(Trim::All)
        .comment(Some(b'#'))
        .from_reader(rdr);
    let mut out = Vec::new();
    for (idx, rec) in csv.records().enumerate() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(idx as u64 + 1, |p| p.line());
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let first_is_number = rec.get(0).is_some_and(|f| f.parse::<f64>().is_ok());
        if out.is_empty() && !first_is_number && idx == 0 {
            continue;
        }
        out.push((line, rec));
    }
    Ok(out)
}

fn field<T: std::str::FromStr>(
    rec: &StringRecord,
    i: usize,
    what: &str,
    path: &Path,
    line: u64,
) -> Result<T> {
    let raw = rec
        .get(i)
        .ok_or_else(|| parse_err(path, line, format!("missing {what}")))?;
    raw.parse()
        .map_err(|_| parse_err(path, line, format!("invalid {what} '{raw}'")))
}

/// `cell_index,count` pairs; duplicate indices are rejected.
pub fn parse_counts<R: Read>(rdr: R, path: &Path) -> Result<Vec<(u64, u64)>> {
    let mut seen = std::collections::HashSet::new();
    let mut pairs = Vec::new();
    for (line, rec) in records(rdr, path)? {
        if rec.len() != 2 {
            return Err(parse_err(
                path,
                line,
                format!("expected 2 fields, found {}", rec.len()),
            ));
        }
        let cell: u64 = field(&rec, 0, "cell index", path, line)?;
        let count: u64 = field(&rec, 1, "count", path, line)?;
        if !seen.insert(cell) {
            return Err(parse_err(
                path,
                line,
                format!("duplicate cell index {cell}"),
            ));
        }
        pairs.push((cell, count));
    }
    if pairs.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{}: no counts found",
            path.display()
        )));
    }
    Ok(pairs)
}

/// One probability per line.
pub fn parse_probs<R: Read>(rdr: R, path: &Path) -> Result<Vec<f64>> {
    let mut probs = Vec::new();
    for (line, rec) in records(rdr, path)? {
        if rec.len() != 1 {
            return Err(parse_err(
                path,
                line,
                format!("expected 1 field, found {}", rec.len()),
            ));
        }
        let p: f64 = field(&rec, 0, "probability", path, line)?;
        if !p.is_finite() {
            return Err(parse_err(path, line, "probability must be finite"));
        }
        probs.push(p);
    }
    if probs.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{}: no probabilities found",
            path.display()
        )));
    }
    Ok(probs)
}

/// One cell index per line, in draw order.
pub fn parse_sequence<R: Read>(rdr: R, path: &Path) -> Result<Vec<u64>> {
    let mut values = Vec::new();
    for (line, rec) in records(rdr, path)? {
        if rec.len() != 1 {
            return Err(parse_err(
                path,
                line,
                format!("expected 1 field, found {}", rec.len()),
            ));
        }
        values.push(field(&rec, 0, "cell index", path, line)?);
    }
    if values.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{}: empty sequence",
            path.display()
        )));
    }
    Ok(values)
}

pub fn read_counts(path: impl AsRef<Path>) -> Result<Vec<(u64, u64)>> {
    let path = path.as_ref();
    parse_counts(open(path)?, path)
}

pub fn read_probs(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    parse_probs(open(path)?, path)
}

pub fn read_sequence(path: impl AsRef<Path>) -> Result<Vec<u64>> {
    let path = path.as_ref();
    parse_sequence(open(path)?, path)
}

/// `path` taken relative to the directory of `base` unless absolute.
pub fn resolve_relative(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.parent().unwrap_or(Path::new("")).join(path)
    }
}
