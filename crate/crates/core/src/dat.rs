//! Plain-text point files: one point per line, coordinates separated by a
//! single space. Reading accepts any whitespace and skips blank lines.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::simplex::{ReferencePoint, ReferenceSet};

/// Formats one coordinate. Shortest round-trip representation, with
/// negative zero folded to zero so output is byte-stable.
pub fn format_coord(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x}")
}

pub fn to_string<P: AsRef<[f64]>>(points: &[P]) -> String {
    let mut out = String::new();
    for p in points {
        let mut first = true;
        for &c in p.as_ref() {
            if !first {
                out.push(' ');
            }
            first = false;
            let _ = write!(out, "{}", format_coord(c));
        }
        out.push('\n');
    }
    out
}

pub fn write_points<P: AsRef<[f64]>, W: Write>(mut w: W, points: &[P]) -> Result<()> {
    w.write_all(to_string(points).as_bytes())?;
    Ok(())
}

pub fn write_file<P: AsRef<[f64]>>(path: impl AsRef<Path>, points: &[P]) -> Result<()> {
    std::fs::write(path, to_string(points))?;
    Ok(())
}

pub fn read_points<R: BufRead>(reader: R) -> Result<Vec<Vec<f64>>> {
    let mut points = Vec::new();
    let mut width = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let row = trimmed
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|e| Error::Parse {
                    line: idx + 1,
                    message: format!("{tok:?}: {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected {w} columns, found {}", row.len()),
                })
            }
            _ => {}
        }
        points.push(row);
    }
    Ok(points)
}

pub fn read_file(path: impl AsRef<Path>) -> Result<Vec<Vec<f64>>> {
    let file = std::fs::File::open(path)?;
    read_points(std::io::BufReader::new(file))
}

/// Reads a reference set; every row must be a simplex point.
pub fn read_reference_set(path: impl AsRef<Path>) -> Result<ReferenceSet> {
    let rows = read_file(path)?;
    let m = rows.first().map(Vec::len).ok_or_else(|| {
        Error::Validation("reference point file is empty".into())
    })?;
    let points = rows
        .into_iter()
        .map(|r| ReferencePoint::with_tolerance(r, 1e-9))
        .collect::<Result<Vec<_>>>()?;
    let mut set = ReferenceSet::new(points, m, None)?;
    set.h = set.infer_divisions();
    Ok(set)
}
