//! Point clouds from delimited numeric text.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use predfl::Location;

use crate::error::{BenchError, Result};

/// Which columns of each row become coordinates.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum ColumnMask {
    #[default]
    All,
    /// Drop the last `k` columns, e.g. a class label.
    DropLast(usize),
    /// Keep only these zero-based columns, in the given order.
    Keep(Vec<usize>),
}

impl ColumnMask {
    fn select(&self, width: usize) -> Result<Vec<usize>> {
        match self {
            ColumnMask::All => Ok((0..width).collect()),
            ColumnMask::DropLast(k) if *k < width => Ok((0..width - k).collect()),
            ColumnMask::DropLast(k) => Err(BenchError::Ingest(format!("cannot drop {k} of {width} columns"))),
            ColumnMask::Keep(cols) => {
                if cols.is_empty() {
                    return Err(BenchError::Ingest("column mask keeps nothing".into()));
                }
                if let Some(&c) = cols.iter().find(|&&c| c >= width) {
                    return Err(BenchError::Ingest(format!("column {c} out of range for width {width}")));
                }
                Ok(cols.clone())
            }
        }
    }
}

impl FromStr for ColumnMask {
    type Err = BenchError;

    /// `all`, `drop-last:K` or a comma list of column indices.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "all" {
            return Ok(ColumnMask::All);
        }
        if let Some(k) = s.strip_prefix("drop-last:") {
            return k
                .trim()
                .parse()
                .map(ColumnMask::DropLast)
                .map_err(|_| BenchError::Config(format!("bad column mask {s:?}")));
        }
        s.split(',')
            .map(|c| c.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(ColumnMask::Keep)
            .map_err(|_| BenchError::Config(format!("bad column mask {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Delimiter {
    Byte(u8),
    Whitespace,
}

fn detect(line: &str) -> Delimiter {
    for &b in b",\t;" {
        if line.as_bytes().contains(&b) {
            return Delimiter::Byte(b);
        }
    }
    Delimiter::Whitespace
}

fn split_rows(text: &str, delim: Delimiter) -> Result<Vec<Vec<String>>> {
    match delim {
        Delimiter::Whitespace => Ok(text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.split_whitespace().map(str::to_owned).collect())
            .collect()),
        Delimiter::Byte(b) => {
            let mut reader = csv::ReaderBuilder::new()
                .delimiter(b)
                .has_headers(false)
                .flexible(true)
                .trim(csv::Trim::All)
                .from_reader(text.as_bytes());
            let mut rows = Vec::new();
            for rec in reader.records() {
                let rec = rec?;
                if rec.iter().all(str::is_empty) {
                    continue;
                }
                rows.push(rec.iter().map(str::to_owned).collect());
            }
            Ok(rows)
        }
    }
}

/// Reads at most `limit` rows of coordinates. The delimiter (comma, tab,
/// semicolon or whitespace) is detected from the first non-empty line. A
/// first row with no numeric cell is treated as a header.
pub fn ingest_points(path: impl AsRef<Path>, limit: Option<usize>, mask: &ColumnMask) -> Result<Vec<Location>> {
    let text = fs::read_to_string(path.as_ref())?;
    parse_points(&text, limit, mask)
}

pub fn parse_points(text: &str, limit: Option<usize>, mask: &ColumnMask) -> Result<Vec<Location>> {
    let first = text.lines().find(|l| !l.trim().is_empty()).ok_or_else(|| BenchError::Ingest("empty file".into()))?;
    let mut rows = split_rows(text, detect(first))?;
    if rows.first().is_some_and(|r| r.iter().all(|c| c.parse::<f64>().is_err())) {
        rows.remove(0);
    }
    if rows.is_empty() {
        return Err(BenchError::Ingest("no data rows".into()));
    }
    let width = rows[0].len();
    let keep = mask.select(width)?;
    let take = limit.unwrap_or(usize::MAX).min(rows.len());
    let mut points = Vec::with_capacity(take);
    for (i, row) in rows.iter().take(take).enumerate() {
        if row.len() != width {
            return Err(BenchError::Ingest(format!("row {} has {} columns, expected {width}", i + 1, row.len())));
        }
        let coords = keep
            .iter()
            .map(|&c| {
                row[c].parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                    BenchError::Ingest(format!("row {} column {c}: non-numeric cell {:?}", i + 1, row[c]))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        points.push(Location::Point(coords));
    }
    Ok(points)
}
