//! Point ingestion and emission.
//!
//! CSV: one point per row, `dim` numeric columns, an optional trailing
//! `weight` column, an optional header row, and `#` comment lines. JSON: an
//! array of coordinate arrays. Floats are written with 17 significant digits
//! so that every finite f64 survives a round trip unchanged.

use std::fmt::Write as _;

use super::points::PointSet;
use crate::error::{Error, Result};

/// Formats a float with 17 significant digits, '.' decimal separator.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // keep the sign of negative zero
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    format!("{x:.16e}")
}

/// Parses point CSV. With `dim = None` the dimension is inferred: a header
/// whose last column is `weight` marks a weight column, otherwise every
/// column is a coordinate.
pub fn parse_csv(text: &str, dim: Option<usize>) -> Result<PointSet> {
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut header_weight = false;
    let mut seen_data = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(values) => {
                seen_data = true;
                rows.push((lineno + 1, values));
            }
            Err(_) if !seen_data && rows.is_empty() => {
                header_weight = fields.last().is_some_and(|f| f.eq_ignore_ascii_case("weight"));
            }
            Err(e) => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: e.to_string(),
                })
            }
        }
    }
    let Some((_, first)) = rows.first() else {
        return Err(Error::EmptyPointSet);
    };
    let width = first.len();
    let dim = match dim {
        Some(d) => d,
        None if header_weight => width.saturating_sub(1),
        None => width,
    };
    if dim == 0 {
        return Err(Error::param("dim", "no coordinate columns"));
    }
    let has_weight = match width {
        w if w == dim => false,
        w if w == dim + 1 => true,
        w => {
            return Err(Error::Parse {
                line: rows[0].0,
                message: format!("expected {dim} or {} columns, found {w}", dim + 1),
            })
        }
    };
    let mut coords = Vec::with_capacity(rows.len() * dim);
    let mut weights = Vec::new();
    for (line, values) in &rows {
        if values.len() != width {
            return Err(Error::Parse {
                line: *line,
                message: format!("expected {width} columns, found {}", values.len()),
            });
        }
        coords.extend_from_slice(&values[..dim]);
        if has_weight {
            weights.push(values[dim]);
        }
    }
    let points = PointSet::from_flat(dim, coords)?;
    if has_weight {
        if weights.iter().any(|w| *w < 0.0) {
            return signed_from_weights(points, weights);
        }
        points.with_weights(weights)
    } else {
        Ok(points)
    }
}

/// Files may carry a two-class labelling as signed weights; route it
/// through the two-class constructor, which requires unit magnitudes.
fn signed_from_weights(points: PointSet, weights: Vec<f64>) -> Result<PointSet> {
    if let Some((index, &weight)) = weights.iter().enumerate().find(|(_, w)| w.abs() != 1.0) {
        return Err(Error::NegativeWeight { index, weight });
    }
    let pos: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
    let neg: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] < 0.0).collect();
    if pos.iter().chain(&neg).copied().eq(0..weights.len()) {
        PointSet::two_class(&points.subset(&pos), &points.subset(&neg))
    } else {
        Err(Error::param(
            "weight",
            "signed weights must list all positive points before negative ones",
        ))
    }
}

/// Writes point CSV with a header row; `comments` become leading `#` lines.
pub fn to_csv(points: &PointSet, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    let header: Vec<String> = (0..points.dim()).map(|k| format!("x{k}")).collect();
    out.push_str(&header.join(","));
    if points.weights().is_some() {
        out.push_str(",weight");
    }
    out.push('\n');
    for (i, p) in points.iter().enumerate() {
        let mut fields: Vec<String> = p.iter().map(|&x| fmt_f64(x)).collect();
        if points.weights().is_some() {
            fields.push(fmt_f64(points.weight(i)));
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_json(text: &str) -> Result<PointSet> {
    let rows: Vec<Vec<f64>> = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let dim = rows.first().map(Vec::len).ok_or(Error::EmptyPointSet)?;
    PointSet::new(dim, &rows)
}

pub fn to_json(points: &PointSet) -> String {
    let rows: Vec<&[f64]> = points.iter().collect();
    serde_json::to_string(&rows).expect("finite coordinates serialize")
}

/// Reads a point file, choosing the format from the extension.
pub fn read_points(path: &std::path::Path, dim: Option<usize>) -> Result<PointSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => parse_json(&text),
        _ => parse_csv(&text, dim),
    }
}
