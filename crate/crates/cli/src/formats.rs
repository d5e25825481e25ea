//! File formats: Matrix Market, dense CSV matrices, data and records CSV,
//! accuracy curves and certificate JSON.
//!
//! Matrices are written with the shortest decimal that round-trips, so a
//! written file reads back bit-for-bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use opnorm_core::{DenseMatrix, RobustnessRecord, SymmetricMatrix};
use serde::{Deserialize, Serialize};

/// Symmetry tolerance when a general file is read as a symmetric matrix.
pub const READ_SYMMETRY_TOL: f64 = 1e-12;

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn write_string(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn parse_f64(token: &str, what: &str, line: usize) -> Result<f64> {
    let v: f64 = token
        .trim()
        .parse()
        .map_err(|_| anyhow!("line {line}: cannot parse {what} {token:?}"))?;
    if !v.is_finite() {
        bail!("line {line}: {what} is not finite");
    }
    Ok(v)
}

fn parse_index(token: &str, bound: usize, line: usize) -> Result<usize> {
    let i: usize = token
        .parse()
        .map_err(|_| anyhow!("line {line}: cannot parse index {token:?}"))?;
    if i == 0 || i > bound {
        bail!("line {line}: index {i} outside 1..={bound}");
    }
    Ok(i - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MmLayout {
    Coordinate,
    Array,
}

/// Parses a real or integer Matrix Market file (coordinate or array layout,
/// general or symmetric).
pub fn parse_matrix_market(text: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| anyhow!("empty Matrix Market file"))?;
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        bail!("line 1: expected `%%MatrixMarket matrix <layout> <field> <symmetry>`");
    }
    let layout = match fields[2].as_str() {
        "coordinate" => MmLayout::Coordinate,
        "array" => MmLayout::Array,
        other => bail!("line 1: unsupported layout {other:?}"),
    };
    if !matches!(fields[3].as_str(), "real" | "integer" | "double") {
        bail!("line 1: unsupported field {:?} (need real or integer)", fields[3]);
    }
    let symmetric = match fields[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => bail!("line 1: unsupported symmetry {other:?}"),
    };

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = body.next().ok_or_else(|| anyhow!("missing size line"))?;
    let dims: Vec<&str> = size.split_whitespace().collect();
    let parse_dim = |s: &str| -> Result<usize> {
        s.parse().map_err(|_| anyhow!("line {size_line}: cannot parse dimension {s:?}"))
    };
    let (rows, cols) = match (layout, dims.len()) {
        (MmLayout::Coordinate, 3) | (MmLayout::Array, 2) => (parse_dim(dims[0])?, parse_dim(dims[1])?),
        _ => bail!("line {size_line}: malformed size line"),
    };
    if rows == 0 || cols == 0 {
        bail!("line {size_line}: empty matrix");
    }
    if symmetric && rows != cols {
        bail!("line {size_line}: symmetric matrix must be square");
    }

    let mut m = DenseMatrix::zeros(rows, cols);
    match layout {
        MmLayout::Coordinate => {
            let nnz = parse_dim(dims[2])?;
            let mut seen = 0usize;
            for (ln, l) in body {
                let t: Vec<&str> = l.split_whitespace().collect();
                if t.len() != 3 {
                    bail!("line {ln}: expected `row col value`");
                }
                let i = parse_index(t[0], rows, ln)?;
                let j = parse_index(t[1], cols, ln)?;
                let v = parse_f64(t[2], "value", ln)?;
                if symmetric && j > i {
                    bail!("line {ln}: symmetric files store the lower triangle only");
                }
                m.set(i, j, v);
                if symmetric {
                    m.set(j, i, v);
                }
                seen += 1;
            }
            if seen != nnz {
                bail!("expected {nnz} entries, found {seen}");
            }
        }
        MmLayout::Array => {
            // Column-major; symmetric arrays list the lower triangle only.
            let mut slots = Vec::new();
            for j in 0..cols {
                let start = if symmetric { j } else { 0 };
                for i in start..rows {
                    slots.push((i, j));
                }
            }
            let mut count = 0usize;
            for (ln, l) in body {
                let t: Vec<&str> = l.split_whitespace().collect();
                if t.len() != 1 {
                    bail!("line {ln}: expected one value per line");
                }
                let &(i, j) = slots.get(count).ok_or_else(|| anyhow!("line {ln}: too many values"))?;
                let v = parse_f64(t[0], "value", ln)?;
                m.set(i, j, v);
                if symmetric {
                    m.set(j, i, v);
                }
                count += 1;
            }
            if count != slots.len() {
                bail!("expected {} values, found {count}", slots.len());
            }
        }
    }
    Ok(m)
}

/// Symmetric coordinate Matrix Market text (lower triangle, exact zeros skipped).
pub fn format_matrix_market(m: &SymmetricMatrix) -> String {
    let n = m.n();
    let mut entries = Vec::new();
    for j in 0..n {
        for i in j..n {
            let v = m.get(i, j);
            if v.to_bits() != 0 {
                entries.push((i, j, v));
            }
        }
    }
    let mut out = String::with_capacity(32 * entries.len() + 64);
    out.push_str("%%MatrixMarket matrix coordinate real symmetric\n");
    let _ = writeln!(out, "{n} {n} {}", entries.len());
    for (i, j, v) in entries {
        let _ = writeln!(out, "{} {} {v:e}", i + 1, j + 1);
    }
    out
}

fn csv_fields(line: &str) -> impl Iterator<Item = &str> {
    line.split(',').map(str::trim)
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Dense CSV matrix: a header line `n` (square) or `rows,cols`, then one row
/// per line.
pub fn parse_dense_csv(text: &str) -> Result<DenseMatrix> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| anyhow!("empty matrix file"))?;
    let dims: Vec<usize> = csv_fields(header)
        .map(|t| t.parse().map_err(|_| anyhow!("line {hl}: header must be `n` or `rows,cols`")))
        .collect::<Result<_>>()?;
    let (rows, cols) = match dims.as_slice() {
        [n] => (*n, *n),
        [r, c] => (*r, *c),
        _ => bail!("line {hl}: header must be `n` or `rows,cols`"),
    };
    if rows == 0 || cols == 0 {
        bail!("line {hl}: empty matrix");
    }
    let mut data = Vec::with_capacity(rows * cols);
    let mut count = 0usize;
    for (ln, l) in lines {
        let row: Vec<f64> = csv_fields(l).map(|t| parse_f64(t, "entry", ln)).collect::<Result<_>>()?;
        if row.len() != cols {
            bail!("line {ln}: expected {cols} entries, found {}", row.len());
        }
        data.extend(row);
        count += 1;
    }
    if count != rows {
        bail!("expected {rows} rows, found {count}");
    }
    Ok(DenseMatrix::from_row_major(rows, cols, data)?)
}

pub fn format_dense_csv(m: &DenseMatrix) -> String {
    let mut out = String::new();
    if m.rows() == m.cols() {
        let _ = writeln!(out, "{}", m.rows());
    } else {
        let _ = writeln!(out, "{},{}", m.rows(), m.cols());
    }
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Reads a matrix file, picking the format from its first line.
pub fn parse_matrix(text: &str) -> Result<DenseMatrix> {
    if text.trim_start().starts_with("%%") {
        parse_matrix_market(text)
    } else {
        parse_dense_csv(text)
    }
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    parse_matrix(&read_to_string(path)?).with_context(|| format!("in {}", path.display()))
}

pub fn read_symmetric(path: &Path) -> Result<SymmetricMatrix> {
    let m = read_matrix(path)?;
    if m.rows() != m.cols() {
        bail!("{}: matrix is {}x{}, expected square", path.display(), m.rows(), m.cols());
    }
    m.to_symmetric(READ_SYMMETRY_TOL)
        .ok_or_else(|| anyhow!("{}: matrix is not symmetric", path.display()))
}

/// Data matrix CSV without header: one sample per line.
pub fn parse_data_csv(text: &str) -> Result<DenseMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (ln, l) in content_lines(text) {
        let row: Vec<f64> = csv_fields(l).map(|t| parse_f64(t, "entry", ln)).collect::<Result<_>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                bail!("line {ln}: expected {} columns, found {}", first.len(), row.len());
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("data file has no rows");
    }
    Ok(DenseMatrix::from_rows(&rows)?)
}

pub fn format_data_csv(m: &DenseMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn parse_flag(token: &str) -> Option<bool> {
    match token.to_ascii_lowercase().as_str() {
        "1" | "true" => Some(true),
        "0" | "false" => Some(false),
        _ => None,
    }
}

/// `correct,radius` per line; an optional header line is skipped.
pub fn parse_records(text: &str) -> Result<Vec<RobustnessRecord>> {
    let mut out = Vec::new();
    for (idx, (ln, l)) in content_lines(text).enumerate() {
        let t: Vec<&str> = csv_fields(l).collect();
        if t.len() != 2 {
            bail!("line {ln}: expected `correct,radius`");
        }
        let Some(correct) = parse_flag(t[0]) else {
            if idx == 0 && t[1].parse::<f64>().is_err() {
                continue;
            }
            bail!("line {ln}: correct flag must be 0/1 or true/false");
        };
        let radius = parse_f64(t[1], "radius", ln)?;
        let rec = RobustnessRecord::new(correct, radius).map_err(|e| anyhow!("line {ln}: {e}"))?;
        out.push(rec);
    }
    Ok(out)
}

pub fn format_records(records: &[RobustnessRecord]) -> String {
    let mut out = String::from("correct,radius\n");
    for r in records {
        let _ = writeln!(out, "{},{}", u8::from(r.correct), r.l2_radius);
    }
    out
}

pub fn format_curve(points: &[(f64, f64)]) -> String {
    let mut out = String::from("eps_inf,accuracy\n");
    for (eps, acc) in points {
        let _ = writeln!(out, "{eps},{acc}");
    }
    out
}

pub fn parse_curve(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (idx, (ln, l)) in content_lines(text).enumerate() {
        if idx == 0 && l.starts_with("eps_inf") {
            continue;
        }
        let t: Vec<&str> = csv_fields(l).collect();
        if t.len() != 2 {
            bail!("line {ln}: expected `eps_inf,accuracy`");
        }
        out.push((parse_f64(t[0], "eps_inf", ln)?, parse_f64(t[1], "accuracy", ln)?));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `max xᵀMx` over the hypercube for the given matrix.
    Inf1,
    /// `‖P‖_{∞→2}` of the given matrix.
    Inf2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub n: usize,
    pub bound: f64,
    pub mode: Mode,
    pub y: Vec<f64>,
    pub iterations_used: usize,
    pub early_stopped: bool,
    pub stop_reason: String,
    pub verified: bool,
    pub margin: Option<f64>,
    pub wall_time_ms: f64,
    /// `√bound`, present in `inf2` mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

impl CertificateJson {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("certificate serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("malformed certificate JSON")
    }

    /// The ∞→2 bound the certificate supports.
    pub fn kappa(&self) -> f64 {
        self.kappa.unwrap_or_else(|| self.bound.sqrt())
    }
}
