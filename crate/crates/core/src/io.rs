//! FRM1 text matrices and the JSON sidecar written next to a reduced dual.
//!
//! ```text
//! FRM1 <real|complex> <rows> <cols>
//! <cols entries>      (one line per row)
//! ```
//!
//! Entries are written with 17 significant digits so that reading a file
//! back reproduces every bit. Complex entries are `a+bi` / `a-bi`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::erasure::{Method, ReducedDual};
use crate::error::{Error, Result};
use crate::frame::Warning;
use crate::scalar::{Field, Scalar};

pub const MAGIC: &str = "FRM1";

pub fn format_frm1<T: Scalar>(m: &DMatrix<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {} {} {}", T::FIELD, m.nrows(), m.ncols());
    for row in m.row_iter() {
        let line = row
            .iter()
            .map(|x| x.format_entry())
            .collect::<Vec<_>>()
            .join(" ");
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Header fields of an FRM1 document.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub field: Field,
    pub rows: usize,
    pub cols: usize,
}

pub fn parse_header(text: &str) -> Result<Header> {
    let line = text
        .lines()
        .next()
        .ok_or_else(|| parse_err(1, "empty document"))?;
    let tokens: Vec<&str> = line.split_whitespace().collect();
    match tokens.as_slice() {
        [MAGIC, field, rows, cols] => {
            let field = field.parse::<Field>().map_err(|e| parse_err(1, e))?;
            let rows = rows
                .parse()
                .map_err(|_| parse_err(1, format!("bad row count `{rows}`")))?;
            let cols = cols
                .parse()
                .map_err(|_| parse_err(1, format!("bad column count `{cols}`")))?;
            Ok(Header { field, rows, cols })
        }
        _ => Err(parse_err(
            1,
            format!("expected `{MAGIC} <field> <rows> <cols>`, found `{line}`"),
        )),
    }
}

/// Parses an FRM1 document. A real document may be read as a complex
/// matrix; the reverse is an error.
pub fn parse_frm1<T: Scalar>(text: &str) -> Result<DMatrix<T>> {
    let header = parse_header(text)?;
    if header.field == Field::Complex && T::FIELD == Field::Real {
        return Err(parse_err(
            1,
            "complex data cannot be read into a real matrix",
        ));
    }
    let mut m = DMatrix::zeros(header.rows, header.cols);
    let mut row = 0;
    for (lineno, line) in text.lines().enumerate().skip(1) {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        if row == header.rows {
            return Err(parse_err(lineno, "more rows than the header declares"));
        }
        let mut col = 0;
        for token in line.split_whitespace() {
            if col == header.cols {
                return Err(parse_err(
                    lineno,
                    format!("more than {} entries", header.cols),
                ));
            }
            m[(row, col)] = T::parse_entry(token)
                .ok_or_else(|| parse_err(lineno, format!("bad entry `{token}`")))?;
            col += 1;
        }
        if col != header.cols {
            return Err(parse_err(
                lineno,
                format!("expected {} entries, found {col}", header.cols),
            ));
        }
        row += 1;
    }
    if row != header.rows {
        return Err(parse_err(
            text.lines().count(),
            format!("expected {} rows, found {row}", header.rows),
        ));
    }
    Ok(m)
}

pub fn read_frm1<T: Scalar>(path: &Path) -> Result<DMatrix<T>> {
    parse_frm1(&fs::read_to_string(path)?)
}

pub fn read_header(path: &Path) -> Result<Header> {
    parse_header(&fs::read_to_string(path)?)
}

pub fn write_frm1<T: Scalar>(path: &Path, m: &DMatrix<T>) -> Result<()> {
    fs::write(path, format_frm1(m))?;
    Ok(())
}

/// Whitespace separated entries, any line layout.
pub fn parse_vector<T: Scalar>(text: &str) -> Result<DVector<T>> {
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        for token in line.split_whitespace() {
            values.push(
                T::parse_entry(token)
                    .ok_or_else(|| parse_err(lineno + 1, format!("bad entry `{token}`")))?,
            );
        }
    }
    if values.is_empty() {
        return Err(parse_err(1, "no entries"));
    }
    Ok(DVector::from_vec(values))
}

/// Diagnostics written beside a reduced dual's FRM1 file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub method: Method,
    /// 1-based, in traversal order.
    pub erased_indices: Vec<usize>,
    pub duality_residual: f64,
    /// Iterative denominators; numbers for real data, `[re, im]` for complex.
    pub steps: Vec<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub condition_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<Warning>,
}

impl Sidecar {
    pub fn from_reduced<T: Scalar>(reduced: &ReducedDual<T>) -> Self {
        let steps = reduced
            .steps()
            .iter()
            .map(|&d| {
                let (re, im) = d.parts();
                match T::FIELD {
                    Field::Real => serde_json::json!(re),
                    Field::Complex => serde_json::json!([re, im]),
                }
            })
            .collect();
        Self {
            method: reduced.method(),
            erased_indices: reduced.erased().iter().map(|i| i + 1).collect(),
            duality_residual: reduced.duality_residual(),
            steps,
            condition_estimate: reduced.condition_estimate(),
            warnings: reduced.warnings().to_vec(),
        }
    }
}

/// Writes `<path>` (FRM1) and `<path>.json` (sidecar). Returns the sidecar path.
pub fn write_reduced<T: Scalar>(
    path: &Path,
    reduced: &ReducedDual<T>,
) -> Result<std::path::PathBuf> {
    write_frm1(path, reduced.vectors())?;
    let sidecar_path = sidecar_path(path);
    let json = serde_json::to_string_pretty(&Sidecar::from_reduced(reduced))?;
    fs::write(&sidecar_path, json + "\n")?;
    Ok(sidecar_path)
}

pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    name.into()
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}
