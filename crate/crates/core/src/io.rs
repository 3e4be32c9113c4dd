//! Plain-text dense matrix and vector formats.
//!
//! Matrices: the first data line holds `rows cols`, followed by exactly
//! `rows` lines of `cols` whitespace-separated reals (row-major). Vectors:
//! whitespace-separated reals over any number of lines. In both, blank
//! lines and lines starting with `#` are ignored. Line numbers in errors
//! are 1-based physical lines.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let t = l.trim();
        (!t.is_empty() && !t.starts_with('#')).then_some((i + 1, t))
    })
}

fn parse_reals(line_no: usize, line: &str) -> Result<Vec<f64>> {
    line.split_whitespace()
        .map(|tok| {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("`{tok}` is not a real number"),
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Parse {
                    line: line_no,
                    message: format!("`{tok}` is not finite"),
                })
            }
        })
        .collect()
}

pub fn parse_matrix(text: &str) -> Result<Matrix> {
    let mut lines = data_lines(text);
    let (header_no, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing `rows cols` header".into(),
    })?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Parse {
            line: header_no,
            message: format!("header `{header}` must be two positive integers"),
        })?;
    let (rows, cols) = match dims[..] {
        [r, c] if r > 0 && c > 0 => (r, c),
        _ => {
            return Err(Error::Parse {
                line: header_no,
                message: format!("header `{header}` must be two positive integers"),
            })
        }
    };

    let mut data = Vec::with_capacity(rows * cols);
    let mut last_line = header_no;
    let mut seen = 0;
    for (no, line) in lines {
        last_line = no;
        if seen == rows {
            return Err(Error::Parse {
                line: no,
                message: format!("extra row beyond the declared {rows}"),
            });
        }
        let row = parse_reals(no, line)?;
        if row.len() != cols {
            return Err(Error::Parse {
                line: no,
                message: format!("expected {cols} values, found {}", row.len()),
            });
        }
        data.extend(row);
        seen += 1;
    }
    if seen != rows {
        return Err(Error::Parse {
            line: last_line + 1,
            message: format!("expected {rows} rows, found {seen}"),
        });
    }
    Matrix::from_row_major(rows, cols, data)
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_matrix(&text)
}

/// Writes `m` in the matrix text format with round-trip precision.
pub fn format_matrix(m: &Matrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| format!("{:e}", m.get(i, j))).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn parse_vector(text: &str) -> Result<Vector> {
    let mut entries = Vec::new();
    for (no, line) in data_lines(text) {
        entries.extend(parse_reals(no, line)?);
    }
    if entries.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "vector file holds no values".into(),
        });
    }
    Vector::new(entries)
}

pub fn load_vector(path: impl AsRef<Path>) -> Result<Vector> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_vector(&text)
}
