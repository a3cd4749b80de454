//! The `LDGQ1` text format for Q-tensor fields.
//!
//! ```text
//! LDGQ1 nx ny nz hx hy hz
//! i j k q1 q2 q3 q4 q5
//! ...
//! ```
//!
//! One line per node with `z` fastest. Floats are written in shortest
//! round-trip form.

use std::io::{BufRead, Write};

use thiserror::Error;

use super::lattice::{Field, Grid3, QField};
use crate::qtensor::QTensor;

pub const MAGIC: &str = "LDGQ1";

#[derive(Debug, Error)]
pub enum FieldIoError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_err(line: usize, message: impl Into<String>) -> FieldIoError {
    FieldIoError::Format { line, message: message.into() }
}

pub fn write_field<W: Write>(field: &QField, mut out: W) -> std::io::Result<()> {
    let g = field.grid;
    writeln!(out, "{MAGIC} {} {} {} {} {} {}", g.nx, g.ny, g.nz, g.hx, g.hy, g.hz)?;
    for (idx, q) in field.values.iter().enumerate() {
        let (i, j, k) = g.coords(idx);
        let c = q.0;
        writeln!(out, "{i} {j} {k} {} {} {} {} {}", c[0], c[1], c[2], c[3], c[4])?;
    }
    out.flush()
}

pub fn write_field_string(field: &QField) -> String {
    let mut buf = Vec::new();
    write_field(field, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

pub fn read_field<R: BufRead>(input: R) -> Result<QField, FieldIoError> {
    let mut lines = input.lines().enumerate().map(|(n, l)| (n + 1, l));
    let (_, header) = lines.next().ok_or_else(|| format_err(1, "empty file"))?;
    let header = header?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.first() != Some(&MAGIC) {
        return Err(format_err(1, format!("expected magic {MAGIC}")));
    }
    if tokens.len() != 7 {
        return Err(format_err(1, "header must be `LDGQ1 nx ny nz hx hy hz`"));
    }
    let dims: Vec<usize> = tokens[1..4]
        .iter()
        .map(|t| t.parse().map_err(|_| format_err(1, format!("bad node count `{t}`"))))
        .collect::<Result<_, _>>()?;
    let spacings: Vec<f64> = tokens[4..7]
        .iter()
        .map(|t| t.parse().map_err(|_| format_err(1, format!("bad spacing `{t}`"))))
        .collect::<Result<_, _>>()?;
    let grid = Grid3::new(dims[0], dims[1], dims[2], spacings[0], spacings[1], spacings[2])
        .map_err(|e| format_err(1, e.to_string()))?;

    let mut values = Vec::with_capacity(grid.len());
    for (lineno, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let idx = values.len();
        if idx == grid.len() {
            return Err(format_err(lineno, format!("more than {} node lines", grid.len())));
        }
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 8 {
            return Err(format_err(lineno, format!("expected 8 fields, found {}", t.len())));
        }
        let site: Vec<usize> = t[..3]
            .iter()
            .map(|s| s.parse().map_err(|_| format_err(lineno, format!("bad index `{s}`"))))
            .collect::<Result<_, _>>()?;
        let want = grid.coords(idx);
        if (site[0], site[1], site[2]) != want {
            return Err(format_err(
                lineno,
                format!("node ({}, {}, {}) out of order, expected {want:?}", site[0], site[1], site[2]),
            ));
        }
        let mut c = [0.0f64; 5];
        for (slot, s) in c.iter_mut().zip(&t[3..]) {
            *slot = s.parse().map_err(|_| format_err(lineno, format!("bad coefficient `{s}`")))?;
            if !slot.is_finite() {
                return Err(format_err(lineno, format!("non-finite coefficient at node {want:?}")));
            }
        }
        values.push(QTensor::from_coeffs(c));
    }
    if values.len() != grid.len() {
        return Err(format_err(0, format!("expected {} node lines, found {}", grid.len(), values.len())));
    }
    Ok(Field { grid, values })
}

pub fn read_field_str(text: &str) -> Result<QField, FieldIoError> {
    read_field(text.as_bytes())
}
