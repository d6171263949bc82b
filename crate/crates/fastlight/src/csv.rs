//! Deterministic CSV output.
//!
//! Floats are written in scientific notation with 17 significant digits, which
//! round-trips every `f64`. Lines end in LF; the first line is the header.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Uint(u64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Uint(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Uint(v as u64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(if v { "true" } else { "false" }.into())
    }
}

pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

fn push_cell(out: &mut String, cell: &Cell) {
    match cell {
        Cell::Float(v) => out.push_str(&format_float(*v)),
        Cell::Int(v) => {
            let _ = write!(out, "{v}");
        }
        Cell::Uint(v) => {
            let _ = write!(out, "{v}");
        }
        Cell::Text(s) => {
            if s.contains([',', '"', '\n']) {
                out.push('"');
                out.push_str(&s.replace('"', "\"\""));
                out.push('"');
            } else {
                out.push_str(s);
            }
        }
    }
}

/// Renders a table; every row must have one cell per column.
pub fn render(columns: &[&str], rows: &[Vec<Cell>]) -> Result<String, CliError> {
    let mut out = columns.join(",");
    out.push('\n');
    for (i, row) in rows.iter().enumerate() {
        if row.len() != columns.len() {
            return Err(CliError::Validation(format!("row {i} has {} cells for {} columns", row.len(), columns.len())));
        }
        for (j, cell) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            push_cell(&mut out, cell);
        }
        out.push('\n');
    }
    Ok(out)
}

/// Writes a table of mixed cells.
pub fn write_table(path: &Path, columns: &[&str], rows: &[Vec<Cell>]) -> Result<(), CliError> {
    let text = render(columns, rows)?;
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Writes a purely numeric table.
pub fn write_series(path: &Path, columns: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let cells: Vec<Vec<Cell>> = rows.iter().map(|r| r.iter().map(|&v| Cell::Float(v)).collect()).collect();
    write_table(path, columns, &cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-2.0), "-2.0000000000000000e0");
        for v in [std::f64::consts::PI, 1e-300, 6.02214076e23, -0.0] {
            assert_eq!(format_float(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn header_only_for_empty_rows() {
        assert_eq!(render(&["a", "b"], &[]).unwrap(), "a,b\n");
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(render(&["a", "b"], &[vec![Cell::Float(1.0)]]).is_err());
    }

    #[test]
    fn mixed_cells_and_quoting() {
        let rows = vec![vec![Cell::Uint(3), Cell::Text("x,y".into()), Cell::Float(f64::NAN), Cell::from(true)]];
        assert_eq!(render(&["n", "s", "v", "b"], &rows).unwrap(), "n,s,v,b\n3,\"x,y\",NaN,true\n");
    }
}
