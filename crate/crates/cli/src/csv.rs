//! Minimal CSV tables: `#` comment header, one column-name row, then data.
//! Reals are written with 17 significant digits so they parse back to the
//! same bits.

use macrofacet::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

pub fn format_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    comments: Vec<String>,
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    /// `columns` carry their unit in the name, e.g. `theta_deg`.
    pub fn new(columns: &[&str]) -> Self {
        Table { comments: Vec::new(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn comment(&mut self, line: impl Into<String>) {
        self.comments.push(line.into());
    }

    /// Standard provenance block: tool version, seed and every parameter.
    pub fn header(&mut self, command: &str, seed: Option<u64>, params: &[(String, String)]) {
        self.comment(format!("macrofacet {}", env!("CARGO_PKG_VERSION")));
        self.comment(format!("command: {command}"));
        match seed {
            Some(s) => self.comment(format!("seed: {s}")),
            None => self.comment("seed: none (deterministic)"),
        }
        for (k, v) in params {
            self.comment(format!("{k} = {v}"));
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.comments {
            let _ = writeln!(s, "# {c}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for r in &self.rows {
            let cells: Vec<String> = r
                .iter()
                .map(|c| match *c {
                    Cell::Int(i) => i.to_string(),
                    Cell::Real(v) => format_real(v),
                })
                .collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    /// Writes to `path`, or to stdout when it is absent or `-`.
    pub fn write(&self, path: Option<&Path>) -> Result<()> {
        let text = self.render();
        match path {
            Some(p) if p != Path::new("-") => {
                std::fs::write(p, text).map_err(|e| Error::Io { path: p.to_path_buf(), source: e })
            }
            _ => {
                print!("{text}");
                Ok(())
            }
        }
    }
}
