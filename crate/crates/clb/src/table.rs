//! Column-oriented tables rendered as CSV with a provenance comment header.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// One CSV cell. `Masked` renders as an empty field and marks values that are
/// deliberately absent (e.g. a trajectory past its blow-up time).
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Masked,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        match v {
            Some(x) => Cell::Float(x),
            None => Cell::Masked,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: Vec<S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Render as CSV. Floats carry 10 significant digits; provenance lines are
    /// written first as `#`-prefixed comments.
    pub fn to_csv(&self, provenance: &[String]) -> String {
        let mut out = String::new();
        for line in provenance {
            let _ = writeln!(out, "# {line}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let rendered: Vec<String> = row.iter().map(render_cell).collect();
            let _ = writeln!(out, "{}", rendered.join(","));
        }
        out
    }

    /// Parse CSV produced by [`Table::to_csv`], skipping comment lines.
    pub fn from_csv(text: &str) -> Result<Table> {
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Config("CSV has no header row".into()))?;
        let columns: Vec<String> = header.split(',').map(str::to_string).collect();
        let mut table = Table {
            columns,
            rows: Vec::new(),
        };
        for line in lines {
            if line.is_empty() {
                continue;
            }
            let cells: Vec<Cell> = line
                .split(',')
                .map(|field| {
                    if field.is_empty() {
                        Cell::Masked
                    } else if let Ok(i) = field.parse::<i64>() {
                        Cell::Int(i)
                    } else if let Ok(f) = field.parse::<f64>() {
                        Cell::Float(f)
                    } else {
                        Cell::Text(field.to_string())
                    }
                })
                .collect();
            if cells.len() != table.columns.len() {
                return Err(Error::Config(format!(
                    "row has {} fields, header has {}",
                    cells.len(),
                    table.columns.len()
                )));
            }
            table.rows.push(cells);
        }
        Ok(table)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Extract a column as floats; masked cells become None.
    pub fn float_column(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let idx = self
            .column_index(name)
            .ok_or_else(|| Error::Config(format!("no column named {name}")))?;
        self.rows
            .iter()
            .map(|row| match &row[idx] {
                Cell::Float(v) => Ok(Some(*v)),
                Cell::Int(v) => Ok(Some(*v as f64)),
                Cell::Masked => Ok(None),
                Cell::Text(t) => Err(Error::Config(format!(
                    "column {name} holds non-numeric field {t:?}"
                ))),
            })
            .collect()
    }
}

fn render_cell(cell: &Cell) -> String {
    match cell {
        Cell::Float(v) => format!("{v:.9e}"),
        Cell::Int(v) => v.to_string(),
        Cell::Text(t) => t.clone(),
        Cell::Masked => String::new(),
    }
}
