//! CSV and JSON tables with byte-stable number formatting.
//!
//! Floats are written with 17 significant digits in scientific notation,
//! which round-trips every binary64 exactly.

use std::fmt::Write as _;
use std::io::{self, Write};

use crate::approx::ApproxExpansion;
use crate::corpus::BoundRow;
use crate::exact::MomentSet;
use crate::sim::OccupancyRow;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Bool(bool),
    Text(String),
    Missing,
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Missing, Into::into)
    }
}

/// Scientific notation with 17 significant digits; `-0` prints as `0`.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        "0.0000000000000000e0".to_string()
    } else if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) if v.is_finite() => format_float(*v),
            Cell::Float(_) | Cell::Missing => "null".to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => serde_json::Value::String(s.clone()).to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// An array of objects keyed by column name.
    pub fn to_json(&self) -> String {
        let mut out = String::from("[");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(if i == 0 { "\n  {" } else { ",\n  {" });
            for (j, (col, cell)) in self.columns.iter().zip(row).enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "\"{col}\": {}", cell.json());
            }
            out.push('}');
        }
        out.push_str(if self.rows.is_empty() { "]\n" } else { "\n]\n" });
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(self.to_csv().as_bytes())
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(self.to_json().as_bytes())
    }
}

pub const BOUND_COLUMNS: [&str; 11] = [
    "model_id", "n", "N", "r", "t", "kind", "remainder", "lower", "upper", "applicable", "satisfied",
];

pub fn bound_table(rows: &[BoundRow]) -> Table {
    let mut table = Table::new(BOUND_COLUMNS.to_vec());
    for row in rows {
        let rep = &row.report;
        table.push(vec![
            row.model_id.as_str().into(),
            row.n.into(),
            row.box_count.into(),
            row.r.into(),
            row.t.into(),
            row.kind.as_str().into(),
            rep.remainder.into(),
            rep.lower.into(),
            rep.upper.into(),
            rep.applicable.into(),
            rep.satisfied.into(),
        ]);
    }
    table
}

pub const OCCUPANCY_COLUMNS: [&str; 19] = [
    "n", "N", "replicates", "seed", "r", "sim_mean", "sim_var", "se_mean", "exact_mean",
    "approx_mean", "diff_mean", "bound_lo_mean", "bound_hi_mean", "se_var", "exact_var",
    "approx_var", "diff_var", "bound_lo_var", "bound_hi_var",
];

pub fn occupancy_table(rows: &[OccupancyRow]) -> Table {
    let mut table = Table::new(OCCUPANCY_COLUMNS.to_vec());
    for r in rows {
        table.push(vec![
            r.n.into(),
            r.box_count.into(),
            r.replicates.into(),
            r.seed.into(),
            r.r.into(),
            r.sim_mean.into(),
            r.sim_var.into(),
            r.se_mean.into(),
            r.exact_mean.into(),
            r.approx_mean.into(),
            r.diff_mean.into(),
            r.bound_lo_mean.into(),
            r.bound_hi_mean.into(),
            r.se_var.into(),
            r.exact_var.into(),
            r.approx_var.into(),
            r.diff_var.into(),
            r.bound_lo_var.into(),
            r.bound_hi_var.into(),
        ]);
    }
    table
}

/// One row per index with its mean and variance, then one row per
/// covariance pair.
pub fn moment_table(model_id: &str, set: &MomentSet) -> Table {
    let mut table = Table::new(vec!["model_id", "n", "N", "r", "t", "mean", "variance", "covariance"]);
    let n = set.model.ball_count();
    let big_n = set.model.box_count();
    for (&r, &m) in &set.means {
        table.push(vec![
            model_id.into(),
            n.into(),
            big_n.into(),
            r.into(),
            Cell::Missing,
            m.into(),
            set.variances[&r].into(),
            Cell::Missing,
        ]);
    }
    for (&(r, t), &c) in &set.covariances {
        table.push(vec![
            model_id.into(),
            n.into(),
            big_n.into(),
            r.into(),
            t.into(),
            Cell::Missing,
            Cell::Missing,
            c.into(),
        ]);
    }
    table
}

/// One labelled expansion per row.
pub fn expansion_table(model_id: &str, n: usize, big_n: usize, rows: &[(usize, Option<usize>, &str, ApproxExpansion)]) -> Table {
    let mut table = Table::new(vec![
        "model_id", "n", "N", "r", "t", "quantity", "leading", "correction", "approximation", "remainder_scale",
    ]);
    for (r, t, q, e) in rows {
        table.push(vec![
            model_id.into(),
            n.into(),
            big_n.into(),
            (*r).into(),
            (*t).into(),
            (*q).into(),
            e.leading.into(),
            e.correction.into(),
            e.value().into(),
            e.remainder_scale.into(),
        ]);
    }
    table
}
