//! Serialization of census reports and tabular records as CSV, TSV or JSON.

use std::fmt;
use std::str::FromStr;

use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::search::CensusReport;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Csv,
    Json,
    Tsv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "tsv" => Ok(Format::Tsv),
            other => Err(Error::domain(format!("unknown output format {other:?}"))),
        }
    }
}

/// A single table cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(u128),
    Signed(i128),
    Float(f64),
    Text(String),
    Empty,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Signed(v) => write!(f, "{v}"),
            Cell::Float(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Empty => Ok(()),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cell::Int(v) => s.serialize_u128(*v),
            Cell::Signed(v) => s.serialize_i128(*v),
            Cell::Float(v) => s.serialize_f64(*v),
            Cell::Text(v) => s.serialize_str(v),
            Cell::Empty => s.serialize_none(),
        }
    }
}

macro_rules! cell_from_int {
    ($($t:ty),*) => {$(
        impl From<$t> for Cell {
            fn from(v: $t) -> Self { Cell::Int(v as u128) }
        }
    )*};
}
cell_from_int!(u8, u32, u64, u128, usize);

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Signed(v as i128)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// Column-ordered records; JSON output is an array of objects whose keys
/// follow the column order.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.delimited(','),
            Format::Tsv => self.delimited('\t'),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("tables always serialize");
                s.push('\n');
                s
            }
        }
    }

    fn delimited(&self, sep: char) -> String {
        let sep = sep.to_string();
        let mut out = self.columns.join(&sep);
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            out.push_str(&line.join(&sep));
            out.push('\n');
        }
        out
    }
}

impl Serialize for Table {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Row<'a>(&'a [String], &'a [Cell]);
        impl Serialize for Row<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut m = s.serialize_map(Some(self.0.len()))?;
                for (k, v) in self.0.iter().zip(self.1) {
                    m.serialize_entry(k, v)?;
                }
                m.end()
            }
        }
        let mut seq = s.serialize_seq(Some(self.rows.len()))?;
        for row in &self.rows {
            seq.serialize_element(&Row(&self.columns, row))?;
        }
        seq.end()
    }
}

pub const CENSUS_COLUMNS: [&str; 5] = ["N", "epsilon", "count_canonical", "count_ordered", "fitted_exponent"];

/// Flat census rows; the fitted exponent repeats on each row and is blank
/// when absent.
pub fn census_table(report: &CensusReport) -> Table {
    let mut t = Table::new(CENSUS_COLUMNS);
    for row in &report.grid {
        t.push(vec![
            row.n.into(),
            report.params.epsilon.to_string().into(),
            row.count_canonical.into(),
            row.count_ordered.into(),
            report.fitted_exponent.into(),
        ]);
    }
    t
}

pub fn emit_census(report: &CensusReport, format: Format) -> Result<String> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            Ok(s)
        }
        _ => Ok(census_table(report).render(format)),
    }
}

pub fn parse_census_json(s: &str) -> Result<CensusReport> {
    Ok(serde_json::from_str(s)?)
}

/// `(log N, log count)` for grid points with a nonzero count.
pub fn plot_data(report: &CensusReport) -> Table {
    let mut t = Table::new(["log_N", "log_count"]);
    for row in report.grid.iter().filter(|r| r.count_canonical > 0) {
        t.push(vec![(row.n as f64).ln().into(), (row.count_canonical as f64).ln().into()]);
    }
    t
}
