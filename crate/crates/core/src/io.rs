//! CSV and JSON artifacts.
//!
//! Every float is written with 17 significant digits, `.` as decimal
//! separator and `\n` line endings.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::approximant::{ErrorReport, FunctionSource, LocalApproximant};
use crate::error::{Error, Result};
use crate::frame::ExtensionParams;
use crate::geometry::PartitionSpec;
use crate::singularity::Localization;

/// Formats `x` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A named numeric table, written as one CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

/// One CSV field.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    /// An input value such as a parameter, written in shortest round-trip form.
    Exact(f64),
    Text(String),
    Empty,
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) => f.write_str(&fmt_f64(*v)),
            Cell::Exact(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Empty => Ok(()),
        }
    }
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Table { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::to_string).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    /// Writes `<dir>/<name>.csv` and returns its path.
    pub fn write_to(&self, dir: &Path) -> Result<std::path::PathBuf> {
        let path = dir.join(format!("{}.csv", self.name));
        write_file(&path, &self.to_csv())?;
        Ok(path)
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::InvalidArgument(format!("{}: {e}", path.display()))
}

/// `k,ell,re,im` rows for every coefficient.
pub fn coefficients_csv(apx: &LocalApproximant) -> String {
    let n = apx.params().half_bandwidth() as i64;
    let mut out = String::from("k,ell,re,im\n");
    for (k, c) in apx.coefficients().vectors().iter().enumerate() {
        for (j, z) in c.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{}", k + 1, j as i64 - n, fmt_f64(z.re), fmt_f64(z.im));
        }
    }
    out
}

/// Metadata written next to the coefficients CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSidecar {
    pub function: String,
    pub partition: PartitionSpec,
    #[serde(rename = "T")]
    pub t: f64,
    pub gamma: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub epsilon: f64,
    pub m: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub retained: usize,
    pub coefficient_norms: Vec<f64>,
}

impl FitSidecar {
    pub fn new(function: &str, apx: &LocalApproximant, retained: usize) -> Self {
        let p: &ExtensionParams = apx.params();
        FitSidecar {
            function: function.to_string(),
            partition: PartitionSpec::from(apx.partition()),
            t: p.extension_factor(),
            gamma: p.oversampling(),
            n: p.half_bandwidth(),
            epsilon: p.tolerance(),
            m: p.m(),
            l: p.l(),
            retained,
            coefficient_norms: apx.coefficients().norms().to_vec(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("sidecar serializes");
        s.push('\n');
        s
    }
}

/// `k,max_abs_err` rows.
pub fn error_csv(report: &ErrorReport) -> String {
    let mut out = String::from("k,max_abs_err\n");
    for (k, e) in report.per_subinterval.iter().enumerate() {
        let _ = writeln!(out, "{},{}", k + 1, fmt_f64(*e));
    }
    out
}

/// Human-readable one-line summary of an error report.
pub fn error_summary(report: &ErrorReport) -> String {
    format!(
        "global max error {} (L2 {}, {} subintervals, refine {})",
        fmt_f64(report.global_max),
        fmt_f64(report.l2),
        report.per_subinterval.len(),
        report.refine
    )
}

/// `k,coeff_norm,flagged` rows.
pub fn norms_csv(norms: &[f64], flagged: &[usize]) -> String {
    let mut out = String::from("k,coeff_norm,flagged\n");
    for (k, n) in norms.iter().enumerate() {
        let _ = writeln!(out, "{},{},{}", k + 1, fmt_f64(*n), flagged.contains(&(k + 1)));
    }
    out
}

/// `k0,i0,x_break,normL,normR` rows.
pub fn localizations_csv(locs: &[Localization]) -> String {
    let mut out = String::from("k0,i0,x_break,normL,normR\n");
    for l in locs {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            l.k0,
            l.i0,
            fmt_f64(l.x_break),
            fmt_f64(l.norm_left()),
            fmt_f64(l.norm_right())
        );
    }
    out
}

/// Reads tabulated samples from a CSV with columns `x,re[,im]` and a header row.
pub fn read_tabulated(path: &Path) -> Result<FunctionSource> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    parse_tabulated(&text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

pub fn parse_tabulated(text: &str) -> Result<FunctionSource> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::invalid(e.to_string()))?.clone();
    let names: Vec<&str> = header.iter().collect();
    if names != ["x", "re"] && names != ["x", "re", "im"] {
        return Err(Error::invalid(format!("expected header x,re[,im], found {}", names.join(","))));
    }
    let mut points = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::invalid(e.to_string()))?;
        let num = |i: usize| -> Result<f64> {
            match rec.get(i) {
                None | Some("") if i == 2 => Ok(0.0),
                Some(s) => s.parse().map_err(|_| Error::invalid(format!("row {}: `{s}` is not a number", line + 2))),
                None => Err(Error::invalid(format!("row {}: missing column {}", line + 2, i + 1))),
            }
        };
        points.push((num(0)?, Complex64::new(num(1)?, num(2)?)));
    }
    FunctionSource::tabulated(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            assert_eq!(s.trim_start_matches('-').split('e').next().unwrap().len(), 18);
        }
    }

    #[test]
    fn table_csv_layout() {
        let mut t = Table::new("demo", &["k", "err", "note"]);
        t.push(vec![1usize.into(), 0.5.into(), Cell::from(None::<f64>)]);
        t.push(vec![2usize.into(), 1e-3.into(), "x".into()]);
        t.push(vec![3usize.into(), Cell::Exact(1.2), Cell::Exact(2.0)]);
        assert_eq!(
            t.to_csv(),
            "k,err,note\n1,5.0000000000000000e-1,\n2,1.0000000000000000e-3,x\n3,1.2,2\n"
        );
    }

    #[test]
    fn tabulated_parsing() {
        let f = parse_tabulated("x,re,im\n0,1,2\n1,3,\n").unwrap();
        assert_eq!(f.value_at(0.0).unwrap(), Complex64::new(1.0, 2.0));
        assert_eq!(f.value_at(1.0).unwrap(), Complex64::new(3.0, 0.0));
        let f = parse_tabulated("x,re\n0.5,2\n").unwrap();
        assert_eq!(f.value_at(0.5).unwrap(), Complex64::new(2.0, 0.0));
        assert!(parse_tabulated("a,b\n1,2\n").is_err());
        assert!(parse_tabulated("x,re\n1,abc\n").is_err());
        assert!(parse_tabulated("x,re\n1,2\n1,3\n").is_err());
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = read_tabulated(Path::new("/nonexistent/missing.csv")).unwrap_err();
        assert!(err.to_string().contains("missing.csv"));
    }
}
