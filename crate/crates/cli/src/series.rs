//! Time series of named observables and their CSV form.

use std::io::{Read, Write};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub t: Vec<f64>,
    /// Observable names, without the leading `t`.
    pub columns: Vec<String>,
    /// One vector per column, each as long as `t`.
    pub values: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(name: String, t: Vec<f64>, columns: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        if columns.len() != values.len() {
            return Err(CliError::Config(format!("{} column names for {} columns", columns.len(), values.len())));
        }
        if let Some((name, col)) = columns.iter().zip(&values).find(|(_, v)| v.len() != t.len()) {
            return Err(CliError::Config(format!("column `{name}` has {} rows, expected {}", col.len(), t.len())));
        }
        Ok(Self { name, t, columns, values })
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty() || self.columns.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().position(|c| c == name).map(|k| self.values[k].as_slice())
    }
}

/// Seventeen significant digits in scientific notation: exact on re-parse and
/// independent of locale.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(series: &Series, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let csv_err = |e: csv::Error| CliError::Io(e.to_string());
    let header = std::iter::once("t").chain(series.columns.iter().map(String::as_str));
    w.write_record(header).map_err(csv_err)?;
    for (k, t) in series.t.iter().enumerate() {
        let row = std::iter::once(format_number(*t)).chain(series.values.iter().map(|col| format_number(col[k])));
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

pub fn to_csv_string(series: &Series) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(series, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is ASCII"))
}

/// Reads a CSV written by [`write_csv`]; the first column must be `t`.
pub fn read_csv<R: Read>(name: &str, input: R) -> Result<Series> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let bad = |msg: String| CliError::Config(format!("{name}: {msg}"));
    let header = rd.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.get(0) != Some("t") {
        return Err(bad("first column must be `t`".into()));
    }
    let columns: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut t = Vec::new();
    let mut values = vec![Vec::new(); columns.len()];
    for (line, record) in rd.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let parse = |k: usize| -> Result<f64> {
            let field = record.get(k).unwrap_or("");
            field.trim().parse().map_err(|_| bad(format!("row {}: `{field}` is not a number", line + 2)))
        };
        t.push(parse(0)?);
        for (k, col) in values.iter_mut().enumerate() {
            col.push(parse(k + 1)?);
        }
    }
    Series::new(name.to_string(), t, columns, values)
}
