use std::path::Path;

use crate::error::{Error, Result};

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Missing,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(if x { "true" } else { "false" }.into())
    }
}

/// 17 significant digits in scientific notation; `inf`, `-inf`, `nan`
/// spelled out.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_number(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }
}

/// Named table with a fixed header; the file is `<name>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, header: &'static [&'static str]) -> Self {
        Table {
            name,
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width of {}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        if self.rows.is_empty() {
            return Err(Error::EmptyReport);
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let fault = |e: csv::Error| Error::NumericFault(format!("csv encoding: {e}"));
        w.write_record(self.header).map_err(fault)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(fault)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::NumericFault(format!("csv encoding: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Writes `table` to `path`.
pub fn emit_csv(table: &Table, path: &Path) -> Result<()> {
    let body = table.to_csv()?;
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_use_seventeen_digits() {
        assert_eq!(format_number(0.1), "1.0000000000000001e-1");
        assert_eq!(format_number(-2.5), "-2.5000000000000000e0");
        assert_eq!(format_number(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn empty_table_is_refused() {
        let t = Table::new("x", &["a"]);
        assert!(matches!(t.to_csv(), Err(Error::EmptyReport)));
    }

    #[test]
    fn header_then_rows() {
        let mut t = Table::new("x", &["lambda", "status"]);
        t.push(vec![1.0.into(), "converged".into()]);
        assert_eq!(t.to_csv().unwrap(), "lambda,status\n1.0000000000000000e0,converged\n");
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let mut t = Table::new("x", &["a"]);
        t.push(vec![1.0.into()]);
        let err = emit_csv(&t, Path::new("/nonexistent-dir/for/sure/x.csv")).unwrap_err();
        assert!(matches!(err, Error::IoError { .. }));
    }
}
