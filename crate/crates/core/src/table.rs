//! Numeric tables written as CSV or JSON lines at 15 significant digits.

use std::io::{Read, Write};

use serde_json::{Map, Number, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TableError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("line {line}: column `{column}` has non-numeric value `{value}`")]
    Parse {
        line: u64,
        column: String,
        value: String,
    },
    #[error("row has {got} values, header has {expected}")]
    RowLength { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    JsonLines,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::JsonLines => "jsonl",
        }
    }
}

/// Formats `x` with 15 significant digits. Non-finite values become empty.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.14e}")
    } else {
        String::new()
    }
}

/// Value of `x` after a round trip through [`fmt_num`].
pub fn rounded(x: f64) -> f64 {
    if x.is_finite() {
        fmt_num(x).parse().expect("formatted float parses")
    } else {
        f64::NAN
    }
}

/// Column-named rows of floats; `NaN` marks a missing value.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<(), TableError> {
        if row.len() != self.columns.len() {
            return Err(TableError::RowLength {
                expected: self.columns.len(),
                got: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn write<W: Write>(&self, out: W, format: Format) -> Result<(), TableError> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::JsonLines => self.write_json_lines(out),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), TableError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&x| fmt_num(x)))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json_lines<W: Write>(&self, mut out: W) -> Result<(), TableError> {
        for row in &self.rows {
            let mut obj = Map::new();
            for (name, &x) in self.columns.iter().zip(row) {
                let v = Number::from_f64(rounded(x)).map_or(Value::Null, Value::Number);
                obj.insert(name.clone(), v);
            }
            serde_json::to_writer(&mut out, &Value::Object(obj))?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, TableError> {
        let mut rdr = csv::Reader::from_reader(input);
        let columns: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut table = Table::new(columns);
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let mut row = Vec::with_capacity(record.len());
            for (field, name) in record.iter().zip(&table.columns) {
                let field = field.trim();
                let value = if field.is_empty() {
                    f64::NAN
                } else {
                    field.parse().map_err(|_| TableError::Parse {
                        line,
                        column: name.clone(),
                        value: field.to_string(),
                    })?
                };
                row.push(value);
            }
            table.push(row)?;
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fifteen_significant_digits() {
        assert_eq!(fmt_num(0.0032449047272727), "3.24490472727270e-3");
        assert_eq!(fmt_num(f64::NAN), "");
        assert_eq!(rounded(1.0 / 3.0), 0.333333333333333);
    }

    #[test]
    fn missing_values_survive_csv() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec![1.0, f64::NAN]).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = Table::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.rows[0][0], 1.0);
        assert!(back.rows[0][1].is_nan());
    }

    #[test]
    fn json_lines_have_one_object_per_row() {
        let mut t = Table::new(["t", "I"]);
        t.push(vec![0.0, 0.5]).unwrap();
        t.push(vec![1.0, f64::INFINITY]).unwrap();
        let mut buf = Vec::new();
        t.write(&mut buf, Format::JsonLines).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines, ["{\"t\":0.0,\"I\":0.5}", "{\"t\":1.0,\"I\":null}"]);
    }

    #[test]
    fn bad_cells_report_line() {
        let err = Table::read_csv("x,y\n1,2\n3,oops\n".as_bytes()).unwrap_err();
        assert!(matches!(err, TableError::Parse { line: 3, .. }), "{err:?}");
        assert!(Table::new(["x"]).push(vec![1.0, 2.0]).is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_exact_at_print_precision(xs in prop::collection::vec(-1e9..1e9f64, 1..20)) {
            let mut t = Table::new(["v"]);
            for &x in &xs {
                t.push(vec![x]).unwrap();
            }
            let mut buf = Vec::new();
            t.write_csv(&mut buf).unwrap();
            let back = Table::read_csv(buf.as_slice()).unwrap();
            for (row, &x) in back.rows.iter().zip(&xs) {
                prop_assert_eq!(row[0], rounded(x));
                prop_assert!((row[0] - x).abs() <= 1e-14 * x.abs());
            }
        }
    }
}
