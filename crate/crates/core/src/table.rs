//! CSV output helpers: RFC-4180 via the `csv` crate, header row first,
//! numbers printed with 17 significant digits so every `f64` round-trips.

use std::io::Write;

use crate::error::Result;

/// Fixed 17-significant-digit scientific notation, e.g. `1.2500000000000000e-1`.
/// Integral values that fit exactly are printed as integers.
pub fn num(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        // avoid "-0"
        return format!("{}", x as i64);
    }
    format!("{x:.16e}")
}

/// A header plus string rows, written in one go.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}
