// Copyright 2026 The ssb-measure Authors
// SPDX-License-Identifier: Apache-2.0

//! Minimal CSV emission: header row, comma separator, LF endings and every
//! float printed with 17 significant digits.

use std::fmt::Write;

/// Formats a float with 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Accumulates rows into an in-memory CSV document.
#[derive(Debug, Clone)]
pub struct CsvTable {
    columns: usize,
    buf: String,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Self {
            columns: header.len(),
            buf,
        }
    }

    /// Appends one row of numeric cells.
    ///
    /// Panics if the row width differs from the header.
    pub fn push(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.columns, "row width must match header");
        for (i, x) in row.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            let _ = write!(self.buf, "{}", fmt_f64(*x));
        }
        self.buf.push('\n');
    }

    /// Appends one row of preformatted cells.
    pub fn push_raw(&mut self, row: &[String]) {
        assert_eq!(row.len(), self.columns, "row width must match header");
        self.buf.push_str(&row.join(","));
        self.buf.push('\n');
    }

    pub fn into_string(self) -> String {
        self.buf
    }

    pub fn as_str(&self) -> &str {
        &self.buf
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.5), "-2.5000000000000000e0");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn table_layout() {
        let mut t = CsvTable::new(&["t", "x"]);
        t.push(&[0.0, 1.0]);
        assert_eq!(
            t.as_str(),
            "t,x\n0.0000000000000000e0,1.0000000000000000e0\n"
        );
    }
}
