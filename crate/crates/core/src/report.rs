//! Plain-text tables: a `#`-prefixed key/value header block followed by a
//! comma-separated header row and data rows.

use std::io::{self, Write};

/// Formats a float with 12 significant digits, shortest form, no trailing zeros.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
        if s == "-0" { "0".into() } else { s }
    } else {
        let s = format!("{v:.11e}");
        let (mantissa, e) = s.split_once('e').expect("exponent");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{e}")
    }
}

/// Month cell; empty when the row is not tied to a month.
pub fn month_cell(m: Option<i32>) -> String {
    m.map(|m| m.to_string()).unwrap_or_default()
}

/// A header-bearing table written as one logical file.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Self { meta: Vec::new(), columns: columns.iter().map(|c| c.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.meta.push((key.into(), value.to_string()));
        self
    }

    pub fn push_meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.meta.push((key.into(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (k, v) in &self.meta {
            writeln!(w, "# {k}: {v}")?;
        }
        writeln!(w, "{}", self.columns.join(","))?;
        for r in &self.rows {
            writeln!(w, "{}", r.join(","))?;
        }
        Ok(())
    }

    pub fn to_string_lossy(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("write to Vec");
        String::from_utf8(buf).expect("utf8 table")
    }
}

/// Shorthand for building a row from displayable cells.
#[macro_export]
macro_rules! row {
    ($($cell:expr),* $(,)?) => { vec![$($cell.to_string()),*] };
}
