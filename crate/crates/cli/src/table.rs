use std::io::Write;

use crate::CliResult;

/// Sentinel written in place of `R_M` below the minimum power.
pub const INSUFFICIENT: &str = "insufficient";
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Value(f64),
    Insufficient,
}

impl Cell {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Cell::Value(v) => Some(v),
            Cell::Insufficient => None,
        }
    }

    fn render(&self) -> String {
        match *self {
            Cell::Value(v) => format_significant(v, SIGNIFICANT_DIGITS),
            Cell::Insufficient => INSUFFICIENT.to_string(),
        }
    }
}

/// `%.{digits}g`: fixed notation for moderate exponents, scientific
/// otherwise, trailing zeros trimmed.
pub fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<Cell>> {
        let j = self.header.iter().position(|h| *h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> CliResult<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for row in &self.rows {
            out.write_record(row.iter().map(Cell::render))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> CliResult<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}
