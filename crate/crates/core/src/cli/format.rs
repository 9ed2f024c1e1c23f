//! Number grids, significant-digit formatting and tabular output.

use std::io::Write;

use serde_json::{Map, Value};

use crate::{Error, Result};

/// Largest number of points a single range may expand to.
pub const MAX_GRID_POINTS: usize = 1_000_000;

/// Parses a comma-separated list whose items are numbers or ranges
/// `a:b:step` (inclusive of `b` up to rounding), e.g. `-1,0.1:0.3:0.1`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in text.split(',') {
        let item = item.trim();
        if item.is_empty() {
            return Err(Error::invalid(format!("empty item in list `{text}`")));
        }
        if item.contains(':') {
            let parts: Vec<&str> = item.split(':').collect();
            let [a, b, step] = parts.as_slice() else {
                return Err(Error::invalid(format!("range `{item}` must be a:b:step")));
            };
            let (a, b, step) = (number(a)?, number(b)?, number(step)?);
            if step <= 0.0 || b < a {
                return Err(Error::invalid(format!("range `{item}` needs step > 0 and a ≤ b")));
            }
            let span = (b - a) / step;
            if span >= MAX_GRID_POINTS as f64 {
                return Err(Error::invalid(format!("range `{item}` exceeds {MAX_GRID_POINTS} points")));
            }
            let count = (span + 1e-9).floor() as usize + 1;
            out.extend((0..count).map(|i| round_grid(a + i as f64 * step)));
        } else {
            out.push(number(item)?);
        }
    }
    Ok(out)
}

/// Removes representation noise such as `0.30000000000000004`.
fn round_grid(x: f64) -> f64 {
    format!("{x:.12e}").parse().unwrap_or(x)
}

fn number(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| Error::invalid(format!("`{}` is not a number", s.trim())))?;
    if !v.is_finite() {
        return Err(Error::invalid(format!("`{}` is not finite", s.trim())));
    }
    Ok(v)
}

/// Positive integers from a grid, e.g. sample sizes.
pub fn parse_count_list(text: &str) -> Result<Vec<usize>> {
    parse_grid(text)?
        .into_iter()
        .map(|v| {
            if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(Error::invalid(format!("expected a positive integer, got {v}")))
            }
        })
        .collect()
}

/// `x` rounded to `digits` significant digits, printed as the shortest
/// decimal that parses back to that rounded value.
pub fn format_sig(x: f64, digits: u8) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let digits = digits.clamp(1, 17) as usize;
    let rounded: f64 = format!("{:.*e}", digits - 1, x).parse().expect("formatted float parses");
    // Rounding up near f64::MAX overflows; keep the value as is.
    if rounded.is_finite() { format!("{rounded}") } else { format!("{x}") }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Missing,
}

impl Cell {
    pub fn opt(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Real)
    }

    fn render(&self, digits: u8) -> String {
        match self {
            Cell::Real(x) => format_sig(*x, digits),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Missing => "-".into(),
        }
    }

    fn json(&self, digits: u8) -> Value {
        match self {
            Cell::Real(x) if x.is_finite() => {
                let rounded: f64 = format_sig(*x, digits).parse().expect("formatted float parses");
                serde_json::Number::from_f64(rounded).map_or(Value::Null, Value::Number)
            }
            Cell::Real(x) => Value::String(format_sig(*x, digits)),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Missing => Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(headers: Vec<&'static str>) -> Self {
        Self { headers, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, out: &mut dyn Write, digits: u8) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.render(digits)))?;
        }
        w.flush()
    }

    pub fn write_jsonl(&self, out: &mut dyn Write, digits: u8) -> std::io::Result<()> {
        for row in &self.rows {
            let obj: Map<String, Value> =
                self.headers.iter().zip(row).map(|(h, c)| (h.to_string(), c.json(digits))).collect();
            writeln!(out, "{}", Value::Object(obj))?;
        }
        Ok(())
    }
}

/// A cell read back from CSV output.
#[derive(Debug, Clone, PartialEq)]
pub enum ParsedCell {
    Number(f64),
    Text(String),
    Missing,
}

/// Splits one CSV record into typed cells: `-` is missing, anything that
/// parses as a float is a number, the rest is text.
pub fn parse_csv_row(line: &str) -> Result<Vec<ParsedCell>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(line.as_bytes());
    let mut records = reader.records();
    let record = match records.next() {
        Some(r) => r.map_err(|e| Error::Parse { line: 1, message: e.to_string() })?,
        None => return Ok(Vec::new()),
    };
    if records.next().is_some() {
        return Err(Error::Parse { line: 2, message: "expected a single record".into() });
    }
    Ok(record
        .iter()
        .map(|f| match f {
            "-" => ParsedCell::Missing,
            _ => f.parse::<f64>().map_or_else(|_| ParsedCell::Text(f.to_string()), ParsedCell::Number),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("-1,-3").unwrap(), vec![-1.0, -3.0]);
        assert_eq!(parse_grid("0.1:0.3:0.1").unwrap(), vec![0.1, 0.2, 0.3]);
        assert_eq!(parse_grid("0.10:0.99:0.01").unwrap().len(), 90);
        assert_eq!(parse_grid("2, 0:1:0.5").unwrap(), vec![2.0, 0.0, 0.5, 1.0]);
        for bad in ["", "a", "1,,2", "1:0:0.1", "0:1:0", "0:1", "inf", "0:1e9:1e-3"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
        assert_eq!(parse_count_list("10,100").unwrap(), vec![10, 100]);
        assert!(parse_count_list("0").is_err());
        assert!(parse_count_list("1.5").is_err());
    }

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(0.052500123, 6), "0.0525001");
        assert_eq!(format_sig(0.0525, 4), "0.0525");
        assert_eq!(format_sig(123456.7, 3), "123000");
        assert_eq!(format_sig(f64::INFINITY, 6), "inf");
        assert_eq!(format_sig(-0.0, 6), "-0");
    }

    #[test]
    fn csv_and_jsonl_output() {
        let mut t = Table::new(vec!["model", "value", "se", "ok"]);
        t.push(vec![Cell::Text("normal".into()), Cell::Real(1.0 / 3.0), Cell::Missing, Cell::Bool(true)]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf, 6).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "model,value,se,ok\nnormal,0.333333,-,true\n");
        let mut buf = Vec::new();
        t.write_jsonl(&mut buf, 6).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "{\"model\":\"normal\",\"value\":0.333333,\"se\":null,\"ok\":true}\n"
        );
    }

    proptest! {
        #[test]
        fn csv_cells_round_trip(x in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, digits in 1u8..=15) {
            let mut t = Table::new(vec!["x"]);
            t.push(vec![Cell::Real(x)]);
            let mut buf = Vec::new();
            t.write_csv(&mut buf, digits).unwrap();
            let text = String::from_utf8(buf).unwrap();
            let line = text.lines().nth(1).unwrap();
            let shown = format_sig(x, digits);
            prop_assert_eq!(line, shown.as_str());
            let parsed = parse_csv_row(line).unwrap();
            prop_assert_eq!(parsed, vec![ParsedCell::Number(shown.parse().unwrap())]);
            let rel = ((shown.parse::<f64>().unwrap() - x) / x).abs();
            prop_assert!(!x.is_normal() || rel <= 0.5 * 10f64.powi(1 - digits as i32) * (1.0 + 1e-12));
        }
    }
}
