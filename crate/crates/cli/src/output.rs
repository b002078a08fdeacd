//! Serialization with 17 significant digits, which round-trips every f64.

use std::io::{self, Write};

use serde::Serialize;

use crate::error::{CliError, CliResult};

struct SigDigits;

impl serde_json::ser::Formatter for SigDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// `value` with 17 significant digits, e.g. `2.5000000000000000e-1`.
pub fn float(value: f64) -> String {
    format!("{value:.16e}")
}

/// One JSON document on a single line, terminated by a newline.
pub fn to_json<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits);
    value.serialize(&mut ser).map_err(|e| CliError::config(format!("cannot serialize record: {e}")))?;
    buf.push(b'\n');
    Ok(buf)
}

/// CSV cell content.
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(v) => float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

pub fn to_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<Cell>>) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::config(format!("cannot write CSV: {e}"));
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(row.iter().map(Cell::render)).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::config(format!("cannot write CSV: {e}")))
}

/// Little-endian IEEE doubles, back to back.
pub fn to_f64_le(values: impl IntoIterator<Item = f64>) -> Vec<u8> {
    values.into_iter().flat_map(f64::to_le_bytes).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_json() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0, -0.0, f64::MIN_POSITIVE] {
            let bytes = to_json(&v).unwrap();
            let back: f64 = serde_json::from_slice(&bytes).unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{}", String::from_utf8_lossy(&bytes));
        }
        assert_eq!(to_json(&0.25).unwrap(), b"2.5000000000000000e-1\n");
    }

    #[test]
    fn csv_cells() {
        let out =
            to_csv(&["a", "b", "c"], [vec![1.5.into(), Cell::from(Some(3i64)), Cell::from(None::<i64>)]]).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "a,b,c\n1.5000000000000000e0,3,\n");
    }

    #[test]
    fn binary_layout() {
        assert_eq!(to_f64_le([1.0]), 1.0f64.to_le_bytes().to_vec());
    }
}
