use serde::Serialize;
use std::io::Write;

use crate::error::{Error, Result};

/// Serialization of result tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    /// Header row plus one record per row; floats at full precision.
    #[default]
    Csv,
    /// Pretty-printed array of objects.
    Json,
}

/// Writes `rows` to `w` in `format`.
pub fn write_table<T: Serialize, W: Write>(rows: &[T], format: OutputFormat, mut w: W) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut out = csv::Writer::from_writer(w);
            for r in rows {
                out.serialize(r)?;
            }
            out.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut w, rows).map_err(|e| Error::Format(e.to_string()))?;
            writeln!(w)?;
        }
    }
    Ok(())
}

/// Writes a single record, as a one-row table or a bare JSON object.
pub fn write_record<T: Serialize, W: Write>(row: &T, format: OutputFormat, mut w: W) -> Result<()> {
    match format {
        OutputFormat::Csv => write_table(std::slice::from_ref(row), format, w),
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut w, row).map_err(|e| Error::Format(e.to_string()))?;
            writeln!(w)?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct R {
        a: f64,
        b: &'static str,
    }

    #[test]
    fn csv_keeps_full_precision() {
        let mut out = Vec::new();
        write_table(&[R { a: 0.1 + 0.2, b: "x" }], OutputFormat::Csv, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "a,b\n0.30000000000000004,x\n");
    }

    #[test]
    fn json_array() {
        let mut out = Vec::new();
        write_table(&[R { a: 1.5, b: "y" }], OutputFormat::Json, &mut out).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
        assert_eq!(v[0]["a"], 1.5);
        let mut out = Vec::new();
        write_record(&R { a: 2.0, b: "z" }, OutputFormat::Json, &mut out).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
        assert_eq!(v["b"], "z");
    }
}
