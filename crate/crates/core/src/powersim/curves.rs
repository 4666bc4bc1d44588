use std::io::{Read, Write};

use crate::error::{Error, Result};

#[derive(serde::Serialize, serde::Deserialize)]
struct Xy {
    x: f64,
    y: f64,
}

/// Reads `x,y` pairs with a header row.
pub fn read_xy_csv<R: Read>(reader: R) -> Result<Vec<(f64, f64)>> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?;
    if headers.len() != 2 || headers[0].trim() != "x" || headers[1].trim() != "y" {
        return Err(Error::Format(format!("curve header must be x,y, got {headers:?}")));
    }
    let mut out = Vec::new();
    for rec in r.deserialize::<Xy>() {
        let p = rec?;
        if !p.x.is_finite() || !p.y.is_finite() {
            return Err(Error::Format(format!("non-finite curve point ({}, {})", p.x, p.y)));
        }
        out.push((p.x, p.y));
    }
    Ok(out)
}

pub fn write_xy_csv<W: Write>(points: &[(f64, f64)], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for &(x, y) in points {
        w.serialize(Xy { x, y })?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn check_sorted(points: &[(f64, f64)], what: &str) -> Result<()> {
    if points.is_empty() {
        return Err(Error::Config(format!("{what} has no points")));
    }
    if points.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Config(format!("{what} x values must strictly increase")));
    }
    Ok(())
}
