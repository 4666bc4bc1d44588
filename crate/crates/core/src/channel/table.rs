use serde::{Deserialize, Serialize};
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

/// Measured incident power in concrete, shipped with the crate.
pub const INCIDENT_POWER_CSV: &str = include_str!("../../data/incident_power.csv");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub eirp_dbm: f64,
    pub depth_cm: f64,
    pub pr_dbm: f64,
}

/// Incident power at the embedded antenna on a full (EIRP x depth) grid.
///
/// Power must rise strictly with EIRP at every depth. It is deliberately not
/// required to fall with depth: the 13.5 cm row of the measured table sits
/// above the 10 cm row.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidentPowerTable {
    rows: Vec<PowerRow>,
    eirps: Vec<f64>,
    depths: Vec<f64>,
    /// `grid[d][e]` for depth index `d`, EIRP index `e`.
    grid: Vec<Vec<f64>>,
}

impl IncidentPowerTable {
    /// The 24-cell table measured at 915 MHz.
    pub fn measured() -> Self {
        Self::from_csv(INCIDENT_POWER_CSV.as_bytes()).expect("bundled table is valid")
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path.as_ref())?;
        Self::from_csv(f)
    }

    /// Parses `eirp_dbm,depth_cm,pr_dbm` rows.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        let expected = ["eirp_dbm", "depth_cm", "pr_dbm"];
        if headers.iter().map(str::trim).ne(expected.iter().copied()) {
            return Err(Error::Format(format!(
                "incident power header must be {}, got {:?}",
                expected.join(","),
                headers
            )));
        }
        let mut rows = Vec::new();
        for rec in r.deserialize() {
            rows.push(rec?);
        }
        Self::from_rows(rows)
    }

    pub fn from_rows(rows: Vec<PowerRow>) -> Result<Self> {
        let mut eirps: Vec<f64> = Vec::new();
        let mut depths: Vec<f64> = Vec::new();
        for r in &rows {
            if ![r.eirp_dbm, r.depth_cm, r.pr_dbm].iter().all(|v| v.is_finite()) {
                return Err(Error::Format(format!("non-finite table entry {r:?}")));
            }
            if !eirps.contains(&r.eirp_dbm) {
                eirps.push(r.eirp_dbm);
            }
            if !depths.contains(&r.depth_cm) {
                depths.push(r.depth_cm);
            }
        }
        eirps.sort_by(f64::total_cmp);
        depths.sort_by(f64::total_cmp);
        if eirps.len() < 2 || depths.len() < 2 {
            return Err(Error::Format("table needs at least two EIRPs and two depths".into()));
        }
        if rows.len() != eirps.len() * depths.len() {
            return Err(Error::Format(format!(
                "{} rows do not fill a {} x {} grid",
                rows.len(),
                eirps.len(),
                depths.len()
            )));
        }
        let mut grid = vec![vec![f64::NAN; eirps.len()]; depths.len()];
        for r in &rows {
            let d = depths.iter().position(|&x| x == r.depth_cm).expect("collected");
            let e = eirps.iter().position(|&x| x == r.eirp_dbm).expect("collected");
            if !grid[d][e].is_nan() {
                return Err(Error::Format(format!(
                    "duplicate cell at {} dBm, {} cm",
                    r.eirp_dbm, r.depth_cm
                )));
            }
            grid[d][e] = r.pr_dbm;
        }
        for (d, row) in grid.iter().enumerate() {
            if let Some(e) = row.windows(2).position(|w| w[1] <= w[0]) {
                return Err(Error::Format(format!(
                    "incident power at {} cm does not increase from {} to {} dBm EIRP",
                    depths[d],
                    eirps[e],
                    eirps[e + 1]
                )));
            }
        }
        Ok(Self {
            rows,
            eirps,
            depths,
            grid,
        })
    }

    pub fn rows(&self) -> &[PowerRow] {
        &self.rows
    }

    pub fn eirps(&self) -> &[f64] {
        &self.eirps
    }

    pub fn depths(&self) -> &[f64] {
        &self.depths
    }

    /// Exact at grid points, bilinear in (dBm, cm) between them. Requests
    /// outside the grid are errors; nothing is extrapolated.
    pub fn incident_power(&self, eirp_dbm: f64, depth_cm: f64) -> Result<f64> {
        let (e0, e1, te) = bracket(&self.eirps, eirp_dbm, "EIRP", "dBm")?;
        let (d0, d1, td) = bracket(&self.depths, depth_cm, "depth", "cm")?;
        let lo = lerp(self.grid[d0][e0], self.grid[d0][e1], te);
        let hi = lerp(self.grid[d1][e0], self.grid[d1][e1], te);
        Ok(lerp(lo, hi, td))
    }

    /// Writes the table back out in its CSV layout.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
            .map_err(|e| Error::Format(e.to_string()))
    }
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    if t == 0.0 {
        a
    } else {
        a + (b - a) * t
    }
}

/// Indices of the grid points around `x` and the fractional position between them.
fn bracket(axis: &[f64], x: f64, name: &str, unit: &str) -> Result<(usize, usize, f64)> {
    let lo = axis[0];
    let hi = axis[axis.len() - 1];
    if !(x >= lo && x <= hi) {
        return Err(Error::OutOfRange(format!(
            "{name} {x} {unit} outside the table range [{lo}, {hi}] {unit}"
        )));
    }
    if let Some(i) = axis.iter().position(|&a| a == x) {
        return Ok((i, i, 0.0));
    }
    let i = axis.partition_point(|&a| a < x);
    Ok((i - 1, i, (x - axis[i - 1]) / (axis[i] - axis[i - 1])))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measured_table_shape() {
        let t = IncidentPowerTable::measured();
        assert_eq!(t.rows().len(), 24);
        assert_eq!(t.depths(), &[3.5, 6.0, 10.0, 13.5]);
        assert_eq!(t.eirps(), &[9.7, 13.9, 17.8, 23.6, 30.7, 36.0]);
    }

    #[test]
    fn grid_cells_exact() {
        let t = IncidentPowerTable::measured();
        assert_eq!(t.incident_power(36.0, 3.5).unwrap(), 11.4);
        assert_eq!(t.incident_power(23.6, 13.5).unwrap(), -7.3);
        assert_eq!(t.incident_power(30.7, 6.0).unwrap(), 2.5);
        for r in t.rows() {
            assert_eq!(t.incident_power(r.eirp_dbm, r.depth_cm).unwrap(), r.pr_dbm);
        }
    }

    #[test]
    fn depth_anomaly_is_kept() {
        let t = IncidentPowerTable::measured();
        for &e in t.eirps() {
            assert!(t.incident_power(e, 13.5).unwrap() > t.incident_power(e, 10.0).unwrap());
        }
    }

    #[test]
    fn bilinear_midpoints() {
        let t = IncidentPowerTable::measured();
        let mid = t.incident_power((17.8 + 23.6) / 2.0, 13.5).unwrap();
        assert!((mid - (-14.2 - 7.3) / 2.0).abs() < 1e-12);
        let centre = t.incident_power((30.7 + 36.0) / 2.0, 8.0).unwrap();
        let expected = (2.5 + 8.2 - 2.3 + 3.2) / 4.0;
        assert!((centre - expected).abs() < 1e-12);
    }

    #[test]
    fn no_extrapolation() {
        let t = IncidentPowerTable::measured();
        assert!(matches!(t.incident_power(36.1, 3.5), Err(Error::OutOfRange(_))));
        assert!(matches!(t.incident_power(2.5, 3.5), Err(Error::OutOfRange(_))));
        assert!(matches!(t.incident_power(20.0, 15.0), Err(Error::OutOfRange(_))));
        assert!(t.incident_power(f64::NAN, 6.0).is_err());
    }

    #[test]
    fn rejects_non_monotone_eirp() {
        let mut rows = IncidentPowerTable::measured().rows().to_vec();
        rows[1].pr_dbm = -20.0;
        assert!(matches!(IncidentPowerTable::from_rows(rows), Err(Error::Format(_))));
    }

    #[test]
    fn rejects_missing_cell() {
        let mut rows = IncidentPowerTable::measured().rows().to_vec();
        rows.pop();
        assert!(IncidentPowerTable::from_rows(rows).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let t = IncidentPowerTable::measured();
        let back = IncidentPowerTable::from_csv(t.to_csv().unwrap().as_bytes()).unwrap();
        assert_eq!(back, t);
    }
}
