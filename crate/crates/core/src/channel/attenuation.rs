use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Moisture state of the concrete.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Moisture {
    Dry,
    Wet,
}

/// Analytic path loss in concrete: a fixed air/concrete interface loss plus a
/// per-centimetre attenuation that depends on moisture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttenuationModel {
    pub alpha_dry_db_per_cm: f64,
    pub alpha_wet_db_per_cm: f64,
    pub interface_loss_db: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
}

impl Default for AttenuationModel {
    fn default() -> Self {
        Self {
            alpha_dry_db_per_cm: 2.2,
            alpha_wet_db_per_cm: 3.0,
            interface_loss_db: 11.0,
            tx_gain_dbi: 8.0,
            rx_gain_dbi: 0.0,
        }
    }
}

impl AttenuationModel {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.alpha_dry_db_per_cm > 0.0 && self.alpha_dry_db_per_cm.is_finite()) {
            problems.push(format!("alpha_dry_db_per_cm must be > 0, got {}", self.alpha_dry_db_per_cm));
        }
        if !(self.alpha_wet_db_per_cm > 0.0 && self.alpha_wet_db_per_cm.is_finite()) {
            problems.push(format!("alpha_wet_db_per_cm must be > 0, got {}", self.alpha_wet_db_per_cm));
        }
        if !(self.interface_loss_db >= 0.0 && self.interface_loss_db.is_finite()) {
            problems.push(format!("interface_loss_db must be >= 0, got {}", self.interface_loss_db));
        }
        if !self.tx_gain_dbi.is_finite() || !self.rx_gain_dbi.is_finite() {
            problems.push("antenna gains must be finite".into());
        }
        match problems.len() {
            0 => Ok(()),
            1 => Err(Error::Config(problems.remove(0))),
            _ => Err(Error::ConfigProblems(problems)),
        }
    }

    pub fn alpha_db_per_cm(&self, moisture: Moisture) -> f64 {
        match moisture {
            Moisture::Dry => self.alpha_dry_db_per_cm,
            Moisture::Wet => self.alpha_wet_db_per_cm,
        }
    }

    /// Loss from the concrete surface down to `depth_cm`:
    /// `interface_loss + alpha * depth`.
    pub fn propagation_loss(&self, depth_cm: f64, moisture: Moisture) -> Result<f64> {
        if !(depth_cm >= 0.0 && depth_cm.is_finite()) {
            return Err(Error::Domain(format!("depth must be >= 0 cm, got {depth_cm}")));
        }
        Ok(self.interface_loss_db + self.alpha_db_per_cm(moisture) * depth_cm)
    }

    /// Incident power predicted by the analytic model for a transmitter of
    /// the given EIRP placed on the surface. The EIRP already includes the
    /// transmit antenna gain; only the receive gain is added here.
    pub fn incident_power_dbm(&self, eirp_dbm: f64, depth_cm: f64, moisture: Moisture) -> Result<f64> {
        Ok(eirp_dbm - self.propagation_loss(depth_cm, moisture)? + self.rx_gain_dbi)
    }
}

/// Relative permittivity from the resonant shift of an antenna moved from
/// air into a dielectric, taking `mu_r = 1`: `(f_air / f_embedded)^2`.
pub fn permittivity_from_shift(f_air_hz: f64, f_embedded_hz: f64) -> Result<f64> {
    if !(f_air_hz > 0.0 && f_embedded_hz > 0.0) || !f_air_hz.is_finite() || !f_embedded_hz.is_finite() {
        return Err(Error::Domain(format!(
            "frequencies must be positive, got {f_air_hz} and {f_embedded_hz} Hz"
        )));
    }
    if f_embedded_hz > f_air_hz {
        return Err(Error::Domain(format!(
            "embedded resonance {f_embedded_hz} Hz is above the air resonance {f_air_hz} Hz"
        )));
    }
    let r = f_air_hz / f_embedded_hz;
    Ok(r * r)
}

/// Resonance of an antenna with air resonance `f_air_hz` once embedded in a
/// medium of relative permittivity `eps_r`.
pub fn resonant_shift(f_air_hz: f64, eps_r: f64) -> Result<f64> {
    if !(f_air_hz > 0.0 && f_air_hz.is_finite()) {
        return Err(Error::Domain(format!("frequency must be positive, got {f_air_hz} Hz")));
    }
    if !(eps_r >= 1.0 && eps_r.is_finite()) {
        return Err(Error::Domain(format!("relative permittivity must be >= 1, got {eps_r}")));
    }
    Ok(f_air_hz / eps_r.sqrt())
}
