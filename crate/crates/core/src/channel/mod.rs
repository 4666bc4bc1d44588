//! Transport between the surface transmitter and the embedded node.
//!
//! Incident power comes from the measured lookup table; the analytic
//! attenuation model is there for what-if studies (moisture, depths off the
//! table). The reverse link is modeled as a single composite gain followed by
//! white noise and the W-shaped interference bursts seen at the reader.

mod attenuation;
mod bursts;
mod noise;
mod table;

pub use attenuation::{permittivity_from_shift, resonant_shift, AttenuationModel, Moisture};
pub use bursts::{inject_w_bursts, interference_symbol_error_rate, Burst, WBurstModel, W_TEMPLATE};
pub(crate) use noise::add_noise_in_place;
pub use noise::{add_awgn, apply_gain, NoiseModel, DEFAULT_N0_W_PER_HZ};
pub use table::{IncidentPowerTable, PowerRow, INCIDENT_POWER_CSV};

/// Incident power for `eirp_dbm` at `depth_cm` from `table`.
pub fn incident_power(eirp_dbm: f64, depth_cm: f64, table: &IncidentPowerTable) -> crate::Result<f64> {
    table.incident_power(eirp_dbm, depth_cm)
}
