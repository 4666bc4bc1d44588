//! Reproducible experiments: TOML configuration, BER and charge sweeps,
//! composite-gain calibration, closed-form reports and table output.
//!
//! A BER sweep maps each axis value to incident power (measured table or
//! path-loss model), applies the composite gain to get received power and
//! runs the Monte-Carlo chain. Row `i` is seeded with `base_seed + i`, and
//! within a row every block of symbols has its own RNG stream, so results do
//! not depend on thread count.

mod calibrate;
mod config;
mod energy;
mod link;
mod output;
mod sweep;
mod theory;

pub use calibrate::{calibrate_composite_gain, Calibration, GAIN_TOLERANCE_DB};
pub use config::{
    CalibrationConfig, ChannelConfig, ChirpConfig, ExperimentConfig, IncidentSource, PowerConfig, SweepAxis,
    SweepConfig,
};
pub use energy::{node_for, run_active_trace, run_charge_sweep, ChargeRow, CHARGE_VARIANTS};
pub use link::{random_symbols, ChirpShape, LinkSpec, BLOCK_SYMBOLS};
pub use output::{write_record, write_table, OutputFormat};
pub use sweep::{incident_power_for, link_spec, operating_point, run_ber_sweep, trial_seed, OperatingPoint, SweepRow};
pub use theory::{
    format_bw, format_ds, format_rd, rate_table, snr_db_at, run_theory_report, RateRow, TheoryRow, TABLE_CLOCKS_HZ,
};
