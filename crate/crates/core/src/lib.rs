//! Physical-layer and energy simulator for RF-powered sensor nodes embedded
//! in concrete.
//!
//! The crate is split the same way the signal and energy flow through a
//! deployed node:
//!
//! - [`chirpmod`] builds square-chirp backscatter waveforms, including the
//!   clock-quantized toggling a low-power MCU actually produces.
//! - [`channel`] maps transmitter EIRP to incident power in concrete and adds
//!   receiver noise and the W-shaped interference bursts.
//! - [`rxdsp`] demodulates by dechirping and holds the closed-form SNR/BER
//!   theory the Monte-Carlo results are compared against.
//! - [`powersim`] integrates the harvest/charge/transmit life of active and
//!   passive nodes.
//! - [`harness`] wires everything into reproducible parameter sweeps.

// Range checks are written `!(x > 0.0)` so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod chirpmod;
pub mod error;
pub mod harness;
pub mod powersim;
pub mod rxdsp;
pub mod util;

pub use channel::{AttenuationModel, IncidentPowerTable, Moisture, NoiseModel, WBurstModel};
pub use chirpmod::{ChirpParams, PowerSpectrum, Symbol, Waveform, WaveformKind};
pub use error::{Error, Result};
pub use powersim::{
    ActiveNodeConfig, Capacitor, ChargeTime, HarvesterModel, LeakageCurve, LeakageVariant,
    PassiveNodeModel, SimTrace,
};
pub use rxdsp::{BerResult, DechirpOutput};
