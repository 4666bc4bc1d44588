//! Square-chirp synthesis and spectral analysis.
//!
//! Symbols are chirps whose instantaneous frequency ramps from
//! `symbol * bw / 2^sf` up by `bw` over one symbol, wrapping modulo `bw`.
//! The passive node can only short or open its antenna, so the transmitted
//! envelope is the sign of the chirp phase: a binary "square chirp". On a
//! real MCU every toggle also lands on the instruction-cycle grid `4 / fosc`,
//! which is what [`quantize_toggles`] models.
//!
//! Everything here works on the post-envelope-detector baseband; the RF
//! carrier is never sampled.

mod fraction;
mod modulate;
mod params;
mod quantize;
mod spectrum;
mod waveform;

pub use fraction::{
    detection_power_fraction, detection_power_fraction_complex, DEFAULT_DETECTION_FRACTION,
    MAIN_LOBE_FRACTION,
};
pub use modulate::{
    instantaneous_frequency, modulate_analog, modulate_complex, modulate_ideal, start_frequency,
    Symbol,
};
pub use params::{
    derive_params, ChirpParams, DEFAULT_OVERSAMPLING, MAX_SF, MIN_OVERSAMPLING,
    MIN_PERIOD_CYCLES, MIN_SF, TOGGLE_CYCLES,
};
pub use quantize::{quantize_toggles, quantize_toggles_jittered, transition_indices};
pub(crate) use spectrum::argmax;
pub use spectrum::{spectrogram, spectrum, PowerSpectrum, SpectrogramFrame};
pub use waveform::{Waveform, WaveformKind, BINARY_HEADER_LEN, BINARY_MAGIC, BINARY_VERSION};

/// Modulates and, when asked, quantizes to the MCU toggle grid.
pub fn modulate_square(symbols: &[Symbol], p: &ChirpParams, quantized: bool) -> crate::Result<Waveform> {
    let w = modulate_ideal(symbols, p)?;
    if quantized {
        quantize_toggles(&w, p.fosc_hz())
    } else {
        Ok(w)
    }
}
