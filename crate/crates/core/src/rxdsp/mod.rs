//! Dechirp demodulation, error scoring and the closed-form SNR/BER theory.
//!
//! Symbol timing is assumed known: there is no preamble or sync search.

mod dechirp;
mod score;
mod theory;

pub use dechirp::{
    dechirp, demodulate_samples, demodulate_stream, DechirpOutput, Dechirper,
    NO_SIGNAL_PEAK_TO_MEAN,
};
pub use score::{score, wilson_interval, write_ber_csv, BerResult, BerRow};
pub use theory::{ber_theory, effective_snr, effective_snr_default, qfunc, snr_for_ber};
