use num_complex::Complex64;
use std::f64::consts::TAU;

use super::modulate::Symbol;
use super::params::ChirpParams;
use super::waveform::Waveform;
use crate::error::{Error, Result};

/// Share of square-chirp power the linear down-chirp detector collects, used
/// in the effective-SNR relation `SNR = 0.712 * Ps / (Bw * N0)`.
///
/// Kept as a configuration default rather than derived:
/// [`detection_power_fraction`] measures this simulator's own value.
pub const DEFAULT_DETECTION_FRACTION: f64 = 0.712;

/// Main-lobe share of instantaneous square-chirp power; half of
/// [`DEFAULT_DETECTION_FRACTION`], one sideband of the two.
pub const MAIN_LOBE_FRACTION: f64 = 0.356;

/// Measured fraction of mean-removed signal power that lands in the
/// detection bin after dechirping against the ideal linear chirp.
///
/// The waveform is sampled at chip instants, multiplied by the conjugate
/// base chirp and transformed; the fraction is the power in each symbol's
/// own bin divided by the total dechirped power, pooled over all symbols.
/// An ideal complex chirp scores exactly 1 and white noise about `2^-sf`.
pub fn detection_power_fraction(w: &Waveform, p: &ChirpParams, symbols: &[Symbol]) -> Result<f64> {
    let per_symbol = p.ds_s() * w.fs_hz();
    let mut samples: Vec<Complex64> = w.samples().iter().map(|&x| Complex64::new(x, 0.0)).collect();
    for j in 0..symbols.len() {
        let start = ((j as f64 * per_symbol).round() as usize).min(samples.len());
        let end = (((j + 1) as f64 * per_symbol).round() as usize).min(samples.len());
        let block = &mut samples[start..end];
        if block.is_empty() {
            break;
        }
        let mean = block.iter().sum::<Complex64>() / block.len() as f64;
        block.iter_mut().for_each(|x| *x -= mean);
    }
    detection_power_fraction_complex(&samples, w.fs_hz(), p, symbols)
}

/// Complex-input form of [`detection_power_fraction`]. No mean is removed.
pub fn detection_power_fraction_complex(
    samples: &[Complex64],
    fs_hz: f64,
    p: &ChirpParams,
    symbols: &[Symbol],
) -> Result<f64> {
    if symbols.is_empty() {
        return Err(Error::Domain("no symbols given".into()));
    }
    let chips = p.chips();
    let per_symbol = p.ds_s() * fs_hz;
    let needed = (symbols.len() as f64 * per_symbol).round() as usize;
    if samples.len() < needed {
        return Err(Error::LengthMismatch {
            expected: needed,
            actual: samples.len(),
        });
    }
    let samples_per_chip = fs_hz / p.bw_hz();
    let down: Vec<Complex64> = (0..chips)
        .map(|k| {
            let k = k as f64;
            Complex64::from_polar(1.0, -TAU * k * k / (2.0 * chips as f64))
        })
        .collect();

    let mut bin_power = 0.0;
    let mut total_power = 0.0;
    for (j, sym) in symbols.iter().enumerate() {
        let start = (j as f64 * per_symbol).round() as usize;
        let end = ((j + 1) as f64 * per_symbol).round() as usize;
        let s = sym.value() as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, d) in down.iter().enumerate() {
            let n = (start + (k as f64 * samples_per_chip).round() as usize).min(end - 1);
            let y = samples[n];
            total_power += y.norm_sqr();
            acc += y * d * Complex64::from_polar(1.0, -TAU * s * k as f64 / chips as f64);
        }
        bin_power += acc.norm_sqr();
    }
    if total_power == 0.0 {
        return Ok(0.0);
    }
    Ok(bin_power / (chips as f64 * total_power))
}
