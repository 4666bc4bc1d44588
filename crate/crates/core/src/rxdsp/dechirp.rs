use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::sync::Arc;

use crate::chirpmod::{argmax, ChirpParams, Symbol, Waveform};
use crate::error::{Error, Result};

/// Peak-to-mean ratio at or below which a detection is flagged as noise.
pub const NO_SIGNAL_PEAK_TO_MEAN: f64 = 2.0;

/// Per-symbol demodulator output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DechirpOutput {
    pub bin_magnitudes: Vec<f64>,
    pub detected: Symbol,
    /// Largest bin over the mean bin; 0 when every bin is 0.
    pub peak_to_mean: f64,
    pub no_signal: bool,
}

/// Reusable dechirp pipeline for one parameter set.
///
/// Per symbol: remove the mean, keep the positive-frequency band `[0, bw)`
/// of the real input, which yields its analytic signal sampled once per
/// chip, multiply by the conjugate base up-chirp and take a `2^sf`-point DFT.
/// The band selection is done exactly in the frequency domain rather than
/// by averaging samples per chip: chip averaging flips the sign of the part
/// of the chirp above the wrap and drops symbols near `2^sf / 2` entirely.
#[derive(Clone)]
pub struct Dechirper {
    chips: usize,
    n: usize,
    wide: Arc<dyn Fft<f64>>,
    narrow_inv: Arc<dyn Fft<f64>>,
    narrow: Arc<dyn Fft<f64>>,
    down: Vec<Complex64>,
    buf: Vec<Complex64>,
    chip_buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl std::fmt::Debug for Dechirper {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dechirper")
            .field("chips", &self.chips)
            .field("samples_per_symbol", &self.n)
            .finish()
    }
}

impl Dechirper {
    pub fn new(p: &ChirpParams) -> Result<Self> {
        let n = p.samples_per_symbol().ok_or_else(|| {
            Error::Config(format!(
                "dechirping needs a whole number of samples per chip; fs / bw = {}",
                p.oversampling()
            ))
        })?;
        let chips = p.chips();
        let mut planner = FftPlanner::new();
        let wide = planner.plan_fft_forward(n);
        let narrow_inv = planner.plan_fft_inverse(chips);
        let narrow = planner.plan_fft_forward(chips);
        let scratch_len = wide
            .get_inplace_scratch_len()
            .max(narrow.get_inplace_scratch_len())
            .max(narrow_inv.get_inplace_scratch_len());
        let down = (0..chips)
            .map(|k| {
                let k = k as f64;
                Complex64::from_polar(1.0, -TAU * k * k / (2.0 * chips as f64))
            })
            .collect();
        Ok(Self {
            chips,
            n,
            wide,
            narrow_inv,
            narrow,
            down,
            buf: vec![Complex64::default(); n],
            chip_buf: vec![Complex64::default(); chips],
            scratch: vec![Complex64::default(); scratch_len],
        })
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.n
    }

    /// Squared bin magnitudes of one symbol window, written to
    /// `self.chip_buf`.
    fn bins(&mut self, window: &[f64]) {
        debug_assert_eq!(window.len(), self.n);
        let mean = window.iter().sum::<f64>() / self.n as f64;
        for (b, &x) in self.buf.iter_mut().zip(window) {
            *b = Complex64::new(x - mean, 0.0);
        }
        self.wide.process_with_scratch(&mut self.buf, &mut self.scratch);
        let scale = 1.0 / self.n as f64;
        for (c, &b) in self.chip_buf.iter_mut().zip(&self.buf[..self.chips]) {
            *c = b * scale;
        }
        self.narrow_inv
            .process_with_scratch(&mut self.chip_buf, &mut self.scratch);
        for (c, d) in self.chip_buf.iter_mut().zip(&self.down) {
            *c *= d;
        }
        self.narrow.process_with_scratch(&mut self.chip_buf, &mut self.scratch);
    }

    /// Full output for one window of `samples_per_symbol` samples.
    pub fn dechirp_window(&mut self, window: &[f64]) -> Result<DechirpOutput> {
        if window.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: window.len(),
            });
        }
        self.bins(window);
        let mags: Vec<f64> = self.chip_buf.iter().map(|c| c.norm()).collect();
        let best = argmax(&mags);
        let mean = mags.iter().sum::<f64>() / mags.len() as f64;
        let peak_to_mean = if mean > 0.0 { mags[best] / mean } else { 0.0 };
        Ok(DechirpOutput {
            detected: Symbol::from_raw(best as u32),
            peak_to_mean,
            no_signal: peak_to_mean <= NO_SIGNAL_PEAK_TO_MEAN,
            bin_magnitudes: mags,
        })
    }

    /// Detected symbol only, without allocating.
    pub fn detect(&mut self, window: &[f64]) -> Symbol {
        self.bins(window);
        let mut best = 0;
        let mut best_v = self.chip_buf[0].norm_sqr();
        for (i, c) in self.chip_buf.iter().enumerate().skip(1) {
            let v = c.norm_sqr();
            if v > best_v {
                best = i;
                best_v = v;
            }
        }
        Symbol::from_raw(best as u32)
    }
}

/// Dechirps symbol `symbol_index` of `signal`.
pub fn dechirp(signal: &Waveform, p: &ChirpParams, symbol_index: usize) -> Result<DechirpOutput> {
    check_rate(signal, p)?;
    let mut d = Dechirper::new(p)?;
    let n = d.samples_per_symbol();
    let start = symbol_index * n;
    let window = signal.samples().get(start..start + n).ok_or_else(|| {
        Error::Domain(format!(
            "symbol {symbol_index} ends at sample {} but the signal has {}",
            start + n,
            signal.len()
        ))
    })?;
    d.dechirp_window(window)
}

fn check_rate(signal: &Waveform, p: &ChirpParams) -> Result<()> {
    if (signal.fs_hz() - p.fs_hz()).abs() > 1e-9 * p.fs_hz() {
        return Err(Error::Config(format!(
            "signal sampled at {} Hz but parameters expect {} Hz",
            signal.fs_hz(),
            p.fs_hz()
        )));
    }
    Ok(())
}

/// Detects `n_symbols` consecutive symbols from raw samples, in parallel.
/// The result does not depend on thread scheduling.
pub fn demodulate_samples(samples: &[f64], p: &ChirpParams, n_symbols: usize) -> Result<Vec<Symbol>> {
    let d = Dechirper::new(p)?;
    let n = d.samples_per_symbol();
    let needed = n * n_symbols;
    if samples.len() < needed {
        return Err(Error::LengthMismatch {
            expected: needed,
            actual: samples.len(),
        });
    }
    Ok(samples[..needed]
        .par_chunks(n)
        .map_init(|| d.clone(), |d, w| d.detect(w))
        .collect())
}

/// Frame-level wrapper over [`dechirp`] with known symbol timing.
pub fn demodulate_stream(signal: &Waveform, p: &ChirpParams, n_symbols: usize) -> Result<Vec<Symbol>> {
    check_rate(signal, p)?;
    demodulate_samples(signal.samples(), p, n_symbols)
}
