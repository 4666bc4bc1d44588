use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::params::ChirpParams;
use super::waveform::{Waveform, WaveformKind};
use crate::error::{Error, Result};

/// One chirp symbol, a value in `[0, 2^sf)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Symbol(u32);

impl Symbol {
    pub fn new(value: u32, sf: u32) -> Result<Self> {
        if sf >= 32 || value >= (1u32 << sf) {
            return Err(Error::Domain(format!(
                "symbol {value} does not fit in {sf} bits"
            )));
        }
        Ok(Symbol(value))
    }

    pub(crate) fn from_raw(value: u32) -> Self {
        Symbol(value)
    }

    pub fn value(self) -> u32 {
        self.0
    }
}

/// Start frequency of a symbol: `symbol * bw / 2^sf`.
pub fn start_frequency(symbol: Symbol, p: &ChirpParams) -> f64 {
    symbol.value() as f64 * p.bw_hz() / p.chips() as f64
}

/// Instantaneous frequency at time `t_s` into the symbol window.
///
/// The ramp climbs at `bw / ds` from the start frequency and wraps modulo `bw`.
pub fn instantaneous_frequency(symbol: Symbol, t_s: f64, p: &ChirpParams) -> Result<f64> {
    check_symbol(symbol, p)?;
    if !(0.0..p.ds_s()).contains(&t_s) {
        return Err(Error::Domain(format!(
            "t = {t_s} s outside the symbol window [0, {})",
            p.ds_s()
        )));
    }
    let f = start_frequency(symbol, p) + p.bw_hz() * t_s / p.ds_s();
    Ok(f.rem_euclid(p.bw_hz()))
}

/// Cycles accumulated since the start of the symbol at chip position
/// `x = bw * t`, `x` in `[0, 2^sf]`.
pub(crate) fn symbol_cycles(symbol: u32, x: f64, chips: usize) -> f64 {
    let m = chips as f64;
    let s = symbol as f64;
    let wrap = (x - (m - s)).max(0.0);
    (s * x + 0.5 * x * x) / m - wrap
}

/// Phase of every sample in a symbol stream as a fraction of a cycle in
/// `[0, 1)`.
///
/// A symbol always completes exactly `2^sf / 2` cycles, so accumulating phase
/// across symbols is equivalent to starting each symbol at phase zero.
/// When `fs / bw` is an integer the phase is computed in exact integer
/// arithmetic so toggle decisions do not depend on rounding.
fn phase_fractions(symbols: &[Symbol], p: &ChirpParams) -> Vec<f64> {
    let chips = p.chips();
    match crate::util::as_integer(p.oversampling()) {
        Some(m) => {
            let m = m as i64;
            let big_m = chips as i64;
            let per_symbol = (m * big_m) as usize;
            let denom = 2 * m * m * big_m;
            let mut out = Vec::with_capacity(per_symbol * symbols.len());
            for sym in symbols {
                let s = sym.value() as i64;
                let wrap_at = m * (big_m - s);
                for n in 0..per_symbol as i64 {
                    let num = 2 * s * n * m + n * n - 2 * m * big_m * (n - wrap_at).max(0);
                    out.push(num.rem_euclid(denom) as f64 / denom as f64);
                }
            }
            out
        }
        None => {
            let ds = p.ds_s();
            let total = (symbols.len() as f64 * ds * p.fs_hz()).round() as usize;
            let chips_per_sample = p.bw_hz() / p.fs_hz();
            (0..total)
                .map(|n| {
                    let t = n as f64 / p.fs_hz();
                    let j = ((t / ds).floor() as usize).min(symbols.len() - 1);
                    let x = n as f64 * chips_per_sample - (j * chips) as f64;
                    symbol_cycles(symbols[j].value(), x.max(0.0), chips).rem_euclid(1.0)
                })
                .collect()
        }
    }
}

fn check_symbol(symbol: Symbol, p: &ChirpParams) -> Result<()> {
    if (symbol.value() as usize) < p.chips() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "symbol {} does not fit in sf = {}",
            symbol.value(),
            p.sf()
        )))
    }
}

fn check_stream(symbols: &[Symbol], p: &ChirpParams) -> Result<()> {
    if symbols.is_empty() {
        return Err(Error::Domain("symbol sequence is empty".into()));
    }
    symbols.iter().try_for_each(|&s| check_symbol(s, p))
}

/// Ideal square chirp: the antenna is open (1) during the first half of
/// every carrier cycle and shorted (0) during the second half. Toggle
/// instants fall wherever the phase says, not on any clock grid.
pub fn modulate_ideal(symbols: &[Symbol], p: &ChirpParams) -> Result<Waveform> {
    check_stream(symbols, p)?;
    let samples = phase_fractions(symbols, p)
        .into_iter()
        .map(|f| if f < 0.5 { 1.0 } else { 0.0 })
        .collect();
    Ok(Waveform::from_parts_unchecked(
        samples,
        p.fs_hz(),
        WaveformKind::BinaryEnvelope,
    ))
}

/// Continuous-amplitude real chirp `cos(phase)` with unit amplitude.
pub fn modulate_analog(symbols: &[Symbol], p: &ChirpParams) -> Result<Waveform> {
    check_stream(symbols, p)?;
    let samples = phase_fractions(symbols, p)
        .into_iter()
        .map(|f| (TAU * f).cos())
        .collect();
    Ok(Waveform::from_parts_unchecked(
        samples,
        p.fs_hz(),
        WaveformKind::Analog,
    ))
}

/// Complex linear chirp `exp(j phase)` with unit amplitude.
pub fn modulate_complex(symbols: &[Symbol], p: &ChirpParams) -> Result<Vec<Complex64>> {
    check_stream(symbols, p)?;
    Ok(phase_fractions(symbols, p)
        .into_iter()
        .map(|f| Complex64::from_polar(1.0, TAU * f))
        .collect())
}
