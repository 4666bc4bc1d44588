use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::waveform::Waveform;
use crate::error::{Error, Result};

/// One-sided periodogram. `psd[k]` is the power in the bin centred on
/// `freqs_hz[k]`; the bins sum to the mean-square value of the input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSpectrum {
    pub freqs_hz: Vec<f64>,
    pub psd: Vec<f64>,
    pub total_power: f64,
}

impl PowerSpectrum {
    /// Index of the largest bin, lowest index on ties.
    pub fn peak_bin(&self) -> usize {
        argmax(&self.psd)
    }

    /// Power in the bin nearest to `f_hz`.
    pub fn power_near(&self, f_hz: f64) -> f64 {
        let df = self.freqs_hz.get(1).copied().unwrap_or(1.0) - self.freqs_hz[0];
        let k = (f_hz / df).round() as usize;
        self.psd.get(k).copied().unwrap_or(0.0)
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn one_sided(samples: &[f64], window: Option<&[f64]>, fs_hz: f64) -> (Vec<f64>, Vec<f64>) {
    let n = samples.len();
    let mut buf: Vec<Complex64> = match window {
        Some(w) => samples
            .iter()
            .zip(w)
            .map(|(x, w)| Complex64::new(x * w, 0.0))
            .collect(),
        None => samples.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
    };
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let norm = match window {
        Some(w) => n as f64 * w.iter().map(|x| x * x).sum::<f64>(),
        None => (n * n) as f64,
    };
    let half = n / 2;
    let mut psd = Vec::with_capacity(half + 1);
    for (k, x) in buf.iter().take(half + 1).enumerate() {
        let p = x.norm_sqr() / norm;
        let mirrored = k != 0 && !(n & 1 == 0 && k == half);
        psd.push(if mirrored { 2.0 * p } else { p });
    }
    let freqs = (0..=half).map(|k| k as f64 * fs_hz / n as f64).collect();
    (freqs, psd)
}

/// Discrete Fourier power estimate of the whole waveform (rectangular
/// window, no mean removal; apply [`Waveform::remove_mean`] first for the
/// AC spectrum).
pub fn spectrum(w: &Waveform) -> Result<PowerSpectrum> {
    if w.is_empty() {
        return Err(Error::Domain("cannot take the spectrum of an empty waveform".into()));
    }
    let (freqs_hz, psd) = one_sided(w.samples(), None, w.fs_hz());
    let total_power = psd.iter().sum();
    Ok(PowerSpectrum {
        freqs_hz,
        psd,
        total_power,
    })
}

/// A short-time spectrum frame.
#[derive(Debug, Clone)]
pub struct SpectrogramFrame {
    pub t_center_s: f64,
    pub spectrum: PowerSpectrum,
}

/// Hann-windowed short-time spectra of `window` samples every `hop` samples.
pub fn spectrogram(w: &Waveform, window: usize, hop: usize) -> Result<Vec<SpectrogramFrame>> {
    if window < 2 || hop == 0 || window > w.len() {
        return Err(Error::Domain(format!(
            "window {window} / hop {hop} invalid for {} samples",
            w.len()
        )));
    }
    let hann: Vec<f64> = (0..window)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / window as f64).cos())
        .collect();
    let mut frames = Vec::new();
    let mut start = 0;
    while start + window <= w.len() {
        let seg = &w.samples()[start..start + window];
        let mean = seg.iter().sum::<f64>() / window as f64;
        let centred: Vec<f64> = seg.iter().map(|x| x - mean).collect();
        let (freqs_hz, psd) = one_sided(&centred, Some(&hann), w.fs_hz());
        let total_power = psd.iter().sum();
        frames.push(SpectrogramFrame {
            t_center_s: (start as f64 + window as f64 / 2.0) / w.fs_hz(),
            spectrum: PowerSpectrum {
                freqs_hz,
                psd,
                total_power,
            },
        });
        start += hop;
    }
    Ok(frames)
}
