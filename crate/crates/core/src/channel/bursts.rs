use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::chirpmod::{Waveform, WaveformKind};
use crate::error::{Error, Result};

/// Two V-shaped dips: 1, -1, 1, -1, 1 spread evenly over the burst.
pub const W_TEMPLATE: [f64; 5] = [1.0, -1.0, 1.0, -1.0, 1.0];

/// Random W-shaped interference bursts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WBurstModel {
    /// Mean time between burst onsets.
    pub mean_interval_s: f64,
    pub duration_s: f64,
    /// Template peak relative to the RMS of the signal the bursts land on.
    pub amplitude_scale: f64,
    pub seed: u64,
    /// Envelope knots spread evenly from burst start to burst end and
    /// joined linearly.
    pub template: Vec<f64>,
}

impl Default for WBurstModel {
    fn default() -> Self {
        Self {
            mean_interval_s: 0.5,
            duration_s: 0.003,
            amplitude_scale: 30.0,
            seed: 0,
            template: W_TEMPLATE.to_vec(),
        }
    }
}

/// One logged burst.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Burst {
    pub start_s: f64,
    pub duration_s: f64,
}

impl Burst {
    pub fn end_s(&self) -> f64 {
        self.start_s + self.duration_s
    }

    pub fn overlaps(&self, t0: f64, t1: f64) -> bool {
        self.start_s < t1 && self.end_s() > t0
    }
}

impl WBurstModel {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            problems.push(format!("burst duration must be > 0 s, got {}", self.duration_s));
        }
        if !(self.mean_interval_s.is_finite() && self.mean_interval_s > self.duration_s) {
            problems.push(format!(
                "burst mean interval {} s must exceed the burst duration {} s",
                self.mean_interval_s, self.duration_s
            ));
        }
        if !(self.amplitude_scale >= 0.0 && self.amplitude_scale.is_finite()) {
            problems.push(format!("burst amplitude scale must be >= 0, got {}", self.amplitude_scale));
        }
        if self.template.len() < 2 || self.template.iter().any(|v| !v.is_finite()) {
            problems.push("burst template needs at least two finite knots".into());
        }
        match problems.len() {
            0 => Ok(()),
            1 => Err(Error::Config(problems.remove(0))),
            _ => Err(Error::ConfigProblems(problems)),
        }
    }

    /// Template value at fraction `u` in `[0, 1]` of the burst.
    pub fn envelope(&self, u: f64) -> f64 {
        let k = self.template.len() - 1;
        let pos = u.clamp(0.0, 1.0) * k as f64;
        let i = (pos.floor() as usize).min(k - 1);
        let f = pos - i as f64;
        self.template[i] + (self.template[i + 1] - self.template[i]) * f
    }

    /// Poisson onsets on `(t0 - duration, t1)`, so every burst touches
    /// `[t0, t1)`.
    pub fn draw<R: Rng>(&self, t0: f64, t1: f64, rng: &mut R) -> Vec<Burst> {
        let exp = Exp::new(1.0 / self.mean_interval_s).expect("validated interval");
        let mut out = Vec::new();
        let mut t = t0 - self.duration_s;
        loop {
            t += exp.sample(rng);
            if t >= t1 {
                break;
            }
            out.push(Burst {
                start_s: t,
                duration_s: self.duration_s,
            });
        }
        out
    }

    /// Adds bursts of peak `peak` to samples whose first sample sits at time
    /// `t0`.
    pub fn render(&self, samples: &mut [f64], fs_hz: f64, t0: f64, bursts: &[Burst], peak: f64) {
        if peak == 0.0 {
            return;
        }
        let n = samples.len();
        for b in bursts {
            let first = ((b.start_s - t0) * fs_hz).ceil().max(0.0) as usize;
            let last = (((b.end_s() - t0) * fs_hz).ceil().max(0.0) as usize).min(n);
            for (i, x) in samples.iter_mut().enumerate().take(last).skip(first) {
                let t = t0 + i as f64 / fs_hz;
                *x += peak * self.envelope((t - b.start_s) / b.duration_s);
            }
        }
    }
}

/// Adds random W bursts to `w`, scaled by its AC RMS, and returns the exact
/// burst log.
pub fn inject_w_bursts(w: &Waveform, m: &WBurstModel) -> Result<(Waveform, Vec<Burst>)> {
    m.validate()?;
    if w.is_empty() {
        return Err(Error::Domain("cannot inject bursts into an empty waveform".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(m.seed);
    let bursts = m.draw(0.0, w.duration_s(), &mut rng);
    let mut samples = w.samples().to_vec();
    m.render(&mut samples, w.fs_hz(), 0.0, &bursts, m.amplitude_scale * w.ac_rms());
    Ok((
        Waveform::from_parts_unchecked(samples, w.fs_hz(), WaveformKind::Analog),
        bursts,
    ))
}

/// Symbol error rate caused by bursts alone: a burst lasting `Dw` wipes out
/// `ceil(Dw / Ds)` symbols and starts in a given symbol slot with
/// probability `Ds / Tw`, so `E = ceil(Dw / Ds) * Ds / Tw`, capped at 1.
pub fn interference_symbol_error_rate(ds_s: f64, m: &WBurstModel) -> Result<f64> {
    if !(ds_s > 0.0 && ds_s.is_finite()) || !(m.duration_s > 0.0) || !(m.mean_interval_s > 0.0) {
        return Err(Error::Domain(format!(
            "durations must be positive (Ds = {ds_s}, Dw = {}, Tw = {})",
            m.duration_s, m.mean_interval_s
        )));
    }
    let hit = (m.duration_s / ds_s).ceil();
    Ok((hit * ds_s / m.mean_interval_s).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> WBurstModel {
        WBurstModel {
            seed: 9,
            ..Default::default()
        }
    }

    #[test]
    fn closed_form_examples() {
        let m = WBurstModel::default();
        assert!((interference_symbol_error_rate(0.031, &m).unwrap() - 6.2e-2).abs() < 1e-12);
        let e = interference_symbol_error_rate(1.03e-3, &m).unwrap();
        assert!((e - 6.18e-3).abs() < 1e-12, "{e}");
        let e = interference_symbol_error_rate(0.26e-3, &m).unwrap();
        assert!((e - 6.24e-3).abs() < 1e-12, "{e}");
        assert!(interference_symbol_error_rate(0.0, &m).is_err());
        let heavy = WBurstModel {
            mean_interval_s: 0.004,
            ..m
        };
        assert_eq!(interference_symbol_error_rate(0.031, &heavy).unwrap(), 1.0);
    }

    #[test]
    fn envelope_shape() {
        let m = WBurstModel::default();
        assert_eq!(m.envelope(0.0), 1.0);
        assert_eq!(m.envelope(0.25), -1.0);
        assert_eq!(m.envelope(0.5), 1.0);
        assert_eq!(m.envelope(0.75), -1.0);
        assert_eq!(m.envelope(1.0), 1.0);
        assert!(m.envelope(0.125).abs() < 1e-12);
    }

    #[test]
    fn zero_amplitude_leaves_signal_but_logs() {
        let m = WBurstModel {
            amplitude_scale: 0.0,
            ..model()
        };
        let w = Waveform::analog((0..20_000).map(|i| (i % 7) as f64).collect(), 1000.0).unwrap();
        let (out, log) = inject_w_bursts(&w, &m).unwrap();
        assert_eq!(out.samples(), w.samples());
        assert!(!log.is_empty());
    }

    #[test]
    fn bursts_overlap_span_and_change_signal() {
        let m = model();
        let w = Waveform::analog((0..20_000).map(|i| (i % 2) as f64).collect(), 1000.0).unwrap();
        let (out, log) = inject_w_bursts(&w, &m).unwrap();
        assert!(log.iter().all(|b| b.overlaps(0.0, w.duration_s())));
        assert!(log.windows(2).all(|p| p[1].start_s > p[0].start_s));
        assert_ne!(out.samples(), w.samples());
        // Outside every burst the signal is untouched.
        for (i, (a, b)) in out.samples().iter().zip(w.samples()).enumerate() {
            let t = i as f64 / 1000.0;
            if !log.iter().any(|bu| t >= bu.start_s && t < bu.end_s()) {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn poisson_count_over_100_s() {
        let m = model();
        let sigma = 200f64.sqrt();
        let mut total = 0usize;
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = m.draw(0.0, 100.0, &mut rng).len();
            assert!((n as f64 - 200.0).abs() < 4.0 * sigma, "seed {seed}: {n}");
            total += n;
        }
        // The 20-run mean has sigma sqrt(200 / 20).
        let mean = total as f64 / 20.0;
        assert!((mean - 200.0).abs() < 3.0 * (10f64).sqrt(), "{mean}");
    }

    #[test]
    fn validation() {
        let bad = WBurstModel {
            duration_s: 1.0,
            amplitude_scale: -1.0,
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(Error::ConfigProblems(p)) if p.len() == 2));
    }
}
