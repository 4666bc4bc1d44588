use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::chirpmod::{Waveform, WaveformKind};
use crate::error::{Error, Result};

/// Default one-sided noise density at the reader, W/Hz.
pub const DEFAULT_N0_W_PER_HZ: f64 = 4e-21;

/// White Gaussian receiver noise.
///
/// Samples are real baseband: a one-sided density `n0` over a sampling
/// bandwidth of `fs / 2` gives a per-sample variance of `n0 * fs / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    pub n0_w_per_hz: f64,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            n0_w_per_hz: DEFAULT_N0_W_PER_HZ,
            seed: 0,
        }
    }
}

impl NoiseModel {
    pub fn new(n0_w_per_hz: f64, seed: u64) -> Result<Self> {
        let m = Self { n0_w_per_hz, seed };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n0_w_per_hz >= 0.0 && self.n0_w_per_hz.is_finite() {
            Ok(())
        } else {
            Err(Error::Config(format!("n0 must be >= 0 W/Hz, got {}", self.n0_w_per_hz)))
        }
    }

    /// Per-sample standard deviation at sample rate `fs_hz`.
    pub fn sigma(&self, fs_hz: f64) -> f64 {
        (self.n0_w_per_hz * fs_hz / 2.0).sqrt()
    }
}

/// Scales amplitudes by `10^(gain_db / 20)`. The result is always analog.
pub fn apply_gain(w: &Waveform, gain_db: f64) -> Waveform {
    let k = 10f64.powf(gain_db / 20.0);
    let samples = w.samples().iter().map(|x| x * k).collect();
    Waveform::from_parts_unchecked(samples, w.fs_hz(), WaveformKind::Analog)
}

pub(crate) fn add_noise_in_place(samples: &mut [f64], sigma: f64, rng: &mut ChaCha8Rng) {
    if sigma == 0.0 {
        return;
    }
    for x in samples {
        let z: f64 = StandardNormal.sample(rng);
        *x += sigma * z;
    }
}

/// Adds white Gaussian noise of variance `n0 * fs / 2` per sample,
/// reproducibly from the model's seed.
pub fn add_awgn(w: &Waveform, n: &NoiseModel) -> Result<Waveform> {
    n.validate()?;
    let mut samples = w.samples().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(n.seed);
    add_noise_in_place(&mut samples, n.sigma(w.fs_hz()), &mut rng);
    Ok(Waveform::from_parts_unchecked(samples, w.fs_hz(), WaveformKind::Analog))
}
