use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{add_noise_in_place, WBurstModel};
use crate::chirpmod::{modulate_analog, modulate_square, ChirpParams, Symbol};
use crate::error::{Error, Result};
use crate::rxdsp::{BerResult, Dechirper};

/// Symbols per independently seeded block of the Monte-Carlo chain.
pub const BLOCK_SYMBOLS: usize = 256;

/// Transmitted waveform family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChirpShape {
    /// Continuous-amplitude `cos` chirp.
    Analog,
    /// Binary envelope with ideal toggle instants.
    Square,
    /// Binary envelope with toggles on the MCU instruction grid.
    QuantizedSquare,
}

impl ChirpShape {
    pub fn is_square(self) -> bool {
        !matches!(self, ChirpShape::Analog)
    }
}

/// One Monte-Carlo point of the modulator, channel and demodulator chain.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSpec {
    pub params: ChirpParams,
    pub shape: ChirpShape,
    /// Received AC signal power, W.
    pub ps_w: f64,
    pub n0_w_per_hz: f64,
    pub bursts: Option<WBurstModel>,
    pub n_symbols: usize,
    pub seed: u64,
}

/// Random symbols for a run; shared by every SNR point with the same seed.
pub fn random_symbols(sf: u32, n: usize, seed: u64) -> Vec<Symbol> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Symbol::new(rng.random_range(0..1u32 << sf), sf).expect("in range"))
        .collect()
}

impl LinkSpec {
    fn validate(&self) -> Result<()> {
        if self.n_symbols == 0 {
            return Err(Error::Config("a link run needs at least one symbol".into()));
        }
        if !(self.ps_w >= 0.0 && self.ps_w.is_finite()) {
            return Err(Error::Config(format!("signal power must be >= 0 W, got {}", self.ps_w)));
        }
        if !(self.n0_w_per_hz >= 0.0 && self.n0_w_per_hz.is_finite()) {
            return Err(Error::Config(format!("n0 must be >= 0 W/Hz, got {}", self.n0_w_per_hz)));
        }
        if let Some(b) = &self.bursts {
            b.validate()?;
        }
        if self.params.samples_per_symbol().is_none() {
            return Err(Error::Config(format!(
                "the chain needs a whole number of samples per chip; fs / bw = {}",
                self.params.oversampling()
            )));
        }
        Ok(())
    }

    /// Runs the chain and scores it.
    ///
    /// Symbols come from `seed`; block `b` draws its noise from stream
    /// `b + 1` of the same seed and bursts use a dedicated stream, so the
    /// result is independent of thread count and, for a fixed seed, only the
    /// signal scale changes between SNR points.
    pub fn run(&self) -> Result<BerResult> {
        self.validate()?;
        let p = &self.params;
        let n_per = p.samples_per_symbol().expect("validated");
        let fs = p.fs_hz();
        let symbols = random_symbols(p.sf(), self.n_symbols, self.seed);
        let sigma = (self.n0_w_per_hz * fs / 2.0).sqrt();
        let amp = match self.shape {
            ChirpShape::Analog => (2.0 * self.ps_w).sqrt(),
            _ => 2.0 * self.ps_w.sqrt(),
        };

        let schedule = match &self.bursts {
            Some(b) => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(u64::MAX);
                let total = self.n_symbols as f64 * n_per as f64 / fs;
                let peak = b.amplitude_scale * (self.ps_w + sigma * sigma).sqrt();
                Some((b, b.draw(0.0, total, &mut rng), peak))
            }
            None => None,
        };
        let dechirper = Dechirper::new(p)?;

        let counts: Vec<Result<(u64, u64)>> = symbols
            .par_chunks(BLOCK_SYMBOLS)
            .enumerate()
            .map_init(
                || dechirper.clone(),
                |d, (b, block)| {
                    let w = match self.shape {
                        ChirpShape::Analog => modulate_analog(block, p)?,
                        ChirpShape::Square => modulate_square(block, p, false)?,
                        ChirpShape::QuantizedSquare => modulate_square(block, p, true)?,
                    };
                    let mut x = w.into_samples();
                    x.iter_mut().for_each(|v| *v *= amp);
                    let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                    rng.set_stream(b as u64 + 1);
                    add_noise_in_place(&mut x, sigma, &mut rng);
                    if let Some((model, bursts, peak)) = &schedule {
                        let t0 = (b * BLOCK_SYMBOLS * n_per) as f64 / fs;
                        let t1 = t0 + x.len() as f64 / fs;
                        let first = bursts.partition_point(|u| u.end_s() <= t0);
                        let last = bursts.partition_point(|u| u.start_s < t1);
                        model.render(&mut x, fs, t0, &bursts[first..last.max(first)], *peak);
                    }
                    let mut sym_err = 0u64;
                    let mut bit_err = 0u64;
                    for (tx, win) in block.iter().zip(x.chunks_exact(n_per)) {
                        let diff = tx.value() ^ d.detect(win).value();
                        if diff != 0 {
                            sym_err += 1;
                            bit_err += diff.count_ones() as u64;
                        }
                    }
                    Ok((sym_err, bit_err))
                },
            )
            .collect();

        let mut sym_err = 0;
        let mut bit_err = 0;
        for c in counts {
            let (s, b) = c?;
            sym_err += s;
            bit_err += b;
        }
        Ok(BerResult::from_counts(p.sf(), self.n_symbols as u64, sym_err, bit_err))
    }
}
