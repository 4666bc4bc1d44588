use serde::Serialize;

use crate::error::{Error, Result};

pub const MIN_SF: u32 = 5;
pub const MAX_SF: u32 = 12;

/// Clock cycles one GPIO toggle instruction takes on the passive node's MCU.
pub const TOGGLE_CYCLES: f64 = 4.0;

/// Shortest square-wave period the MCU can produce, in clock cycles.
pub const MIN_PERIOD_CYCLES: f64 = 2.0 * TOGGLE_CYCLES;

/// Smallest allowed ratio of simulation sample rate to chirp bandwidth.
pub const MIN_OVERSAMPLING: f64 = 8.0;

/// Oversampling used when the caller does not pick a sample rate.
pub const DEFAULT_OVERSAMPLING: f64 = 16.0;

/// Square-chirp configuration.
///
/// `ds_s` and `rd_bps` are derived: a symbol carries `sf` bits and lasts
/// `2^sf / bw` seconds, so `rd_bps * ds_s == sf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChirpParams {
    sf: u32,
    bw_hz: f64,
    fosc_hz: f64,
    fs_hz: f64,
}

impl ChirpParams {
    /// Validates and builds a parameter set with an explicit bandwidth.
    pub fn new(sf: u32, bw_hz: f64, fosc_hz: f64, fs_hz: f64) -> Result<Self> {
        if !(MIN_SF..=MAX_SF).contains(&sf) {
            return Err(Error::Config(format!(
                "spreading factor {sf} outside [{MIN_SF}, {MAX_SF}]"
            )));
        }
        if !(bw_hz.is_finite() && bw_hz > 0.0) {
            return Err(Error::Config(format!("bandwidth must be positive, got {bw_hz}")));
        }
        if !(fosc_hz.is_finite() && fosc_hz > 0.0) {
            return Err(Error::Config(format!("clock must be positive, got {fosc_hz}")));
        }
        if bw_hz > fosc_hz / MIN_PERIOD_CYCLES * (1.0 + 1e-12) {
            return Err(Error::BandwidthInfeasible(format!(
                "bandwidth {bw_hz} Hz exceeds fosc/8 = {} Hz",
                fosc_hz / MIN_PERIOD_CYCLES
            )));
        }
        if !(fs_hz.is_finite() && fs_hz >= MIN_OVERSAMPLING * bw_hz * (1.0 - 1e-12)) {
            return Err(Error::Config(format!(
                "sample rate {fs_hz} Hz below 8 x bandwidth ({} Hz)",
                MIN_OVERSAMPLING * bw_hz
            )));
        }
        Ok(Self {
            sf,
            bw_hz,
            fosc_hz,
            fs_hz,
        })
    }

    /// Same as [`derive_params`] but with the sample rate defaulted to
    /// `16 * bw`, which is also `2 * fosc` and therefore resolves the toggle grid.
    pub fn for_clock(sf: u32, fosc_hz: f64) -> Result<Self> {
        let bw = fosc_hz / MIN_PERIOD_CYCLES;
        derive_params(sf, fosc_hz, DEFAULT_OVERSAMPLING * bw)
    }

    pub fn sf(&self) -> u32 {
        self.sf
    }

    /// Number of chips (and of possible symbol values) per symbol, `2^sf`.
    pub fn chips(&self) -> usize {
        1usize << self.sf
    }

    pub fn bw_hz(&self) -> f64 {
        self.bw_hz
    }

    pub fn fosc_hz(&self) -> f64 {
        self.fosc_hz
    }

    pub fn fs_hz(&self) -> f64 {
        self.fs_hz
    }

    /// Symbol duration `2^sf / bw`.
    pub fn ds_s(&self) -> f64 {
        self.chips() as f64 / self.bw_hz
    }

    /// Data rate `bw * sf / 2^sf`.
    pub fn rd_bps(&self) -> f64 {
        self.bw_hz * self.sf as f64 / self.chips() as f64
    }

    /// Samples per chip, `fs / bw`.
    pub fn oversampling(&self) -> f64 {
        self.fs_hz / self.bw_hz
    }

    /// Samples per symbol when that count is an integer.
    pub fn samples_per_symbol(&self) -> Option<usize> {
        crate::util::as_integer(self.ds_s() * self.fs_hz).map(|n| n as usize)
    }

    /// Duration of one GPIO toggle instruction, `4 / fosc`.
    pub fn toggle_period_s(&self) -> f64 {
        TOGGLE_CYCLES / self.fosc_hz
    }

    /// Copy with a different sample rate.
    pub fn with_fs(&self, fs_hz: f64) -> Result<Self> {
        Self::new(self.sf, self.bw_hz, self.fosc_hz, fs_hz)
    }
}

/// Derives the widest chirp a clock of `fosc_hz` can toggle out: `bw = fosc / 8`.
///
/// `fs_hz` must be at least `fosc_hz` so the toggle grid `4 / fosc` spans a
/// whole number of samples or more.
pub fn derive_params(sf: u32, fosc_hz: f64, fs_hz: f64) -> Result<ChirpParams> {
    if !(fosc_hz.is_finite() && fosc_hz > 0.0) {
        return Err(Error::Config(format!("clock must be positive, got {fosc_hz}")));
    }
    if !(fs_hz >= fosc_hz) {
        return Err(Error::Config(format!(
            "sample rate {fs_hz} Hz is below the clock rate {fosc_hz} Hz"
        )));
    }
    ChirpParams::new(sf, fosc_hz / MIN_PERIOD_CYCLES, fosc_hz, fs_hz)
}
