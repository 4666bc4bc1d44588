use serde::Serialize;

use super::config::ExperimentConfig;
use crate::channel::interference_symbol_error_rate;
use crate::chirpmod::ChirpParams;
use crate::error::{Error, Result};
use crate::rxdsp::{ber_theory, effective_snr};

/// MCU clocks of the bandwidth/duration/rate table.
pub const TABLE_CLOCKS_HZ: [f64; 4] = [32_768.0, 1e6, 2e6, 4e6];

/// One clock of the bandwidth/duration/rate table, raw and as displayed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub fosc_hz: f64,
    pub bw_hz: f64,
    pub ds_s: f64,
    pub rd_bps: f64,
    pub bw: String,
    pub ds: String,
    pub rd: String,
}

/// Closed-form bit error, burst symbol error and data rate at one SNR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoryRow {
    pub snr_db: f64,
    pub pb_theory: f64,
    pub es_bursts: f64,
    pub rd_bps: f64,
}

/// `4.1 kHz` below 10 kHz, whole kHz above.
pub fn format_bw(hz: f64) -> String {
    let khz = hz / 1e3;
    if khz < 10.0 {
        format!("{khz:.1} kHz")
    } else {
        format!("{khz:.0} kHz")
    }
}

/// Whole ms from 10 ms up, two decimals below.
pub fn format_ds(s: f64) -> String {
    let ms = s * 1e3;
    if ms >= 10.0 {
        format!("{ms:.0} ms")
    } else {
        format!("{ms:.2} ms")
    }
}

/// Whole bps below 1 kbps, one decimal kbps above.
pub fn format_rd(bps: f64) -> String {
    if bps < 1e3 {
        format!("{bps:.0} bps")
    } else {
        format!("{:.1} kbps", bps / 1e3)
    }
}

/// Bandwidth, symbol duration and data rate at each of `clocks_hz`, with
/// the bandwidth at its clock-limited maximum.
pub fn rate_table(sf: u32, clocks_hz: &[f64]) -> Result<Vec<RateRow>> {
    clocks_hz
        .iter()
        .map(|&f| {
            let p = ChirpParams::for_clock(sf, f)?;
            Ok(RateRow {
                fosc_hz: f,
                bw_hz: p.bw_hz(),
                ds_s: p.ds_s(),
                rd_bps: p.rd_bps(),
                bw: format_bw(p.bw_hz()),
                ds: format_ds(p.ds_s()),
                rd: format_rd(p.rd_bps()),
            })
        })
        .collect()
}

/// Theory columns over `snr_db` from `lo` to `hi` inclusive in `step` dB.
pub fn run_theory_report(cfg: &ExperimentConfig, lo: f64, hi: f64, step: f64) -> Result<Vec<TheoryRow>> {
    if !(step > 0.0 && lo <= hi && lo.is_finite() && hi.is_finite()) {
        return Err(Error::Config(format!("bad SNR grid {lo}..{hi} step {step}")));
    }
    let p = cfg.chirp.params()?;
    let es = interference_symbol_error_rate(p.ds_s(), &cfg.channel.bursts)?;
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n)
        .map(|i| {
            let snr_db = lo + i as f64 * step;
            Ok(TheoryRow {
                snr_db,
                pb_theory: ber_theory(10f64.powf(snr_db / 10.0), p.sf())?,
                es_bursts: es,
                rd_bps: p.rd_bps(),
            })
        })
        .collect()
}

/// Chip SNR the detector sees at received power `ps_w`, in dB.
pub fn snr_db_at(cfg: &ExperimentConfig, ps_w: f64) -> Result<f64> {
    let p = cfg.chirp.params()?;
    let snr = effective_snr(ps_w, p.bw_hz(), cfg.channel.n0_w_per_hz, cfg.chirp.detection_fraction)?;
    Ok(10.0 * snr.log10())
}
