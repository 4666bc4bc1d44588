use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

use super::config::{ExperimentConfig, IncidentSource, SweepAxis};
use super::link::LinkSpec;
use crate::channel::interference_symbol_error_rate;
use crate::chirpmod::ChirpParams;
use crate::error::Result;
use crate::rxdsp::{ber_theory, effective_snr, BerResult};
use crate::util::dbm_to_w;

/// One row of a BER sweep: simulated and closed-form columns side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub eirp_dbm: f64,
    pub depth_cm: f64,
    pub bw_hz: f64,
    pub pr_dbm: f64,
    pub ps_dbm: f64,
    pub snr_db: f64,
    pub n_symbols: u64,
    pub ber: f64,
    pub ser: f64,
    pub wilson95: f64,
    pub theory_pb: f64,
    pub interference_es: f64,
    /// Wall-clock time; kept out of serialized output so files are
    /// reproducible byte for byte.
    #[serde(skip)]
    pub runtime_s: f64,
}

/// Operating point of one row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub eirp_dbm: f64,
    pub depth_cm: f64,
    pub pr_dbm: f64,
    pub params: ChirpParams,
}

/// Seed of trial `trial` in row `row`: `base_seed + row` for the first
/// trial, decorrelated by a golden-ratio multiple for the others.
pub fn trial_seed(base_seed: u64, row: usize, trial: u32) -> u64 {
    base_seed.wrapping_add(row as u64) ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Incident power for a transmitter at `eirp_dbm` over a node at `depth_cm`.
pub fn incident_power_for(cfg: &ExperimentConfig, eirp_dbm: f64, depth_cm: f64) -> Result<f64> {
    let ch = &cfg.channel;
    match ch.incident {
        IncidentSource::Table => ch.table()?.incident_power(eirp_dbm, depth_cm),
        IncidentSource::Analytic => ch.attenuation.incident_power_dbm(eirp_dbm, depth_cm, ch.moisture),
    }
}

/// Resolves the operating point for one sweep value.
pub fn operating_point(cfg: &ExperimentConfig, value: f64) -> Result<OperatingPoint> {
    let ch = &cfg.channel;
    let (eirp, depth) = match cfg.sweep.axis {
        SweepAxis::EirpDbm => (value, ch.depth_cm),
        SweepAxis::DepthCm => (ch.eirp_dbm, value),
        _ => (ch.eirp_dbm, ch.depth_cm),
    };
    let params = match cfg.sweep.axis {
        SweepAxis::BandwidthHz => cfg.chirp.params_for_bandwidth(value)?,
        _ => cfg.chirp.params()?,
    };
    let pr_dbm = match cfg.sweep.axis {
        SweepAxis::PrDbm => value,
        _ => incident_power_for(cfg, eirp, depth)?,
    };
    Ok(OperatingPoint {
        eirp_dbm: eirp,
        depth_cm: depth,
        pr_dbm,
        params,
    })
}

/// Monte-Carlo chain settings at received power `ps_w`.
pub fn link_spec(cfg: &ExperimentConfig, params: ChirpParams, ps_w: f64, n_symbols: usize, seed: u64) -> LinkSpec {
    LinkSpec {
        params,
        shape: cfg.chirp.shape,
        ps_w,
        n0_w_per_hz: cfg.channel.n0_w_per_hz,
        bursts: cfg.channel.bursts_enabled.then(|| cfg.channel.bursts.clone()),
        n_symbols,
        seed,
    }
}

/// Runs the BER sweep: each axis value maps to incident power, then through
/// the composite gain to received power, and is simulated end to end.
/// Rows come out sorted by axis value; row `i` uses seed `base_seed + i`.
pub fn run_ber_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let mut values = cfg.sweep.values.clone();
    values.sort_by(f64::total_cmp);
    let points = values
        .iter()
        .map(|&v| operating_point(cfg, v))
        .collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(usize, u32)> = (0..points.len())
        .flat_map(|r| (0..cfg.trials).map(move |t| (r, t)))
        .collect();
    let results: Vec<Result<(BerResult, f64)>> = jobs
        .par_iter()
        .map(|&(r, t)| {
            let start = Instant::now();
            let pt = &points[r];
            let ps_w = dbm_to_w(pt.pr_dbm + cfg.channel.composite_gain_db);
            let spec = link_spec(cfg, pt.params, ps_w, cfg.symbols_per_trial, trial_seed(cfg.base_seed, r, t));
            Ok((spec.run()?, start.elapsed().as_secs_f64()))
        })
        .collect();

    let mut rows = Vec::with_capacity(points.len());
    let mut results = results.into_iter();
    for (r, pt) in points.iter().enumerate() {
        let mut pooled: Option<BerResult> = None;
        let mut runtime = 0.0;
        for _ in 0..cfg.trials {
            let (res, secs) = results.next().expect("one result per job")?;
            runtime += secs;
            pooled = Some(match pooled {
                Some(p) => p.merge(&res),
                None => res,
            });
        }
        let res = pooled.expect("trials >= 1");
        let ps_dbm = pt.pr_dbm + cfg.channel.composite_gain_db;
        let bw = pt.params.bw_hz();
        let snr = effective_snr(dbm_to_w(ps_dbm), bw, cfg.channel.n0_w_per_hz, cfg.chirp.detection_fraction)?;
        rows.push(SweepRow {
            axis_value: values[r],
            eirp_dbm: pt.eirp_dbm,
            depth_cm: pt.depth_cm,
            bw_hz: bw,
            pr_dbm: pt.pr_dbm,
            ps_dbm,
            snr_db: 10.0 * snr.log10(),
            n_symbols: res.n_symbols,
            ber: res.ber,
            ser: res.ser,
            wilson95: res.wilson_95_halfwidth,
            theory_pb: ber_theory(snr, pt.params.sf())?,
            interference_es: interference_symbol_error_rate(pt.params.ds_s(), &cfg.channel.bursts)?,
            runtime_s: runtime,
        });
    }
    Ok(rows)
}
