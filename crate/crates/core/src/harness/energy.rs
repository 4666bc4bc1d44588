use rayon::prelude::*;
use serde::{Serialize, Serializer};

use super::config::{ExperimentConfig, SweepAxis};
use super::sweep::incident_power_for;
use crate::error::{Error, Result};
use crate::powersim::{
    run_active_fsm, time_to_voltage, Capacitor, ChargeTime, HarvesterModel, LeakageVariant, SimTrace,
    ACTIVE_CAPACITANCE_F, PASSIVE_CAPACITANCE_F,
};

/// Node variants covered by a charge sweep, in output order.
pub const CHARGE_VARIANTS: [LeakageVariant; 3] = [
    LeakageVariant::Passive,
    LeakageVariant::WithStartupCircuit,
    LeakageVariant::WithoutStartupCircuit,
];

/// Time for an empty store to reach the target voltage at one incident power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChargeRow {
    #[serde(serialize_with = "variant_name")]
    pub variant: LeakageVariant,
    pub pr_dbm: f64,
    pub target_v: f64,
    /// Seconds, or `never`.
    #[serde(serialize_with = "charge_time")]
    pub t_s: ChargeTime,
}

fn variant_name<S: Serializer>(v: &LeakageVariant, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(v.name())
}

fn charge_time<S: Serializer>(t: &ChargeTime, s: S) -> std::result::Result<S::Ok, S::Error> {
    match t {
        ChargeTime::Reached(secs) => s.serialize_f64(*secs),
        ChargeTime::Never => s.serialize_str("never"),
    }
}

/// Storage capacitance and harvester of a variant.
pub fn node_for(cfg: &ExperimentConfig, variant: LeakageVariant) -> (f64, &HarvesterModel) {
    match variant {
        LeakageVariant::Passive => (PASSIVE_CAPACITANCE_F, &cfg.power.passive_harvester),
        _ => (ACTIVE_CAPACITANCE_F, &cfg.power.active_harvester),
    }
}

fn pr_values(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    let ch = &cfg.channel;
    let mut out = cfg
        .sweep
        .values
        .iter()
        .map(|&v| match cfg.sweep.axis {
            SweepAxis::PrDbm => Ok(v),
            SweepAxis::EirpDbm => incident_power_for(cfg, v, ch.depth_cm),
            SweepAxis::DepthCm => incident_power_for(cfg, ch.eirp_dbm, v),
            SweepAxis::BandwidthHz => Err(Error::Config(
                "a charge sweep runs over pr_dbm, eirp_dbm or depth_cm, not bandwidth".into(),
            )),
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Charging time of every node variant over the sweep axis, mapped to
/// incident power. Rows are grouped by variant and sorted by power.
pub fn run_charge_sweep(cfg: &ExperimentConfig) -> Result<Vec<ChargeRow>> {
    cfg.validate()?;
    let prs = pr_values(cfg)?;
    let jobs: Vec<(LeakageVariant, f64)> = CHARGE_VARIANTS
        .iter()
        .flat_map(|&v| prs.iter().map(move |&p| (v, p)))
        .collect();
    jobs.par_iter()
        .map(|&(variant, pr_dbm)| {
            let (c, h) = node_for(cfg, variant);
            let leak = cfg.power.leakage(variant)?;
            let t = time_to_voltage(&Capacitor::empty(c)?, cfg.power.target_v, pr_dbm, h, &leak, cfg.power.dt_s)?;
            Ok(ChargeRow {
                variant,
                pr_dbm,
                target_v: cfg.power.target_v,
                t_s: t,
            })
        })
        .collect()
}

/// Active-node state machine from an empty store at incident power `pr_dbm`.
pub fn run_active_trace(cfg: &ExperimentConfig, variant: LeakageVariant, pr_dbm: f64) -> Result<SimTrace> {
    if variant == LeakageVariant::Passive {
        return Err(Error::Config("the state machine models the active node only".into()));
    }
    let leak = cfg.power.leakage(variant)?;
    run_active_fsm(
        &cfg.power.active,
        Capacitor::empty(ACTIVE_CAPACITANCE_F)?,
        pr_dbm,
        &cfg.power.active_harvester,
        &leak,
        cfg.power.fsm_duration_s,
        cfg.power.dt_s,
    )
}
