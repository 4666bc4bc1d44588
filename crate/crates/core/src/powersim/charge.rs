use serde::{Deserialize, Serialize};

use super::capacitor::Capacitor;
use super::harvester::HarvesterModel;
use super::leakage::LeakageCurve;
use crate::error::{Error, Result};

/// Supply voltage the MCU needs to start.
pub const MCU_MIN_V: f64 = 1.8;
/// Largest allowed integration step.
pub const MAX_DT_S: f64 = 1e-3;
/// Charging that has not finished after this long is reported as never.
pub const MAX_CHARGE_TIME_S: f64 = 3600.0;

/// Outcome of a charging run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChargeTime {
    Reached(f64),
    Never,
}

impl ChargeTime {
    pub fn seconds(self) -> Option<f64> {
        match self {
            ChargeTime::Reached(t) => Some(t),
            ChargeTime::Never => None,
        }
    }

    pub fn is_never(self) -> bool {
        matches!(self, ChargeTime::Never)
    }
}

impl std::fmt::Display for ChargeTime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ChargeTime::Reached(t) => write!(f, "{t}"),
            ChargeTime::Never => f.write_str("never"),
        }
    }
}

pub(crate) fn check_dt(dt_s: f64) -> Result<()> {
    if dt_s > 0.0 && dt_s <= MAX_DT_S {
        Ok(())
    } else {
        Err(Error::Domain(format!("time step must be in (0, {MAX_DT_S}] s, got {dt_s}")))
    }
}

/// Time for `c` to charge from its current voltage to `target_v` at
/// incident power `pr_dbm`, with the store leaking per `leak`.
///
/// Explicit Euler in stored energy; the last partial step is interpolated.
/// With constant input and leakage non-decreasing in voltage, a step with
/// net power <= 0 marks an equilibrium below the target, so the answer is
/// [`ChargeTime::Never`] straight away.
pub fn time_to_voltage(
    c: &Capacitor,
    target_v: f64,
    pr_dbm: f64,
    h: &HarvesterModel,
    leak: &LeakageCurve,
    dt_s: f64,
) -> Result<ChargeTime> {
    check_dt(dt_s)?;
    if !(target_v > c.v()) {
        return Err(Error::Domain(format!(
            "target {target_v} V is not above the current {} V",
            c.v()
        )));
    }
    let p_in = h.harvested_power(pr_dbm);
    let target_e = c.energy_at(target_v);
    let mut cap = *c;
    let mut t = 0.0;
    let max_steps = (MAX_CHARGE_TIME_S / dt_s).ceil() as u64;
    for _ in 0..max_steps {
        let net = p_in - leak.power_at(cap.v());
        if net <= 0.0 {
            return Ok(ChargeTime::Never);
        }
        let missing = target_e - cap.energy_j();
        if net * dt_s >= missing {
            return Ok(ChargeTime::Reached(t + missing / net));
        }
        cap.step(p_in, p_in - net, dt_s);
        t += dt_s;
    }
    Ok(ChargeTime::Never)
}

/// Lowest incident power at which harvesting beats the worst leakage below
/// [`MCU_MIN_V`], i.e. the store is guaranteed to reach the MCU threshold.
/// `None` when no incident power is enough.
pub fn min_startup_incident_power(leak: &LeakageCurve, h: &HarvesterModel) -> Option<f64> {
    let need = leak.max_up_to(MCU_MIN_V);
    let floor = h.floor_dbm();
    if h.harvested_power(floor) > need {
        return Some(floor);
    }
    let mut hi = floor + 1.0;
    while h.harvested_power(hi) <= need {
        hi += 10.0;
        if hi > 100.0 {
            return None;
        }
    }
    let mut lo = floor;
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if h.harvested_power(mid) > need {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Efficiency-curve multiplier that makes an empty store of `capacitance_f`
/// reach `target_v` in `target_s` at `pr_dbm`. The curve shape is kept; only
/// its scale is fitted.
pub fn fit_efficiency_scale(
    h: &HarvesterModel,
    capacitance_f: f64,
    leak: &LeakageCurve,
    pr_dbm: f64,
    target_v: f64,
    target_s: f64,
    dt_s: f64,
) -> Result<f64> {
    let cap = Capacitor::empty(capacitance_f)?;
    let time_at = |scale: f64| -> Result<f64> {
        let hh = HarvesterModel {
            efficiency_scale: scale,
            ..h.clone()
        };
        Ok(time_to_voltage(&cap, target_v, pr_dbm, &hh, leak, dt_s)?
            .seconds()
            .unwrap_or(f64::INFINITY))
    };
    let eta = h.efficiency_curve.iter().map(|&(_, e)| e).fold(0.0, f64::max);
    let (mut lo, mut hi) = (0.0, if eta > 0.0 { 1.0 / eta } else { 1.0 });
    if time_at(hi)? > target_s {
        return Err(Error::Calibration(format!(
            "even 100% efficiency cannot charge to {target_v} V in {target_s} s at {pr_dbm} dBm"
        )));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if time_at(mid)? > target_s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
