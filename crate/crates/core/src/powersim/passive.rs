use serde::{Deserialize, Serialize};

use super::harvester::HarvesterModel;
use crate::error::{Error, Result};

/// Lower operating-power figure for the 32.768 kHz clock; the per-clock
/// table value (9.3 uW at 1.8 V) is the default.
pub const SLOW_CLOCK_P_OP_ALT_W: f64 = 8.1e-6;

/// Operating power of the passive node for one MCU clock.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClockPower {
    pub fosc_hz: f64,
    pub p_1v8_w: f64,
    pub p_3v0_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PassiveNodeModel {
    pub p_op_by_clock: Vec<ClockPower>,
    pub p_sleep_w: f64,
}

impl Default for PassiveNodeModel {
    fn default() -> Self {
        let row = |fosc_hz, p_1v8_w, p_3v0_w| ClockPower {
            fosc_hz,
            p_1v8_w,
            p_3v0_w,
        };
        Self {
            p_op_by_clock: vec![
                row(32_768.0, 9.3e-6, 26.3e-6),
                row(1e6, 392e-6, 850e-6),
                row(2e6, 418e-6, 934e-6),
                row(4e6, 470e-6, 1098e-6),
            ],
            p_sleep_w: 36e-9,
        }
    }
}

/// Whether harvesting covers the operating draw, and by how much.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub sustainable: bool,
    /// Harvested minus required power, W.
    pub margin_w: f64,
    pub harvested_w: f64,
    pub required_w: f64,
}

impl PassiveNodeModel {
    pub fn validate(&self) -> Result<()> {
        if self.p_op_by_clock.is_empty() {
            return Err(Error::Config("passive clock table is empty".into()));
        }
        let mut rows = self.p_op_by_clock.clone();
        rows.sort_by(|a, b| a.fosc_hz.total_cmp(&b.fosc_hz));
        for w in rows.windows(2) {
            if !(w[1].fosc_hz > w[0].fosc_hz && w[1].p_1v8_w > w[0].p_1v8_w && w[1].p_3v0_w > w[0].p_3v0_w) {
                return Err(Error::Config(format!(
                    "operating power must rise with clock ({} Hz vs {} Hz)",
                    w[0].fosc_hz, w[1].fosc_hz
                )));
            }
        }
        if !(self.p_sleep_w >= 0.0) {
            return Err(Error::Config("sleep power must be >= 0".into()));
        }
        Ok(())
    }

    /// Operating power at clock `fosc_hz` and supply `vdd` (1.8 or 3.0 V).
    pub fn p_op(&self, fosc_hz: f64, vdd: f64) -> Result<f64> {
        let row = self
            .p_op_by_clock
            .iter()
            .find(|r| (r.fosc_hz - fosc_hz).abs() <= 1e-9 * fosc_hz.abs())
            .ok_or_else(|| Error::Config(format!("no operating power listed for a {fosc_hz} Hz clock")))?;
        if (vdd - 1.8).abs() < 1e-9 {
            Ok(row.p_1v8_w)
        } else if (vdd - 3.0).abs() < 1e-9 {
            Ok(row.p_3v0_w)
        } else {
            Err(Error::Config(format!("no operating power listed for {vdd} V; use 1.8 or 3.0")))
        }
    }
}

/// Can the node run continuously at clock `fosc_hz` from incident power `pr_dbm`?
pub fn passive_steady_state(
    pm: &PassiveNodeModel,
    fosc_hz: f64,
    vdd: f64,
    pr_dbm: f64,
    h: &HarvesterModel,
) -> Result<SteadyState> {
    let required_w = pm.p_op(fosc_hz, vdd)?;
    let harvested_w = h.harvested_power(pr_dbm);
    let margin_w = harvested_w - required_w;
    Ok(SteadyState {
        sustainable: margin_w >= 0.0,
        margin_w,
        harvested_w,
        required_w,
    })
}
