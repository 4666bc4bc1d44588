use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use super::link::ChirpShape;
use crate::channel::{AttenuationModel, IncidentPowerTable, Moisture, WBurstModel, DEFAULT_N0_W_PER_HZ};
use crate::chirpmod::{ChirpParams, DEFAULT_DETECTION_FRACTION, MIN_PERIOD_CYCLES};
use crate::error::{Error, Result};
use crate::powersim::{ActiveNodeConfig, HarvesterModel, LeakageCurve, LeakageVariant, MAX_DT_S};

/// Chirp settings of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChirpConfig {
    pub sf: u32,
    pub fosc_hz: f64,
    /// Defaults to the widest the clock supports, `fosc / 8`.
    pub bw_hz: Option<f64>,
    /// Samples per chip in the Monte-Carlo chain.
    pub oversampling: f64,
    pub shape: ChirpShape,
    /// Share of signal power the detector collects, used for the SNR column
    /// and the theory column.
    pub detection_fraction: f64,
}

impl Default for ChirpConfig {
    fn default() -> Self {
        Self {
            sf: 7,
            fosc_hz: 32_768.0,
            bw_hz: None,
            oversampling: 8.0,
            shape: ChirpShape::QuantizedSquare,
            detection_fraction: DEFAULT_DETECTION_FRACTION,
        }
    }
}

impl ChirpConfig {
    pub fn bw(&self) -> f64 {
        self.bw_hz.unwrap_or(self.fosc_hz / MIN_PERIOD_CYCLES)
    }

    pub fn params(&self) -> Result<ChirpParams> {
        let bw = self.bw();
        ChirpParams::new(self.sf, bw, self.fosc_hz, self.oversampling * bw)
    }

    /// Parameters for bandwidth `bw_hz` with the clock at its minimum,
    /// `8 * bw`.
    pub fn params_for_bandwidth(&self, bw_hz: f64) -> Result<ChirpParams> {
        ChirpParams::new(self.sf, bw_hz, MIN_PERIOD_CYCLES * bw_hz, self.oversampling * bw_hz)
    }
}

/// Where incident power comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IncidentSource {
    /// Measured lookup table, interpolated.
    Table,
    /// `AttenuationModel` path loss.
    Analytic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    /// Incident-power CSV; the bundled measured table when absent.
    pub table_path: Option<PathBuf>,
    pub incident: IncidentSource,
    pub moisture: Moisture,
    pub depth_cm: f64,
    pub eirp_dbm: f64,
    pub attenuation: AttenuationModel,
    pub n0_w_per_hz: f64,
    /// Received signal power over incident power, dB. Usually fitted by
    /// calibration.
    pub composite_gain_db: f64,
    pub bursts_enabled: bool,
    pub bursts: WBurstModel,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            table_path: None,
            incident: IncidentSource::Table,
            moisture: Moisture::Dry,
            depth_cm: 13.5,
            eirp_dbm: 22.1,
            attenuation: AttenuationModel::default(),
            n0_w_per_hz: DEFAULT_N0_W_PER_HZ,
            composite_gain_db: -140.0,
            bursts_enabled: false,
            bursts: WBurstModel::default(),
        }
    }
}

impl ChannelConfig {
    pub fn table(&self) -> Result<IncidentPowerTable> {
        match &self.table_path {
            Some(p) => IncidentPowerTable::from_path(p),
            None => Ok(IncidentPowerTable::measured()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerConfig {
    pub active: ActiveNodeConfig,
    pub active_harvester: HarvesterModel,
    pub passive_harvester: HarvesterModel,
    /// Leakage curve CSVs; each replaces the preset named in its file name.
    pub leakage_files: Vec<PathBuf>,
    pub dt_s: f64,
    pub target_v: f64,
    /// Length of state-machine runs.
    pub fsm_duration_s: f64,
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self {
            active: ActiveNodeConfig::default(),
            active_harvester: HarvesterModel::active(),
            passive_harvester: HarvesterModel::passive(),
            leakage_files: Vec::new(),
            dt_s: 1e-3,
            target_v: 1.8,
            fsm_duration_s: 30.0,
        }
    }
}

impl PowerConfig {
    pub fn leakage(&self, variant: LeakageVariant) -> Result<LeakageCurve> {
        for f in &self.leakage_files {
            let name = f.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            if LeakageVariant::from_file_name(name) == Some(variant) {
                return LeakageCurve::from_path(f);
            }
        }
        Ok(LeakageCurve::preset(variant))
    }
}

/// Quantity varied across the rows of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    EirpDbm,
    DepthCm,
    BandwidthHz,
    PrDbm,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::EirpDbm => "eirp_dbm",
            SweepAxis::DepthCm => "depth_cm",
            SweepAxis::BandwidthHz => "bandwidth_hz",
            SweepAxis::PrDbm => "pr_dbm",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            axis: SweepAxis::EirpDbm,
            values: vec![22.1, 22.5, 23.0, 23.6, 24.0, 24.5, 25.0],
        }
    }
}

/// Measured operating point the composite gain is fitted to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    pub anchor_eirp_dbm: f64,
    pub anchor_ber: f64,
    /// Symbols behind the anchor measurement; sets its Wilson interval and
    /// the size of each calibration run.
    pub anchor_symbols: usize,
    pub gain_lo_db: f64,
    pub gain_hi_db: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            anchor_eirp_dbm: 22.1,
            anchor_ber: 0.162,
            anchor_symbols: 2500,
            gain_lo_db: -220.0,
            gain_hi_db: -40.0,
        }
    }
}

/// Everything one experiment needs, loadable from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub base_seed: u64,
    /// Independent Monte-Carlo trials per sweep row.
    pub trials: u32,
    pub symbols_per_trial: usize,
    pub chirp: ChirpConfig,
    pub channel: ChannelConfig,
    pub power: PowerConfig,
    pub sweep: SweepConfig,
    pub calibration: CalibrationConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: "default".into(),
            base_seed: 1,
            trials: 1,
            symbols_per_trial: 10_000,
            chirp: ChirpConfig::default(),
            channel: ChannelConfig::default(),
            power: PowerConfig::default(),
            sweep: SweepConfig::default(),
            calibration: CalibrationConfig::default(),
        }
    }
}

fn collect(problems: &mut Vec<String>, r: Result<()>) {
    match r {
        Ok(()) => {}
        Err(Error::ConfigProblems(p)) => problems.extend(p),
        Err(e) => problems.push(e.to_string()),
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(format!("cannot parse config: {e}")))
    }

    /// Reads and validates a TOML config.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg = Self::from_toml_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    /// Checks every field and reports all problems at once.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.trials == 0 {
            problems.push("trials must be >= 1".into());
        }
        if self.symbols_per_trial == 0 {
            problems.push("symbols_per_trial must be >= 1".into());
        }
        if self.sweep.values.is_empty() {
            problems.push("sweep.values is empty".into());
        }
        if self.sweep.values.iter().any(|v| !v.is_finite()) {
            problems.push("sweep.values must be finite".into());
        }

        let c = &self.chirp;
        if !(c.detection_fraction > 0.0 && c.detection_fraction <= 1.0) {
            problems.push(format!("chirp.detection_fraction must be in (0, 1], got {}", c.detection_fraction));
        }
        if self.sweep.axis == SweepAxis::BandwidthHz {
            for &bw in &self.sweep.values {
                collect(&mut problems, c.params_for_bandwidth(bw).map(|_| ()));
            }
        } else {
            collect(&mut problems, c.params().map(|_| ()));
        }

        let ch = &self.channel;
        collect(&mut problems, ch.attenuation.validate());
        collect(&mut problems, ch.bursts.validate());
        if !(ch.n0_w_per_hz > 0.0 && ch.n0_w_per_hz.is_finite()) {
            problems.push(format!("channel.n0_w_per_hz must be > 0, got {}", ch.n0_w_per_hz));
        }
        if !ch.composite_gain_db.is_finite() {
            problems.push("channel.composite_gain_db must be finite".into());
        }
        if !(ch.depth_cm >= 0.0) {
            problems.push(format!("channel.depth_cm must be >= 0, got {}", ch.depth_cm));
        }
        match ch.table() {
            Ok(table) if ch.incident == IncidentSource::Table => {
                let mut points: Vec<(f64, f64)> = Vec::new();
                match self.sweep.axis {
                    SweepAxis::EirpDbm => points.extend(self.sweep.values.iter().map(|&e| (e, ch.depth_cm))),
                    SweepAxis::DepthCm => points.extend(self.sweep.values.iter().map(|&d| (ch.eirp_dbm, d))),
                    SweepAxis::BandwidthHz => points.push((ch.eirp_dbm, ch.depth_cm)),
                    SweepAxis::PrDbm => {}
                }
                for (e, d) in points {
                    if let Err(err) = table.incident_power(e, d) {
                        problems.push(err.to_string());
                    }
                }
            }
            Ok(_) => {}
            Err(e) => problems.push(format!("incident power table: {e}")),
        }

        let p = &self.power;
        collect(&mut problems, p.active.validate());
        collect(&mut problems, p.active_harvester.validate());
        collect(&mut problems, p.passive_harvester.validate());
        if !(p.dt_s > 0.0 && p.dt_s <= MAX_DT_S) {
            problems.push(format!("power.dt_s must be in (0, {MAX_DT_S}], got {}", p.dt_s));
        }
        if !(p.target_v > 0.0) || !(p.fsm_duration_s >= 0.0) {
            problems.push("power.target_v must be > 0 and power.fsm_duration_s >= 0".into());
        }
        for f in &p.leakage_files {
            if !f.exists() {
                problems.push(format!("leakage file {} does not exist", f.display()));
            } else if let Err(e) = LeakageCurve::from_path(f) {
                problems.push(format!("leakage file {}: {e}", f.display()));
            }
        }

        let cal = &self.calibration;
        if !(cal.anchor_ber > 1e-4 && cal.anchor_ber < 0.4) {
            problems.push(format!("calibration.anchor_ber must be in (1e-4, 0.4), got {}", cal.anchor_ber));
        }
        if cal.anchor_symbols == 0 {
            problems.push("calibration.anchor_symbols must be >= 1".into());
        }
        if !(cal.gain_lo_db < cal.gain_hi_db) {
            problems.push("calibration.gain_lo_db must be below gain_hi_db".into());
        }

        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::ConfigProblems(problems))
        }
    }
}
