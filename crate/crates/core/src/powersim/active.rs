use serde::{Deserialize, Serialize};
use std::io::Write;

use super::capacitor::Capacitor;
use super::charge::check_dt;
use super::harvester::HarvesterModel;
use super::leakage::LeakageCurve;
use crate::error::{Error, Result};

/// Thresholds and costs of the active node's duty cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActiveNodeConfig {
    /// The startup circuit releases the MCU at this voltage.
    pub v_start: f64,
    /// Sleeping MCU wakes at this voltage.
    pub v_wake: f64,
    /// MCU stops sending and sleeps below this voltage.
    pub v_sleep: f64,
    /// Brown-out voltage.
    pub v_min: f64,
    pub e_boot_j: f64,
    pub e_packet_j: f64,
    pub msdu_bytes: u32,
    pub boot_time_s: f64,
    pub link_rate_bps: f64,
    /// Keep harvesting while a packet is on air.
    pub harvest_during_transmit: bool,
}

impl Default for ActiveNodeConfig {
    fn default() -> Self {
        Self {
            v_start: 3.2,
            v_wake: 2.6,
            v_sleep: 2.3,
            v_min: 1.8,
            e_boot_j: 1.68e-3,
            e_packet_j: 177e-6,
            msdu_bytes: 105,
            boot_time_s: 1e-3,
            link_rate_bps: 1e6,
            harvest_during_transmit: true,
        }
    }
}

impl ActiveNodeConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(0.0 < self.v_min && self.v_min < self.v_sleep && self.v_sleep < self.v_wake && self.v_wake < self.v_start) {
            problems.push(format!(
                "thresholds must satisfy 0 < v_min < v_sleep < v_wake < v_start, got {} / {} / {} / {}",
                self.v_min, self.v_sleep, self.v_wake, self.v_start
            ));
        }
        if !(self.e_packet_j > 0.0 && self.e_boot_j > self.e_packet_j) {
            problems.push(format!(
                "energies must satisfy e_boot > e_packet > 0, got {} / {} J",
                self.e_boot_j, self.e_packet_j
            ));
        }
        if self.msdu_bytes == 0 {
            problems.push("msdu_bytes must be > 0".into());
        }
        if !(self.boot_time_s > 0.0) || !(self.link_rate_bps > 0.0) {
            problems.push("boot time and link rate must be > 0".into());
        }
        match problems.len() {
            0 => Ok(()),
            1 => Err(Error::Config(problems.remove(0))),
            _ => Err(Error::ConfigProblems(problems)),
        }
    }

    pub fn airtime_s(&self) -> f64 {
        self.msdu_bytes as f64 * 8.0 / self.link_rate_bps
    }

    /// Packets one `v_wake -> v_sleep` window pays for when nothing is
    /// harvested during transmission: `floor(C (v_wake^2 - v_sleep^2) / 2 / e_packet)`.
    pub fn packets_per_window(&self, capacitance_f: f64) -> u64 {
        let window = 0.5 * capacitance_f * (self.v_wake.powi(2) - self.v_sleep.powi(2));
        (window / self.e_packet_j).floor() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeState {
    Cold,
    Booting,
    Transmitting,
    Sleeping,
    Dead,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// Store reached `v_start`; boot energy drawn.
    Boot,
    Packet,
    Sleep,
    Wake,
    /// Voltage fell below `v_min`; back to cold start.
    Dead,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Boot => "boot",
            EventKind::Packet => "packet",
            EventKind::Sleep => "sleep",
            EventKind::Wake => "wake",
            EventKind::Dead => "dead",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimEvent {
    pub t_s: f64,
    pub kind: EventKind,
    /// Store voltage when the event fired (before any energy it draws).
    pub v: f64,
}

/// Energy bookkeeping of one run.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub initial_j: f64,
    pub harvested_j: f64,
    pub consumed_j: f64,
    pub final_j: f64,
}

impl EnergyLedger {
    /// `initial + harvested - consumed - final`, relative to the energy that
    /// flowed.
    pub fn relative_imbalance(&self) -> f64 {
        let scale = (self.initial_j + self.harvested_j).max(f64::MIN_POSITIVE);
        (self.initial_j + self.harvested_j - self.consumed_j - self.final_j).abs() / scale
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    pub events: Vec<SimEvent>,
    pub packets_sent: u64,
    pub bytes_sent: u64,
    pub energy: EnergyLedger,
    pub final_state: NodeState,
}

impl SimTrace {
    /// Time of the first packet, if any.
    pub fn first_packet_s(&self) -> Option<f64> {
        self.events.iter().find(|e| e.kind == EventKind::Packet).map(|e| e.t_s)
    }

    /// Writes `t_s,event,v,packets_cum,bytes_cum`.
    pub fn write_csv<W: Write>(&self, writer: W, msdu_bytes: u32) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t_s", "event", "v", "packets_cum", "bytes_cum"])?;
        let mut packets = 0u64;
        for e in &self.events {
            if e.kind == EventKind::Packet {
                packets += 1;
            }
            w.write_record([
                e.t_s.to_string(),
                e.kind.name().to_string(),
                e.v.to_string(),
                packets.to_string(),
                (packets * msdu_bytes as u64).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

struct Run<'a> {
    cap: Capacitor,
    p_in: f64,
    leak: &'a LeakageCurve,
    t: f64,
    ledger: EnergyLedger,
    events: Vec<SimEvent>,
}

impl Run<'_> {
    fn advance(&mut self, dt: f64, harvest: bool) {
        let p_in = if harvest { self.p_in } else { 0.0 };
        let flow = self.cap.step(p_in, self.leak.power_at(self.cap.v()), dt);
        self.ledger.harvested_j += flow.harvested_j;
        self.ledger.consumed_j += flow.consumed_j;
        self.t += dt;
    }

    fn draw(&mut self, e: f64) {
        self.ledger.consumed_j += self.cap.draw(e);
    }

    fn event(&mut self, kind: EventKind) {
        self.events.push(SimEvent {
            t_s: self.t,
            kind,
            v: self.cap.v(),
        });
    }
}

/// Simulates the active node for `duration_s` at constant incident power.
///
/// COLD charges to `v_start`, boots (drawing `e_boot_j` over `boot_time_s`),
/// then sends packets back to back as long as each leaves the store at or
/// above `v_sleep`. It then sleeps until `v_wake`. Dropping below `v_min`
/// at any point is a brown-out back to COLD. Leakage applies throughout.
pub fn run_active_fsm(
    cfg: &ActiveNodeConfig,
    cap: Capacitor,
    pr_dbm: f64,
    h: &HarvesterModel,
    leak: &LeakageCurve,
    duration_s: f64,
    dt_s: f64,
) -> Result<SimTrace> {
    cfg.validate()?;
    check_dt(dt_s)?;
    if !(duration_s >= 0.0 && duration_s.is_finite()) {
        return Err(Error::Domain(format!("duration must be >= 0 s, got {duration_s}")));
    }
    let e_sleep = cap.energy_at(cfg.v_sleep);
    let airtime = cfg.airtime_s();
    let mut run = Run {
        cap,
        p_in: h.harvested_power(pr_dbm),
        leak,
        t: 0.0,
        ledger: EnergyLedger {
            initial_j: cap.energy_j(),
            ..Default::default()
        },
        events: Vec::new(),
    };
    let mut state = if cap.v() >= cfg.v_wake { NodeState::Sleeping } else { NodeState::Cold };
    let mut packets = 0u64;

    while run.t < duration_s {
        match state {
            NodeState::Cold => {
                if run.cap.v() >= cfg.v_start {
                    run.event(EventKind::Boot);
                    run.draw(cfg.e_boot_j);
                    state = NodeState::Booting;
                } else {
                    run.advance(dt_s, true);
                }
            }
            NodeState::Booting => {
                run.advance(cfg.boot_time_s, true);
                if run.cap.v() < cfg.v_min {
                    run.event(EventKind::Dead);
                    state = NodeState::Dead;
                } else {
                    state = NodeState::Transmitting;
                }
            }
            NodeState::Transmitting => {
                if run.cap.energy_j() - cfg.e_packet_j >= e_sleep {
                    run.event(EventKind::Packet);
                    run.draw(cfg.e_packet_j);
                    packets += 1;
                    run.advance(airtime, cfg.harvest_during_transmit);
                } else {
                    run.event(EventKind::Sleep);
                    state = NodeState::Sleeping;
                    run.advance(dt_s, true);
                }
            }
            NodeState::Sleeping => {
                if run.cap.v() < cfg.v_min {
                    run.event(EventKind::Dead);
                    state = NodeState::Dead;
                } else if run.cap.v() >= cfg.v_wake {
                    run.event(EventKind::Wake);
                    state = NodeState::Transmitting;
                    // Wake-up latency: one step.
                    run.advance(dt_s, true);
                } else {
                    run.advance(dt_s, true);
                }
            }
            NodeState::Dead => {
                state = NodeState::Cold;
                run.advance(dt_s, true);
            }
        }
    }
    run.ledger.final_j = run.cap.energy_j();
    Ok(SimTrace {
        events: run.events,
        packets_sent: packets,
        bytes_sent: packets * cfg.msdu_bytes as u64,
        energy: run.ledger,
        final_state: state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::powersim::capacitor::ACTIVE_CAPACITANCE_F;
    use crate::powersim::charge::min_startup_incident_power;

    fn run(pr: f64, cfg: &ActiveNodeConfig, secs: f64) -> SimTrace {
        run_active_fsm(
            cfg,
            Capacitor::empty(ACTIVE_CAPACITANCE_F).unwrap(),
            pr,
            &HarvesterModel::active(),
            &LeakageCurve::with_startup_circuit(),
            secs,
            1e-3,
        )
        .unwrap()
    }

    #[test]
    fn window_holds_four_packets() {
        let cfg = ActiveNodeConfig::default();
        assert_eq!(cfg.packets_per_window(ACTIVE_CAPACITANCE_F), 4);
    }

    #[test]
    fn duty_cycle_at_2_dbm() {
        let cfg = ActiveNodeConfig {
            harvest_during_transmit: false,
            ..Default::default()
        };
        let tr = run(2.0, &cfg, 30.0);
        let first = tr.first_packet_s().unwrap();
        assert!(first > 1.0 && first < 10.0, "{first}");
        assert!(tr.bytes_sent >= 1024);
        // Every wake-to-sleep window after the first sends exactly 4.
        let mut counts = Vec::new();
        let mut n = 0;
        let mut in_window = false;
        for e in &tr.events {
            match e.kind {
                EventKind::Wake => {
                    in_window = true;
                    n = 0;
                }
                EventKind::Packet if in_window => n += 1,
                EventKind::Sleep if in_window => counts.push(n),
                _ => {}
            }
        }
        assert!(counts.len() > 5);
        assert!(counts.iter().all(|&c| c == 4), "{counts:?}");
    }

    #[test]
    fn discipline_and_conservation() {
        let cfg = ActiveNodeConfig::default();
        for pr in [-2.0, 0.0, 2.0, 6.0] {
            let tr = run(pr, &cfg, 20.0);
            assert!(tr.energy.relative_imbalance() < 1e-6, "{pr}: {:?}", tr.energy);
            assert!(tr.events.windows(2).all(|w| w[1].t_s > w[0].t_s));
            for e in tr.events.iter().filter(|e| e.kind == EventKind::Packet) {
                assert!(e.v > cfg.v_sleep && e.v <= cfg.v_start + 1e-9, "{e:?}");
            }
            let mut booted = false;
            for e in &tr.events {
                match e.kind {
                    EventKind::Boot => {
                        assert!(!booted);
                        booted = true;
                    }
                    EventKind::Dead => booted = false,
                    _ => {}
                }
            }
        }
    }

    #[test]
    fn below_startup_power_sends_nothing() {
        let h = HarvesterModel::active();
        let without = LeakageCurve::without_startup_circuit();
        let pmin = min_startup_incident_power(&without, &h).unwrap();
        let tr = run_active_fsm(
            &ActiveNodeConfig::default(),
            Capacitor::empty(ACTIVE_CAPACITANCE_F).unwrap(),
            pmin - 0.5,
            &h,
            &without,
            60.0,
            1e-3,
        )
        .unwrap();
        assert_eq!(tr.packets_sent, 0);
        assert!(tr.events.is_empty());
    }

    #[test]
    fn brown_out_goes_dead() {
        // Huge boot cost drains the store below v_min.
        let cfg = ActiveNodeConfig {
            e_boot_j: 5.0e-3,
            ..Default::default()
        };
        let tr = run(0.0, &cfg, 40.0);
        assert!(tr.events.iter().any(|e| e.kind == EventKind::Dead));
        assert_eq!(tr.packets_sent, 0);
        assert!(tr.energy.relative_imbalance() < 1e-6);
    }

    #[test]
    fn deterministic_and_csv() {
        let cfg = ActiveNodeConfig::default();
        let a = run(2.0, &cfg, 12.0);
        assert_eq!(a, run(2.0, &cfg, 12.0));
        let mut out = Vec::new();
        a.write_csv(&mut out, cfg.msdu_bytes).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("t_s,event,v,packets_cum,bytes_cum\n"));
        assert!(text.contains(",packet,"));
    }

    #[test]
    fn invalid_thresholds() {
        let cfg = ActiveNodeConfig {
            v_wake: 2.2,
            e_packet_j: 2e-3,
            ..Default::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::ConfigProblems(p)) if p.len() == 2));
    }
}
