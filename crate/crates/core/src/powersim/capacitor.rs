use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Storage capacitor of the active node.
pub const ACTIVE_CAPACITANCE_F: f64 = 1e-3;
/// Storage capacitor of the passive node.
pub const PASSIVE_CAPACITANCE_F: f64 = 22e-6;

/// Energy store. The stored energy is the state; voltage is derived from it
/// so that every update conserves energy exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Capacitor {
    capacitance_f: f64,
    energy_j: f64,
}

/// Energy actually moved by one integration step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepFlow {
    pub harvested_j: f64,
    pub consumed_j: f64,
}

impl Capacitor {
    pub fn new(capacitance_f: f64, v: f64) -> Result<Self> {
        if !(capacitance_f > 0.0 && capacitance_f.is_finite()) {
            return Err(Error::Config(format!("capacitance must be > 0 F, got {capacitance_f}")));
        }
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::Config(format!("capacitor voltage must be >= 0 V, got {v}")));
        }
        Ok(Self {
            capacitance_f,
            energy_j: 0.5 * capacitance_f * v * v,
        })
    }

    pub fn empty(capacitance_f: f64) -> Result<Self> {
        Self::new(capacitance_f, 0.0)
    }

    pub fn capacitance_f(&self) -> f64 {
        self.capacitance_f
    }

    pub fn energy_j(&self) -> f64 {
        self.energy_j
    }

    pub fn v(&self) -> f64 {
        (2.0 * self.energy_j / self.capacitance_f).sqrt()
    }

    /// Stored energy at voltage `v`.
    pub fn energy_at(&self, v: f64) -> f64 {
        0.5 * self.capacitance_f * v * v
    }

    /// Explicit Euler step: `E' = max(0, E + (p_in - p_out) dt)`. When the
    /// store empties, only the energy that was available counts as consumed.
    pub fn step(&mut self, p_in_w: f64, p_out_w: f64, dt_s: f64) -> StepFlow {
        debug_assert!(dt_s > 0.0);
        let harvested_j = p_in_w * dt_s;
        let wanted = p_out_w * dt_s;
        let available = self.energy_j + harvested_j;
        let consumed_j = wanted.min(available);
        self.energy_j = available - consumed_j;
        StepFlow {
            harvested_j,
            consumed_j,
        }
    }

    /// Removes up to `e_j`, returning what was actually drawn.
    pub fn draw(&mut self, e_j: f64) -> f64 {
        let d = e_j.min(self.energy_j);
        self.energy_j -= d;
        d
    }
}

/// Functional form of [`Capacitor::step`].
pub fn step_capacitor(c: Capacitor, p_in_w: f64, p_out_w: f64, dt_s: f64) -> Result<Capacitor> {
    if !(dt_s > 0.0) {
        return Err(Error::Domain(format!("time step must be > 0 s, got {dt_s}")));
    }
    let mut c = c;
    c.step(p_in_w, p_out_w, dt_s);
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_flow_keeps_voltage() {
        let c = Capacitor::new(1e-3, 2.5).unwrap();
        let c2 = step_capacitor(c, 1e-3, 1e-3, 0.01).unwrap();
        assert_eq!(c2.v(), c.v());
    }

    #[test]
    fn window_energy() {
        let lo = Capacitor::new(1e-3, 2.3).unwrap();
        let hi = Capacitor::new(1e-3, 2.6).unwrap();
        assert!((hi.energy_j() - lo.energy_j() - 0.735e-3).abs() < 1e-12);
    }

    #[test]
    fn step_conserves_energy() {
        let mut c = Capacitor::new(22e-6, 1.0).unwrap();
        let e0 = c.energy_j();
        let f = c.step(3e-6, 1e-6, 1e-3);
        let err = (e0 + f.harvested_j - f.consumed_j - c.energy_j()).abs();
        assert!(err <= 1e-12 * e0);
    }

    #[test]
    fn empties_without_going_negative() {
        let mut c = Capacitor::new(1e-3, 0.1).unwrap();
        let e0 = c.energy_j();
        let f = c.step(0.0, 1.0, 1.0);
        assert_eq!(c.energy_j(), 0.0);
        assert_eq!(c.v(), 0.0);
        assert_eq!(f.consumed_j, e0);
    }

    #[test]
    fn invalid_construction() {
        assert!(Capacitor::new(0.0, 1.0).is_err());
        assert!(Capacitor::new(1e-3, -1.0).is_err());
        assert!(step_capacitor(Capacitor::empty(1e-3).unwrap(), 0.0, 0.0, 0.0).is_err());
    }
}
