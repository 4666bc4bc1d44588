//! Energy life of the nodes: harvesting into a storage capacitor, leakage,
//! the active node's start/wake/sleep cycle and the passive node's
//! operating budget.
//!
//! All integration is explicit Euler on stored energy with `dt <= 1 ms`.
//! Consumption is drawn straight from the capacitor; supply regulation is
//! not modeled.

mod active;
mod capacitor;
mod charge;
mod curves;
mod harvester;
mod leakage;
mod passive;

pub use active::{run_active_fsm, ActiveNodeConfig, EnergyLedger, EventKind, NodeState, SimEvent, SimTrace};
pub use capacitor::{step_capacitor, Capacitor, StepFlow, ACTIVE_CAPACITANCE_F, PASSIVE_CAPACITANCE_F};
pub use charge::{
    fit_efficiency_scale, min_startup_incident_power, time_to_voltage, ChargeTime, MAX_CHARGE_TIME_S,
    MAX_DT_S, MCU_MIN_V,
};
pub use curves::{read_xy_csv, write_xy_csv};
pub use harvester::{
    harvested_power, HarvesterModel, ACTIVE_SENSITIVITY_DBM, DEFAULT_EFFICIENCY_CURVE,
    PASSIVE_EFFICIENCY_SCALE, PASSIVE_SENSITIVITY_DBM,
};
pub use leakage::{LeakageCurve, LeakageVariant};
pub use passive::{passive_steady_state, ClockPower, PassiveNodeModel, SteadyState, SLOW_CLOCK_P_OP_ALT_W};
