//! Simulator for a photovoltaic array wired directly to a series stack of
//! switchable electrolyser cells, with no power converter in between.
//!
//! Maximum power point tracking is done on the load side: a hill-climbing
//! controller adds or removes cells from the series stack once per second,
//! always switching the cell that has been in its present state the longest
//! so that wear spreads evenly across the stack.
//!
//! Module map:
//!
//! * [`pv`] — calibrated single-diode array model
//! * [`stack`] — per-cell electrolyser model and the switchable series stack
//! * [`controller`] — hill-climbing MPPT with wear-levelled cell selection
//! * [`engine`] — fixed-step coupling of source and stack, plus the
//!   steady-state oracle used for verification
//! * [`metrics`] — time-active fairness metrics and the converter cost model
//! * [`analysis`] — helpers for interrogating recorded runs
//! * [`config`] / [`output`] / [`cli`] — scenario runner plumbing

pub mod analysis;
pub mod cli;
pub mod config;
pub mod controller;
pub mod engine;
pub mod metrics;
pub mod output;
pub mod pv;
pub mod stack;

pub use controller::{ControllerState, Direction, SwitchAction};
pub use engine::{
    BusModel, EngineError, IrradianceProfile, OperatingPoint, RunOptions, RunResult, Scenario,
    SimRecord, StaDivisor, SwitchEvent,
};
pub use metrics::{CostComparison, CostInputs, FairnessSnapshot, MetricsError};
pub use pv::{PvAnchors, PvError, PvParams};
pub use stack::{CellParams, CellState, StackError, StackState};
