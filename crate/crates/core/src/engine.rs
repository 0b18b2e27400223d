//! Fixed-step coupling of the PV array and the electrolyser stack.
//!
//! The array feeds the stack through a blocking diode and a small smoothing
//! capacitor. The capacitor's time constant sits orders of magnitude below
//! the cell RC and the controller period, so its dynamics are replaced by
//! the algebraic node constraint `v_bus = stack_voltage`; the diode becomes
//! `i = max(0, pv_current(v_bus))`. Each step solves this operating point
//! and advances the cell capacitors; once per controller period the power
//! sample is handed to the MPPT controller.
//!
//! [`steady_state_oracle`] solves the same source/load intersection
//! algebraically for a fixed stack size and is kept independent of the
//! stepping path so the two can check each other.

use crate::controller::{mppt_tick_prioritised, ControllerState};
use crate::metrics::{self, MetricsError};
use crate::pv::PvParams;
use crate::stack::{CellParams, StackError, StackState};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error(transparent)]
    Stack(#[from] StackError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Bus-side smoothing capacitor. Under quasi-static coupling the value is
/// carried for documentation only; a stiff integrator for it would hang off
/// the flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BusModel {
    /// Smoothing capacitance (F).
    pub c_bus: f64,
    /// Replace the capacitor ODE with the algebraic node constraint.
    pub quasi_static: bool,
}

impl Default for BusModel {
    fn default() -> Self {
        Self {
            c_bus: 10e-6,
            quasi_static: true,
        }
    }
}

/// Solved bus state at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub v_bus: f64,
    pub i: f64,
    pub p: f64,
}

/// Piecewise-constant irradiance over time. Each `(start, value)` segment
/// holds from its start up to the next segment's start (left-closed), the
/// last one indefinitely.
#[derive(Debug, Clone, PartialEq)]
pub struct IrradianceProfile {
    segments: Vec<(f64, f64)>,
}

impl IrradianceProfile {
    pub fn new(segments: Vec<(f64, f64)>) -> Result<Self, EngineError> {
        if segments.is_empty() {
            return Err(EngineError::InvalidScenario(
                "irradiance profile needs at least one segment".into(),
            ));
        }
        if segments[0].0 > 0.0 {
            return Err(EngineError::InvalidScenario(format!(
                "irradiance profile must cover t = 0, first segment starts at {} s",
                segments[0].0
            )));
        }
        for pair in segments.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(EngineError::InvalidScenario(format!(
                    "irradiance segment starts must increase, got {} s after {} s",
                    pair[1].0, pair[0].0
                )));
            }
        }
        for &(start, g) in &segments {
            if !(g >= 0.0 && g.is_finite() && start.is_finite()) {
                return Err(EngineError::InvalidScenario(format!(
                    "irradiance segment ({start} s, {g} W/m2) out of range"
                )));
            }
        }
        Ok(Self { segments })
    }

    pub fn constant(g: f64) -> Self {
        Self::new(vec![(0.0, g)]).expect("constant profile is valid")
    }

    /// Irradiance at time `t`: the value of the last segment starting at or
    /// before `t`.
    pub fn at(&self, t: f64) -> f64 {
        self.segments
            .iter()
            .rev()
            .find(|(start, _)| *start <= t)
            .map(|&(_, g)| g)
            .unwrap_or(self.segments[0].1)
    }

    pub fn segments(&self) -> &[(f64, f64)] {
        &self.segments
    }

    /// Distinct irradiance values in order of first appearance.
    pub fn levels(&self) -> Vec<f64> {
        let mut levels: Vec<f64> = Vec::new();
        for &(_, g) in &self.segments {
            if !levels.contains(&g) {
                levels.push(g);
            }
        }
        levels
    }
}

/// One simulation scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub duration: f64,
    pub dt: f64,
    /// Cell temperature (degC). The array model is calibrated at its
    /// reference temperature; this field documents the operating condition.
    pub temperature: f64,
    pub profile: IrradianceProfile,
    pub controller_period: f64,
}

impl Scenario {
    /// Constant reference irradiance from power-up.
    pub fn startup() -> Self {
        Self {
            name: "startup".into(),
            duration: 200.0,
            dt: 1e-3,
            temperature: 25.0,
            profile: IrradianceProfile::constant(1000.0),
            controller_period: 1.0,
        }
    }

    /// 600 W/m2 with a 1000 W/m2 plateau between t = 100 s and t = 200 s.
    pub fn irradiance_step() -> Self {
        Self {
            name: "irradiance-step".into(),
            duration: 300.0,
            dt: 1e-3,
            temperature: 25.0,
            profile: IrradianceProfile::new(vec![(0.0, 600.0), (100.0, 1000.0), (200.0, 600.0)])
                .expect("built-in profile is valid"),
            controller_period: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(EngineError::InvalidScenario(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(EngineError::InvalidScenario(format!(
                "duration must be non-negative, got {}",
                self.duration
            )));
        }
        steps_per(self.controller_period, self.dt, "controller_period")?;
        Ok(())
    }
}

/// `interval / dt` as an exact positive integer.
fn steps_per(interval: f64, dt: f64, what: &str) -> Result<u64, EngineError> {
    let ratio = interval / dt;
    let rounded = ratio.round();
    if rounded < 1.0 || rounded.is_nan() || (ratio - rounded).abs() > 1e-6 {
        return Err(EngineError::InvalidScenario(format!(
            "{what} ({interval} s) must be a positive integer multiple of dt ({dt} s)"
        )));
    }
    Ok(rounded as u64)
}

/// Which active-cell count divides the standardised time-active metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StaDivisor {
    /// Active count at the snapshot instant.
    Instantaneous,
    /// Active count averaged over the run so far.
    TimeAveraged,
}

/// Knobs of a run that are not part of the scenario itself.
#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Spacing of output records (s); integer multiple of dt.
    pub record_interval: f64,
    /// Disable to hold the initial stack configuration for the whole run.
    pub controller_enabled: bool,
    pub sta_divisor: StaDivisor,
    /// Optional tie-break ranks for cell selection (see
    /// [`crate::controller::select_cell_prioritised`]).
    pub tie_priority: Option<Vec<usize>>,
    pub bus: BusModel,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            record_interval: 0.1,
            controller_enabled: true,
            sta_divisor: StaDivisor::Instantaneous,
            tie_priority: None,
            bus: BusModel::default(),
        }
    }
}

/// One output row.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRecord {
    pub t_s: f64,
    pub irradiance_wm2: f64,
    pub v_bus_v: f64,
    pub i_a: f64,
    pub p_w: f64,
    pub n_active: usize,
    /// Per-cell standardised time active.
    pub sta: Vec<f64>,
    pub max_delta_sta: f64,
}

/// One cell switch performed during a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchEvent {
    pub t_s: f64,
    pub cell: usize,
    pub activated: bool,
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub records: Vec<SimRecord>,
    pub events: Vec<SwitchEvent>,
    pub stack: StackState,
    pub controller: ControllerState,
    /// Time-averaged active-cell count over the whole run.
    pub mean_active: f64,
}

/// Operating point of the coupled system for the present stack state.
///
/// `v_bus` equals the stack voltage, the blocking diode clips the array
/// current at zero, and `p = v_bus * i`. With no cell connected the bus
/// floats at the array's open-circuit voltage and carries no current.
pub fn solve_operating_point(
    pv: &PvParams,
    stack: &StackState,
    cell_params: &CellParams,
    g: f64,
) -> OperatingPoint {
    if stack.n_active() == 0 {
        return OperatingPoint {
            v_bus: pv.open_circuit_voltage(g),
            i: 0.0,
            p: 0.0,
        };
    }
    let v_bus = stack.stack_voltage(cell_params);
    let i = pv.current(v_bus, g).max(0.0);
    OperatingPoint {
        v_bus,
        i,
        p: v_bus * i,
    }
}

/// Settled operating point of a fixed `n`-cell stack: solves
/// `i = pv_current(n * (v_e + r_e * i), g)` by bisection to 1e-9 A, the
/// cell capacitors having settled at `v_c = i * r_e`.
///
/// The array current falls with voltage while the stack load line rises
/// with current, so the residual is strictly decreasing and the root is
/// unique. A stack whose conduction threshold `n * v_e` reaches the
/// array's open-circuit voltage carries no current.
pub fn steady_state_oracle(
    pv: &PvParams,
    cell_params: &CellParams,
    n: usize,
    g: f64,
) -> OperatingPoint {
    let n_f = n as f64;
    let load_voltage = |i: f64| n_f * (cell_params.v_e + cell_params.r_e * i);
    let residual = |i: f64| pv.current(load_voltage(i), g) - i;

    if residual(0.0) <= 0.0 {
        return OperatingPoint {
            v_bus: load_voltage(0.0),
            i: 0.0,
            p: 0.0,
        };
    }
    let i_ph = pv.i_ph_ref * g / pv.g_ref;
    let mut lo = 0.0;
    let mut hi = 1.1 * i_ph.max(pv.i_ph_ref);
    debug_assert!(residual(hi) < 0.0, "bracket must straddle the root");
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let i = 0.5 * (lo + hi);
    let v_bus = load_voltage(i);
    OperatingPoint {
        v_bus,
        i,
        p: v_bus * i,
    }
}

/// Oracle table `p(n)` for `n = 1..=n_total`.
pub fn steady_state_table(
    pv: &PvParams,
    cell_params: &CellParams,
    n_total: usize,
    g: f64,
) -> Vec<(usize, OperatingPoint)> {
    (1..=n_total)
        .map(|n| (n, steady_state_oracle(pv, cell_params, n, g)))
        .collect()
}

/// Stack size maximising the settled power at irradiance `g`.
pub fn oracle_argmax(
    pv: &PvParams,
    cell_params: &CellParams,
    n_total: usize,
    g: f64,
) -> (usize, OperatingPoint) {
    steady_state_table(pv, cell_params, n_total, g)
        .into_iter()
        .max_by(|a, b| a.1.p.total_cmp(&b.1.p))
        .expect("n_total >= 1")
}

/// Advance the coupled system over the whole scenario.
///
/// Every `dt` the operating point is solved and the cell capacitors
/// stepped with the solved current; at every controller-period boundary
/// (including t = 0) the instantaneous power is sampled and the controller
/// ticked. A record is appended once per record interval, carrying the
/// re-solved operating point and fairness metrics at the record instant.
/// Runs are bit-reproducible for identical inputs.
pub fn run(
    scenario: &Scenario,
    pv: &PvParams,
    cell_params: &CellParams,
    mut stack: StackState,
    mut controller: ControllerState,
    opts: &RunOptions,
) -> Result<RunResult, EngineError> {
    scenario.validate()?;
    if opts.bus.c_bus <= 0.0 || opts.bus.c_bus.is_nan() {
        return Err(EngineError::InvalidScenario(format!(
            "bus capacitance must be positive, got {}",
            opts.bus.c_bus
        )));
    }
    if !opts.bus.quasi_static {
        return Err(EngineError::InvalidScenario(
            "only the quasi-static bus coupling is implemented; set bus.quasi_static = true".into(),
        ));
    }
    let dt = scenario.dt;
    let tick_every = steps_per(scenario.controller_period, dt, "controller_period")?;
    let record_every = steps_per(opts.record_interval, dt, "record_interval")?;
    let n_steps = (scenario.duration / dt + 1e-9).floor() as u64;
    if let Some(priority) = &opts.tie_priority {
        validate_priority(priority, stack.n_total())?;
    }
    if !opts.controller_enabled && stack.n_active() == 0 {
        return Err(EngineError::InvalidScenario(
            "controller disabled with no active cells: power is identically zero".into(),
        ));
    }

    let mut records = Vec::with_capacity((n_steps / record_every) as usize);
    let mut events = Vec::new();
    let mut active_time = 0.0;

    for k in 0..n_steps {
        let t = k as f64 * dt;
        let g = scenario.profile.at(t);

        if opts.controller_enabled && k % tick_every == 0 {
            let op = solve_operating_point(pv, &stack, cell_params, g);
            if let Some(action) =
                mppt_tick_prioritised(&mut controller, &mut stack, op.p, opts.tie_priority.as_deref())
            {
                events.push(SwitchEvent {
                    t_s: t,
                    cell: action.cell,
                    activated: action.activated,
                });
            }
        }

        let op = solve_operating_point(pv, &stack, cell_params, g);
        stack.step_cells(cell_params, op.i, dt)?;
        active_time += stack.n_active() as f64 * dt;

        if (k + 1) % record_every == 0 {
            let t_rec = (k + 1) as f64 * dt;
            records.push(make_record(
                pv,
                &stack,
                cell_params,
                scenario,
                opts,
                t_rec,
                active_time,
            )?);
        }
    }

    let mean_active = if n_steps > 0 {
        active_time / (n_steps as f64 * dt)
    } else {
        0.0
    };
    Ok(RunResult {
        records,
        events,
        stack,
        controller,
        mean_active,
    })
}

fn make_record(
    pv: &PvParams,
    stack: &StackState,
    cell_params: &CellParams,
    scenario: &Scenario,
    opts: &RunOptions,
    t_rec: f64,
    active_time: f64,
) -> Result<SimRecord, EngineError> {
    let g = scenario.profile.at(t_rec);
    let op = solve_operating_point(pv, stack, cell_params, g);
    let divisor_count = match opts.sta_divisor {
        StaDivisor::Instantaneous => stack.n_active() as f64,
        StaDivisor::TimeAveraged => active_time / t_rec,
    };
    let fairness = metrics::fairness_with_divisor(stack, t_rec, divisor_count)?;
    Ok(SimRecord {
        t_s: t_rec,
        irradiance_wm2: g,
        v_bus_v: op.v_bus,
        i_a: op.i,
        p_w: op.p,
        n_active: stack.n_active(),
        sta: fairness.sta,
        max_delta_sta: fairness.max_delta_sta,
    })
}

fn validate_priority(priority: &[usize], n_total: usize) -> Result<(), EngineError> {
    if priority.len() != n_total {
        return Err(EngineError::InvalidScenario(format!(
            "tie priority lists {} ranks for a {}-cell stack",
            priority.len(),
            n_total
        )));
    }
    let mut seen = vec![false; n_total];
    for &rank in priority {
        if rank >= n_total || seen[rank] {
            return Err(EngineError::InvalidScenario(
                "tie priority must be a permutation of 0..n_total".into(),
            ));
        }
        seen[rank] = true;
    }
    Ok(())
}
