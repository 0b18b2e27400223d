//! Per-cell electrolyser model and the switchable series stack.
//!
//! A cell is a reversible-potential diode drop `v_e` in series with a
//! parallel RC branch (`r_e`, `c_e`). A connected cell carries the full
//! stack current, which splits between the branch resistor and capacitor:
//!
//! ```text
//! dv_c/dt = (i_stack - v_c / r_e) / c_e        (active)
//! dv_c/dt = -v_c / (r_e * c_e)                 (bypassed, self-discharge)
//! ```
//!
//! Integration is explicit Euler; the step must not exceed one tenth of the
//! branch time constant `tau = r_e * c_e`. Switching a cell in or out
//! preserves its capacitor voltage at the switch instant and resets its
//! time-in-state counter.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum StackError {
    #[error("step size {dt_s} s outside (0, {max_dt_s:.4} s]; explicit Euler needs dt <= tau/10")]
    InvalidStep { dt_s: f64, max_dt_s: f64 },
    #[error("cell index {index} out of range for a {n_total}-cell stack")]
    CellIndexOutOfRange { index: usize, n_total: usize },
}

/// Electrical parameters shared by every cell in the stack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellParams {
    /// Reversible-potential diode drop (V).
    pub v_e: f64,
    /// Branch capacitance (F).
    pub c_e: f64,
    /// Branch resistance (ohm).
    pub r_e: f64,
}

impl Default for CellParams {
    fn default() -> Self {
        Self {
            v_e: 1.5,
            c_e: 0.1,
            r_e: 0.7,
        }
    }
}

impl CellParams {
    /// RC time constant of the branch (s).
    pub fn tau(&self) -> f64 {
        self.r_e * self.c_e
    }

    /// Largest admissible Euler step (s).
    pub fn max_dt(&self) -> f64 {
        self.tau() / 10.0
    }

    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [("v_e", self.v_e), ("c_e", self.c_e), ("r_e", self.r_e)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("cell parameter {name} must be positive, got {v}"));
            }
        }
        Ok(())
    }
}

/// State of one electrolyser cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellState {
    /// Whether the cell is switched into the series stack.
    pub active: bool,
    /// Capacitor voltage (V); never negative.
    pub v_c: f64,
    /// Time spent in the current on/off state (s).
    pub t_in_state: f64,
    /// Cumulative time spent active (s).
    pub t_on_total: f64,
}

impl CellState {
    pub fn idle() -> Self {
        Self {
            active: false,
            v_c: 0.0,
            t_in_state: 0.0,
            t_on_total: 0.0,
        }
    }
}

/// Ordered, fixed-length collection of cells forming the series stack.
#[derive(Debug, Clone, PartialEq)]
pub struct StackState {
    cells: Vec<CellState>,
}

impl StackState {
    /// Stack of `n_total` cells, all bypassed and uncharged.
    pub fn new(n_total: usize) -> Self {
        Self {
            cells: vec![CellState::idle(); n_total],
        }
    }

    /// Stack with the first `n_active` cells switched in; used for frozen
    /// (controller-disabled) runs.
    pub fn with_first_active(n_total: usize, n_active: usize) -> Self {
        let mut stack = Self::new(n_total);
        for cell in stack.cells.iter_mut().take(n_active) {
            cell.active = true;
        }
        stack
    }

    pub fn from_cells(cells: Vec<CellState>) -> Self {
        Self { cells }
    }

    pub fn cells(&self) -> &[CellState] {
        &self.cells
    }

    pub fn n_total(&self) -> usize {
        self.cells.len()
    }

    pub fn n_active(&self) -> usize {
        self.cells.iter().filter(|c| c.active).count()
    }

    /// Series voltage of the connected cells: sum of `v_e + v_c` over active
    /// cells. Zero when nothing is connected; bypassed cells contribute
    /// nothing.
    pub fn stack_voltage(&self, params: &CellParams) -> f64 {
        self.cells
            .iter()
            .filter(|c| c.active)
            .map(|c| params.v_e + c.v_c)
            .sum()
    }

    /// Advance every cell by one Euler step under stack current `i_stack`.
    ///
    /// Active cells charge toward `i_stack * r_e`; bypassed cells decay
    /// toward zero through their own branch resistance. Time counters
    /// advance for all cells.
    pub fn step_cells(
        &mut self,
        params: &CellParams,
        i_stack: f64,
        dt: f64,
    ) -> Result<(), StackError> {
        let max_dt = params.max_dt();
        // 1e-9 relative slack so a dt written as the decimal tau/10 is not
        // rejected over its f64 representation
        if !(dt > 0.0 && dt <= max_dt * (1.0 + 1e-9)) {
            return Err(StackError::InvalidStep {
                dt_s: dt,
                max_dt_s: max_dt,
            });
        }
        debug_assert!(i_stack >= 0.0, "blocking diode upstream keeps i >= 0");
        for cell in &mut self.cells {
            if cell.active {
                cell.v_c += dt * (i_stack - cell.v_c / params.r_e) / params.c_e;
                cell.t_on_total += dt;
            } else {
                cell.v_c -= dt * cell.v_c / params.tau();
            }
            cell.t_in_state += dt;
        }
        Ok(())
    }

    /// Switch one cell in or out. The capacitor holds its charge across the
    /// switch instant; the time-in-state counter resets. Requesting the
    /// state the cell is already in is a no-op (counters untouched).
    pub fn set_cell(&mut self, index: usize, active: bool) -> Result<(), StackError> {
        let n_total = self.n_total();
        let cell = self
            .cells
            .get_mut(index)
            .ok_or(StackError::CellIndexOutOfRange { index, n_total })?;
        if cell.active != active {
            cell.active = active;
            cell.t_in_state = 0.0;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params() -> CellParams {
        CellParams::default()
    }

    /// Closed-form solution of the branch ODE under constant current:
    /// v(t) = i*r_e + (v0 - i*r_e) * exp(-t/tau).
    fn exact_response(p: &CellParams, v0: f64, i: f64, t: f64) -> f64 {
        let v_inf = i * p.r_e;
        v_inf + (v0 - v_inf) * (-t / p.tau()).exp()
    }

    #[test]
    fn series_voltage_sums_active_cells() {
        let p = params();
        let mut stack = StackState::with_first_active(30, 20);
        assert!((stack.stack_voltage(&p) - 30.0).abs() < 1e-12);
        for cell in &mut stack.cells {
            cell.v_c = 3.81;
        }
        assert!((stack.stack_voltage(&p) - 106.2).abs() < 1e-9);
    }

    #[test]
    fn empty_stack_has_zero_voltage() {
        let p = params();
        assert_eq!(StackState::new(30).stack_voltage(&p), 0.0);
        assert_eq!(StackState::new(0).stack_voltage(&p), 0.0);
    }

    #[test]
    fn euler_step_matches_hand_evaluation() {
        let p = params();
        let mut stack = StackState::with_first_active(1, 1);
        stack.cells[0].v_c = 1.0;
        stack.step_cells(&p, 5.0, 1e-3).unwrap();
        // 1.0 + 0.001 * (5 - 1/0.7) / 0.1
        assert!((stack.cells[0].v_c - 1.0357142857142857).abs() < 1e-12);
    }

    #[test]
    fn bypassed_cell_decays_one_time_constant() {
        let p = params();
        let mut stack = StackState::new(1);
        stack.cells[0].v_c = 3.5;
        for _ in 0..70 {
            stack.step_cells(&p, 0.0, 1e-3).unwrap();
        }
        let expected = 3.5 / std::f64::consts::E;
        let rel = (stack.cells[0].v_c - expected).abs() / expected;
        assert!(rel <= 0.01, "v_c = {}, rel err {rel}", stack.cells[0].v_c);
    }

    #[test]
    fn active_cell_settles_at_ir_product() {
        let p = params();
        let mut stack = StackState::with_first_active(1, 1);
        for _ in 0..10_000 {
            stack.step_cells(&p, 5.0, 1e-3).unwrap();
        }
        assert!((stack.cells[0].v_c - 3.5).abs() < 1e-9);
    }

    #[test]
    fn euler_tracks_closed_form_within_half_percent_over_ten_tau() {
        let p = params();
        let dt = 1e-3;
        let steps = (10.0 * p.tau() / dt).round() as usize;

        // charging from empty at constant 5 A; error normalised by the
        // response amplitude i*r_e
        let mut stack = StackState::with_first_active(1, 1);
        let mut worst = 0.0_f64;
        for k in 1..=steps {
            stack.step_cells(&p, 5.0, dt).unwrap();
            let exact = exact_response(&p, 0.0, 5.0, k as f64 * dt);
            worst = worst.max((stack.cells[0].v_c - exact).abs() / 3.5);
        }
        assert!(worst <= 0.005, "charging sup error {worst}");

        // free decay from 3.5 V; normalised by the initial amplitude
        let mut stack = StackState::new(1);
        stack.cells[0].v_c = 3.5;
        let mut worst = 0.0_f64;
        for k in 1..=steps {
            stack.step_cells(&p, 0.0, dt).unwrap();
            let exact = exact_response(&p, 3.5, 0.0, k as f64 * dt);
            worst = worst.max((stack.cells[0].v_c - exact).abs() / 3.5);
        }
        assert!(worst <= 0.005, "decay sup error {worst}");
    }

    #[test]
    fn step_size_guard_rejects_coarse_dt() {
        let p = params();
        let mut stack = StackState::new(2);
        assert!(matches!(
            stack.step_cells(&p, 1.0, 0.0071),
            Err(StackError::InvalidStep { .. })
        ));
        assert!(stack.step_cells(&p, 1.0, 0.007).is_ok());
        assert!(matches!(
            stack.step_cells(&p, 1.0, 0.0),
            Err(StackError::InvalidStep { .. })
        ));
    }

    #[test]
    fn switching_preserves_charge_and_resets_timer() {
        let mut stack = StackState::new(3);
        stack.cells[1].v_c = 2.2;
        stack.cells[1].t_in_state = 12.0;
        stack.set_cell(1, true).unwrap();
        assert!(stack.cells[1].active);
        assert_eq!(stack.cells[1].t_in_state, 0.0);
        assert_eq!(stack.cells[1].v_c, 2.2);

        stack.cells[1].t_in_state = 4.0;
        stack.set_cell(1, false).unwrap();
        assert!(!stack.cells[1].active);
        assert_eq!(stack.cells[1].t_in_state, 0.0);
        assert_eq!(stack.cells[1].v_c, 2.2);
    }

    #[test]
    fn setting_current_state_is_a_noop() {
        let mut stack = StackState::with_first_active(2, 1);
        stack.cells[0].t_in_state = 5.0;
        stack.set_cell(0, true).unwrap();
        assert_eq!(stack.cells[0].t_in_state, 5.0);
    }

    #[test]
    fn out_of_range_index_is_rejected() {
        let mut stack = StackState::new(3);
        assert!(matches!(
            stack.set_cell(3, true),
            Err(StackError::CellIndexOutOfRange { index: 3, n_total: 3 })
        ));
    }

    #[test]
    fn time_counters_advance_with_steps() {
        let p = params();
        let mut stack = StackState::with_first_active(2, 1);
        for _ in 0..100 {
            stack.step_cells(&p, 1.0, 1e-3).unwrap();
        }
        assert!((stack.cells[0].t_in_state - 0.1).abs() < 1e-12);
        assert!((stack.cells[0].t_on_total - 0.1).abs() < 1e-12);
        assert!((stack.cells[1].t_in_state - 0.1).abs() < 1e-12);
        assert_eq!(stack.cells[1].t_on_total, 0.0);
    }

    proptest! {
        #[test]
        fn capacitor_voltage_never_negative(
            v0 in 0.0_f64..10.0,
            i in 0.0_f64..10.0,
            dt in 1e-4_f64..7e-3,
            switches in proptest::collection::vec(any::<bool>(), 0..40),
        ) {
            let p = params();
            let mut stack = StackState::new(1);
            stack.cells[0].v_c = v0;
            for on in switches {
                stack.set_cell(0, on).unwrap();
                for _ in 0..25 {
                    stack.step_cells(&p, i, dt).unwrap();
                    prop_assert!(stack.cells[0].v_c >= 0.0);
                }
            }
        }

        #[test]
        fn charging_converges_monotonically(
            v0 in 0.0_f64..10.0,
            i in 0.0_f64..10.0,
        ) {
            let p = params();
            let mut stack = StackState::with_first_active(1, 1);
            stack.cells[0].v_c = v0;
            let target = i * p.r_e;
            let mut gap = (v0 - target).abs();
            for _ in 0..2_000 {
                stack.step_cells(&p, i, 1e-3).unwrap();
                let next_gap = (stack.cells[0].v_c - target).abs();
                prop_assert!(next_gap <= gap + 1e-12);
                gap = next_gap;
            }
            prop_assert!(gap < 1e-6);
        }
    }
}
