//! Hill-climbing MPPT on the number of active cells, with wear-levelled
//! cell selection.
//!
//! Once per controller period the stack power is sampled and compared with
//! the previous sample. A strict decrease reverses the climb direction.
//! The controller then switches exactly one cell: when adding it activates
//! the cell that has been bypassed the longest, when removing it
//! deactivates the cell that has been connected the longest (ties broken by
//! lowest index). Longest-first selection makes a round-robin rotation
//! emerge on its own, so every cell accumulates the same duty over time.
//!
//! Two clamps keep the climb total: a removal that would empty the stack is
//! skipped, and an addition with every cell already active is skipped; both
//! reverse the direction instead of switching.

use crate::stack::StackState;

/// Climb direction: whether the next switch adds or removes a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Add,
    Remove,
}

impl Direction {
    pub fn flipped(self) -> Self {
        match self {
            Direction::Add => Direction::Remove,
            Direction::Remove => Direction::Add,
        }
    }
}

/// Persistent controller state between ticks.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState {
    pub direction: Direction,
    /// Power sample from the previous tick (W).
    pub p_prev: f64,
    pub tick_count: u64,
}

impl ControllerState {
    pub fn new() -> Self {
        Self {
            direction: Direction::Add,
            p_prev: 0.0,
            tick_count: 0,
        }
    }
}

impl Default for ControllerState {
    fn default() -> Self {
        Self::new()
    }
}

/// One cell switch performed by a tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwitchAction {
    pub cell: usize,
    pub activated: bool,
}

/// Index of the cell to switch next: the one with maximal time-in-state
/// among cells whose state differs from `want_active`, lowest index on
/// ties. `None` when no candidate exists.
pub fn select_cell(stack: &StackState, want_active: bool) -> Option<usize> {
    select_cell_prioritised(stack, want_active, None)
}

/// As [`select_cell`], but ties broken by lowest rank in `priority`
/// (`priority[i]` is the rank of cell `i`). Identity ranks reproduce the
/// lowest-index rule; a permutation reorders the startup activation order
/// without touching anything else.
pub fn select_cell_prioritised(
    stack: &StackState,
    want_active: bool,
    priority: Option<&[usize]>,
) -> Option<usize> {
    let mut best: Option<(usize, f64, usize)> = None;
    for (index, cell) in stack.cells().iter().enumerate() {
        if cell.active == want_active {
            continue;
        }
        let rank = priority.map_or(index, |p| p[index]);
        let better = match best {
            None => true,
            Some((_, t, r)) => cell.t_in_state > t || (cell.t_in_state == t && rank < r),
        };
        if better {
            best = Some((index, cell.t_in_state, rank));
        }
    }
    best.map(|(index, _, _)| index)
}

/// One controller tick with the current power sample.
///
/// Reverses direction on a strict power decrease, switches at most one
/// cell subject to the clamps, and stores the sample for the next tick.
/// Returns the switch performed, if any.
pub fn mppt_tick(
    ctrl: &mut ControllerState,
    stack: &mut StackState,
    p_curr: f64,
) -> Option<SwitchAction> {
    mppt_tick_prioritised(ctrl, stack, p_curr, None)
}

/// As [`mppt_tick`], with an optional tie-break priority (see
/// [`select_cell_prioritised`]).
pub fn mppt_tick_prioritised(
    ctrl: &mut ControllerState,
    stack: &mut StackState,
    p_curr: f64,
    priority: Option<&[usize]>,
) -> Option<SwitchAction> {
    if p_curr < ctrl.p_prev {
        ctrl.direction = ctrl.direction.flipped();
    }

    let action = match ctrl.direction {
        Direction::Add => match select_cell_prioritised(stack, true, priority) {
            Some(cell) => {
                stack.set_cell(cell, true).expect("selected cell in range");
                Some(SwitchAction {
                    cell,
                    activated: true,
                })
            }
            // every cell already active: skip the switch, reverse instead
            None => {
                ctrl.direction = ctrl.direction.flipped();
                None
            }
        },
        Direction::Remove => {
            if stack.n_active() > 1 {
                let cell = select_cell_prioritised(stack, false, priority)
                    .expect("an active cell exists");
                stack.set_cell(cell, false).expect("selected cell in range");
                Some(SwitchAction {
                    cell,
                    activated: false,
                })
            } else {
                // single-cell floor: an empty stack would pin power at zero
                // and stall the climb, so keep one cell on and reverse
                ctrl.direction = ctrl.direction.flipped();
                None
            }
        }
    };

    ctrl.p_prev = p_curr;
    ctrl.tick_count += 1;
    action
}
