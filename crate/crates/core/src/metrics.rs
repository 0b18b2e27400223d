//! Wear-fairness metrics and the converter cost comparison.
//!
//! Per cell, `ta = time spent on / elapsed` and `sta = ta / (n_active /
//! n_total)`; under fair scheduling every cell's `sta` tends to 1 and the
//! spread `max(sta) - min(sta)` tends to 0.

use crate::stack::StackState;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("fairness metrics undefined at elapsed = {0} s")]
    UndefinedAtZeroElapsed(f64),
    #[error("fairness metrics undefined with no active cells")]
    NoActiveCells,
    #[error("percentage savings undefined: total cost with converter is zero")]
    ZeroTotalCost,
}

/// Fairness metrics at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FairnessSnapshot {
    /// Per-cell fraction of elapsed time spent active, in [0, 1].
    pub ta: Vec<f64>,
    /// Per-cell standardised time active: `ta / (n_active / n_total)`.
    pub sta: Vec<f64>,
    /// `max(sta) - min(sta)`.
    pub max_delta_sta: f64,
}

/// Fairness snapshot with the divisor taken from the instantaneous active
/// count of `stack`.
pub fn fairness(stack: &StackState, elapsed: f64) -> Result<FairnessSnapshot, MetricsError> {
    fairness_with_divisor(stack, elapsed, stack.n_active() as f64)
}

/// Fairness snapshot with an explicit active-cell count for the `sta`
/// divisor (pass a time-averaged count for the smoothed variant).
pub fn fairness_with_divisor(
    stack: &StackState,
    elapsed: f64,
    active_for_divisor: f64,
) -> Result<FairnessSnapshot, MetricsError> {
    if elapsed <= 0.0 || elapsed.is_nan() {
        return Err(MetricsError::UndefinedAtZeroElapsed(elapsed));
    }
    if active_for_divisor <= 0.0 || active_for_divisor.is_nan() {
        return Err(MetricsError::NoActiveCells);
    }
    let divisor = active_for_divisor / stack.n_total() as f64;
    let ta: Vec<f64> = stack
        .cells()
        .iter()
        .map(|c| c.t_on_total / elapsed)
        .collect();
    let sta: Vec<f64> = ta.iter().map(|t| t / divisor).collect();
    let max = sta.iter().cloned().fold(f64::MIN, f64::max);
    let min = sta.iter().cloned().fold(f64::MAX, f64::min);
    Ok(FairnessSnapshot {
        ta,
        sta,
        max_delta_sta: max - min,
    })
}

/// Inputs to the lifetime cost comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct CostInputs {
    /// Upfront cost of the power converter (currency).
    pub converter_upfront: f64,
    /// System lifespan (years).
    pub years: u32,
    /// Annual energy production (kWh).
    pub annual_energy: f64,
    /// Energy cost with a converter in the path (currency/kWh).
    pub rate_with_converter: f64,
    /// Energy cost with the converter removed (currency/kWh).
    pub rate_without_converter: f64,
}

impl Default for CostInputs {
    /// 10 kW array over 10 years; the converter-less rate is one cent lower
    /// from recovering the converter's conversion losses.
    fn default() -> Self {
        Self {
            converter_upfront: 2000.0,
            years: 10,
            annual_energy: 10_000.0,
            rate_with_converter: 0.15,
            rate_without_converter: 0.14,
        }
    }
}

/// Output of [`cost_comparison`].
#[derive(Debug, Clone, PartialEq)]
pub struct CostComparison {
    pub cost_with: f64,
    pub cost_without: f64,
    pub savings: f64,
    /// Savings as a percentage of the cost with a converter.
    pub savings_pct: f64,
}

/// Lifetime cost with and without the converter:
/// `cost_with = upfront + years * annual_energy * rate_with`,
/// `cost_without = years * annual_energy * rate_without`.
pub fn cost_comparison(inputs: &CostInputs) -> Result<CostComparison, MetricsError> {
    let years = f64::from(inputs.years);
    let cost_with =
        inputs.converter_upfront + years * (inputs.annual_energy * inputs.rate_with_converter);
    let cost_without = years * (inputs.annual_energy * inputs.rate_without_converter);
    if cost_with == 0.0 {
        return Err(MetricsError::ZeroTotalCost);
    }
    let savings = cost_with - cost_without;
    Ok(CostComparison {
        cost_with,
        cost_without,
        savings,
        savings_pct: 100.0 * savings / cost_with,
    })
}
