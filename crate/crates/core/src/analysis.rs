//! Helpers for interrogating recorded runs: oscillation bands, band entry
//! times, and windowed envelopes of the fairness spread.

use crate::engine::SimRecord;
use std::collections::BTreeSet;

/// Distinct active-cell counts over records with `t_from < t_s <= t_to`.
pub fn counts_in_window(records: &[SimRecord], t_from: f64, t_to: f64) -> BTreeSet<usize> {
    records
        .iter()
        .filter(|r| r.t_s > t_from && r.t_s <= t_to)
        .map(|r| r.n_active)
        .collect()
}

/// Distinct active-cell counts over the trailing `fraction` of the run.
pub fn trailing_band(records: &[SimRecord], fraction: f64) -> BTreeSet<usize> {
    match records.last() {
        Some(last) => counts_in_window(records, last.t_s * (1.0 - fraction), last.t_s),
        None => BTreeSet::new(),
    }
}

/// Time of the first record after `t_after` whose active count lies in
/// `band`.
pub fn first_time_in_band(records: &[SimRecord], band: &[usize], t_after: f64) -> Option<f64> {
    records
        .iter()
        .find(|r| r.t_s > t_after && band.contains(&r.n_active))
        .map(|r| r.t_s)
}

/// Whether every record with `t_from < t_s <= t_to` stays inside `band`.
pub fn stays_in_band(records: &[SimRecord], band: &[usize], t_from: f64, t_to: f64) -> bool {
    records
        .iter()
        .filter(|r| r.t_s > t_from && r.t_s <= t_to)
        .all(|r| band.contains(&r.n_active))
}

/// Per-window maxima of `max_delta_sta` over consecutive windows of
/// `window` seconds starting at `t_from`. Only full windows are reported.
pub fn delta_sta_envelope(records: &[SimRecord], t_from: f64, window: f64) -> Vec<f64> {
    let t_end = match records.last() {
        Some(r) => r.t_s,
        None => return Vec::new(),
    };
    let mut envelope = Vec::new();
    let mut start = t_from;
    while start + window <= t_end + 1e-9 {
        let max = records
            .iter()
            .filter(|r| r.t_s > start && r.t_s <= start + window)
            .map(|r| r.max_delta_sta)
            .fold(f64::NEG_INFINITY, f64::max);
        if max.is_finite() {
            envelope.push(max);
        }
        start += window;
    }
    envelope
}

/// `max_delta_sta` of the last record at or before `t`.
pub fn delta_sta_at(records: &[SimRecord], t: f64) -> Option<f64> {
    records
        .iter()
        .rev()
        .find(|r| r.t_s <= t + 1e-9)
        .map(|r| r.max_delta_sta)
}

/// Mean power over records with `t_from < t_s <= t_to`.
pub fn mean_power(records: &[SimRecord], t_from: f64, t_to: f64) -> Option<f64> {
    let powers: Vec<f64> = records
        .iter()
        .filter(|r| r.t_s > t_from && r.t_s <= t_to)
        .map(|r| r.p_w)
        .collect();
    if powers.is_empty() {
        None
    } else {
        Some(powers.iter().sum::<f64>() / powers.len() as f64)
    }
}
