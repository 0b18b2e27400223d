//! CSV and summary writers. The CSV layout is the plotting interface:
//! `t_s,irradiance_wm2,v_bus_v,i_a,p_w,n_active,max_delta_sta` followed by
//! one `sta_cell_<k>` column per cell.

use crate::analysis;
use crate::engine::{oracle_argmax, RunResult, Scenario};
use crate::metrics::CostComparison;
use crate::pv::PvParams;
use crate::stack::CellParams;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

/// Fixed CSV header columns ahead of the per-cell block.
pub const CSV_FIXED_HEADER: &str = "t_s,irradiance_wm2,v_bus_v,i_a,p_w,n_active,max_delta_sta";

pub fn csv_header(n_total: usize) -> String {
    let mut header = String::from(CSV_FIXED_HEADER);
    for k in 0..n_total {
        write!(header, ",sta_cell_{k}").unwrap();
    }
    header
}

/// Render the full time series as CSV text.
pub fn timeseries_csv(result: &RunResult) -> String {
    let n_total = result.stack.n_total();
    let mut out = csv_header(n_total);
    out.push('\n');
    for r in &result.records {
        write!(
            out,
            "{:.3},{:.1},{:.6},{:.6},{:.6},{},{:.6}",
            r.t_s, r.irradiance_wm2, r.v_bus_v, r.i_a, r.p_w, r.n_active, r.max_delta_sta
        )
        .unwrap();
        for sta in &r.sta {
            write!(out, ",{sta:.6}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_timeseries(path: &Path, result: &RunResult) -> io::Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(timeseries_csv(result).as_bytes())?;
    Ok(())
}

/// Human-readable run summary: converged band, fairness endpoint, achieved
/// power against the steady-state oracle, and the converter cost
/// comparison.
pub fn summary_text(
    scenario: &Scenario,
    pv: &PvParams,
    cell_params: &CellParams,
    result: &RunResult,
    cost: &CostComparison,
) -> String {
    let mut out = String::new();
    let n_total = result.stack.n_total();
    writeln!(out, "run summary").unwrap();
    writeln!(out, "===========").unwrap();
    writeln!(
        out,
        "scenario:          {} ({} s at dt = {} s, controller period {} s)",
        scenario.name, scenario.duration, scenario.dt, scenario.controller_period
    )
    .unwrap();
    writeln!(
        out,
        "stack:             {} cells, temperature {} degC",
        n_total, scenario.temperature
    )
    .unwrap();

    writeln!(out).unwrap();
    writeln!(out, "steady-state oracle").unwrap();
    for g in scenario.profile.levels() {
        let (n_star, op) = oracle_argmax(pv, cell_params, n_total, g);
        writeln!(
            out,
            "  g = {:6.1} W/m2: best n = {:2}, p = {:.3} W at {:.3} V",
            g, n_star, op.p, op.v_bus
        )
        .unwrap();
    }

    writeln!(out).unwrap();
    if result.records.is_empty() {
        writeln!(out, "no records (zero-duration run)").unwrap();
    } else {
        let last = result.records.last().unwrap();
        writeln!(out, "active-cell band (trailing half of each segment):").unwrap();
        for (start, end, g) in segment_spans(scenario) {
            let band = analysis::counts_in_window(&result.records, 0.5 * (start + end), end);
            let band_str = band
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(", ");
            writeln!(
                out,
                "  t in ({start:.0}, {end:.0}] s at {g:.1} W/m2: {{{band_str}}}"
            )
            .unwrap();
        }
        writeln!(
            out,
            "switch events:     {} ({} activations)",
            result.events.len(),
            result.events.iter().filter(|e| e.activated).count()
        )
        .unwrap();
        writeln!(out, "final max delta STA: {:.6}", last.max_delta_sta).unwrap();

        let g_end = last.irradiance_wm2;
        let (n_star, op) = oracle_argmax(pv, cell_params, n_total, g_end);
        let window = 0.1 * last.t_s;
        if let Some(mean_p) = analysis::mean_power(&result.records, last.t_s - window, last.t_s) {
            writeln!(
                out,
                "achieved power (trailing 10% mean): {:.3} W = {:.2}% of oracle optimum \
                 {:.3} W (n = {}) at g = {:.1} W/m2",
                mean_p,
                100.0 * mean_p / op.p,
                op.p,
                n_star,
                g_end
            )
            .unwrap();
        }
        writeln!(out, "mean active cells: {:.3}", result.mean_active).unwrap();
    }

    writeln!(out).unwrap();
    writeln!(out, "converter cost comparison").unwrap();
    writeln!(out, "  with converter:    {:.2}", cost.cost_with).unwrap();
    writeln!(out, "  without converter: {:.2}", cost.cost_without).unwrap();
    writeln!(
        out,
        "  savings:           {:.2} ({:.3}%)",
        cost.savings, cost.savings_pct
    )
    .unwrap();
    out
}

/// Profile segments as `(start, end, irradiance)`, clipped to the scenario
/// duration.
fn segment_spans(scenario: &Scenario) -> Vec<(f64, f64, f64)> {
    let segments = scenario.profile.segments();
    let mut spans = Vec::new();
    for (k, &(start, g)) in segments.iter().enumerate() {
        let end = segments
            .get(k + 1)
            .map(|&(next, _)| next)
            .unwrap_or(scenario.duration)
            .min(scenario.duration);
        if start < end {
            spans.push((start.max(0.0), end, g));
        }
    }
    spans
}

/// Steady-state power table for each irradiance level, argmax marked.
pub fn oracle_table_text(
    pv: &PvParams,
    cell_params: &CellParams,
    n_total: usize,
    levels: &[f64],
) -> String {
    let mut out = String::new();
    for &g in levels {
        writeln!(out, "# steady-state operating points at g = {g} W/m2").unwrap();
        writeln!(out, "{:>3}  {:>12}  {:>10}  {:>12}", "n", "v_bus_v", "i_a", "p_w").unwrap();
        let table = crate::engine::steady_state_table(pv, cell_params, n_total, g);
        let best = table
            .iter()
            .max_by(|a, b| a.1.p.total_cmp(&b.1.p))
            .map(|(n, _)| *n)
            .unwrap_or(0);
        for (n, op) in &table {
            let marker = if *n == best { "  <- max" } else { "" };
            writeln!(
                out,
                "{n:>3}  {:>12.6}  {:>10.6}  {:>12.6}{marker}",
                op.v_bus, op.i, op.p
            )
            .unwrap();
        }
        writeln!(out).unwrap();
    }
    out
}
