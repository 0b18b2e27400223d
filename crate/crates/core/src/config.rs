//! Run configuration: a single TOML file with every knob, all optional.
//! Unknown keys are rejected so typos surface instead of silently falling
//! back to defaults.

use crate::engine::{BusModel, IrradianceProfile, RunOptions, Scenario, StaDivisor};
use crate::metrics::CostInputs;
use crate::pv::PvAnchors;
use crate::stack::CellParams;
use serde::Deserialize;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Built-in scenario name: "startup" or "irradiance-step".
    pub scenario: Option<String>,
    /// Output directory for timeseries.csv and summary.txt.
    pub out_dir: Option<String>,
    pub pv: PvSection,
    pub cell: CellSection,
    pub stack: StackSection,
    pub sim: SimSection,
    pub bus: BusSection,
    pub metrics: MetricsSection,
    pub cost: CostSection,
    /// Inline scenario; mutually exclusive with `scenario`.
    pub scenario_def: Option<ScenarioDef>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PvSection {
    pub isc: f64,
    pub vmp: f64,
    pub pmp: f64,
    pub voc: f64,
    pub g_ref: f64,
    pub t_ref: f64,
}

impl Default for PvSection {
    fn default() -> Self {
        let a = PvAnchors::default();
        Self {
            isc: a.isc,
            vmp: a.vmp,
            pmp: a.pmp,
            voc: a.voc,
            g_ref: a.g_ref,
            t_ref: a.t_ref,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CellSection {
    pub v_e: f64,
    pub c_e: f64,
    pub r_e: f64,
}

impl Default for CellSection {
    fn default() -> Self {
        let c = CellParams::default();
        Self {
            v_e: c.v_e,
            c_e: c.c_e,
            r_e: c.r_e,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StackSection {
    pub n_total: usize,
}

impl Default for StackSection {
    fn default() -> Self {
        Self { n_total: 30 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub dt: f64,
    pub controller_period: f64,
    pub record_interval: f64,
    /// Overrides the scenario's default duration when set.
    pub duration: Option<f64>,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            controller_period: 1.0,
            record_interval: 0.1,
            duration: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BusSection {
    pub c_bus: f64,
    pub quasi_static: bool,
}

impl Default for BusSection {
    fn default() -> Self {
        let b = BusModel::default();
        Self {
            c_bus: b.c_bus,
            quasi_static: b.quasi_static,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsSection {
    pub sta_divisor: StaDivisorSetting,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum StaDivisorSetting {
    #[default]
    Instantaneous,
    TimeAveraged,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostSection {
    pub converter_upfront: f64,
    pub years: u32,
    pub annual_energy: f64,
    pub rate_with_converter: f64,
    pub rate_without_converter: f64,
}

impl Default for CostSection {
    fn default() -> Self {
        let c = CostInputs::default();
        Self {
            converter_upfront: c.converter_upfront,
            years: c.years,
            annual_energy: c.annual_energy,
            rate_with_converter: c.rate_with_converter,
            rate_without_converter: c.rate_without_converter,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDef {
    pub duration: f64,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    /// Piecewise-constant irradiance as `[[t_start, value], ...]`.
    pub irradiance: Vec<[f64; 2]>,
}

fn default_temperature() -> f64 {
    25.0
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
            .map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))
    }

    pub fn anchors(&self) -> PvAnchors {
        PvAnchors {
            isc: self.pv.isc,
            vmp: self.pv.vmp,
            pmp: self.pv.pmp,
            voc: self.pv.voc,
            g_ref: self.pv.g_ref,
            t_ref: self.pv.t_ref,
        }
    }

    pub fn cell_params(&self) -> Result<CellParams, ConfigError> {
        let params = CellParams {
            v_e: self.cell.v_e,
            c_e: self.cell.c_e,
            r_e: self.cell.r_e,
        };
        params.validate().map_err(ConfigError::Invalid)?;
        Ok(params)
    }

    pub fn n_total(&self) -> Result<usize, ConfigError> {
        if self.stack.n_total == 0 {
            return Err(ConfigError::Invalid("stack.n_total must be at least 1".into()));
        }
        Ok(self.stack.n_total)
    }

    pub fn cost_inputs(&self) -> CostInputs {
        CostInputs {
            converter_upfront: self.cost.converter_upfront,
            years: self.cost.years,
            annual_energy: self.cost.annual_energy,
            rate_with_converter: self.cost.rate_with_converter,
            rate_without_converter: self.cost.rate_without_converter,
        }
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            record_interval: self.sim.record_interval,
            controller_enabled: true,
            sta_divisor: match self.metrics.sta_divisor {
                StaDivisorSetting::Instantaneous => StaDivisor::Instantaneous,
                StaDivisorSetting::TimeAveraged => StaDivisor::TimeAveraged,
            },
            tie_priority: None,
            bus: BusModel {
                c_bus: self.bus.c_bus,
                quasi_static: self.bus.quasi_static,
            },
        }
    }

    /// Resolve the scenario from the name, the inline definition, or the
    /// startup default, then apply [sim] and CLI overrides.
    pub fn scenario(
        &self,
        name_override: Option<&str>,
        duration_override: Option<f64>,
        dt_override: Option<f64>,
    ) -> Result<Scenario, ConfigError> {
        if self.scenario.is_some() && self.scenario_def.is_some() {
            return Err(ConfigError::Invalid(
                "set either `scenario` or `scenario_def`, not both".into(),
            ));
        }
        let mut scenario = match (name_override, &self.scenario_def) {
            (Some(name), _) => Self::builtin(name)?,
            (None, Some(def)) => Self::scenario_from_def(def)?,
            (None, None) => Self::builtin(self.scenario.as_deref().unwrap_or("startup"))?,
        };
        scenario.dt = dt_override.unwrap_or(self.sim.dt);
        scenario.controller_period = self.sim.controller_period;
        if let Some(d) = duration_override.or(self.sim.duration) {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(ConfigError::Invalid(format!(
                    "duration must be non-negative, got {d}"
                )));
            }
            scenario.duration = d;
        }
        Ok(scenario)
    }

    fn builtin(name: &str) -> Result<Scenario, ConfigError> {
        match name {
            "startup" => Ok(Scenario::startup()),
            "irradiance-step" => Ok(Scenario::irradiance_step()),
            other => Err(ConfigError::Invalid(format!(
                "unknown scenario `{other}` (expected `startup` or `irradiance-step`)"
            ))),
        }
    }

    fn scenario_from_def(def: &ScenarioDef) -> Result<Scenario, ConfigError> {
        let segments = def.irradiance.iter().map(|&[t, g]| (t, g)).collect();
        let profile = IrradianceProfile::new(segments)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(Scenario {
            name: "custom".into(),
            duration: def.duration,
            dt: 1e-3,
            temperature: def.temperature,
            profile,
            controller_period: 1.0,
        })
    }
}

/// Parse a tie-break permutation file: whitespace-separated cell indices,
/// `#` comments allowed.
pub fn parse_priority_file(text: &str, n_total: usize) -> Result<Vec<usize>, ConfigError> {
    let mut order = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for token in line.split_whitespace() {
            let index: usize = token.parse().map_err(|_| {
                ConfigError::Invalid(format!("seed-order entry `{token}` is not a cell index"))
            })?;
            order.push(index);
        }
    }
    if order.len() != n_total {
        return Err(ConfigError::Invalid(format!(
            "seed-order lists {} cells, stack has {}",
            order.len(),
            n_total
        )));
    }
    let mut seen = vec![false; n_total];
    for &index in &order {
        if index >= n_total || seen[index] {
            return Err(ConfigError::Invalid(format!(
                "seed-order must be a permutation of 0..{n_total}"
            )));
        }
        seen[index] = true;
    }
    // order[k] gives the cell preferred at rank k; invert to ranks per cell
    let mut ranks = vec![0usize; n_total];
    for (rank, &cell) in order.iter().enumerate() {
        ranks[cell] = rank;
    }
    Ok(ranks)
}
