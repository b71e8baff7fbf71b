use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Grid, GridError, InjectionCategory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioName {
    PeakLoad,
    PeakGeneration,
}

impl ScenarioName {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::PeakLoad => "peak_load",
            ScenarioName::PeakGeneration => "peak_generation",
        }
    }
}

impl std::fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ScenarioName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "peak_load" => Ok(ScenarioName::PeakLoad),
            "peak_generation" => Ok(ScenarioName::PeakGeneration),
            other => Err(format!("unknown scenario `{other}`")),
        }
    }
}

/// Permissible voltage bands in pu for normal and contingency operation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoltageBands {
    pub v_min: f64,
    pub v_max: f64,
    pub v_min_cont: f64,
    pub v_max_cont: f64,
}

impl Default for VoltageBands {
    fn default() -> Self {
        VoltageBands { v_min: 0.96, v_max: 1.08, v_min_cont: 0.90, v_max_cont: 1.10 }
    }
}

/// A worst-case operating scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: ScenarioName,
    pub scale_load: f64,
    pub scale_pv: f64,
    pub scale_wind: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub v_min_cont: f64,
    pub v_max_cont: f64,
    /// Line loading limit in percent.
    pub loading_max: f64,
}

impl Scenario {
    /// Maximum demand, no generation, setpoint 1.0 pu.
    pub fn peak_load(bands: VoltageBands) -> Self {
        Scenario::with_scaling(ScenarioName::PeakLoad, 1.0, 0.0, 0.0, bands)
    }

    /// Low demand with PV at 0.8 and wind at full output, setpoint 1.05 pu.
    pub fn peak_generation(bands: VoltageBands) -> Self {
        Scenario::with_scaling(ScenarioName::PeakGeneration, 0.3, 0.8, 1.0, bands)
    }

    pub fn with_scaling(name: ScenarioName, load: f64, pv: f64, wind: f64, bands: VoltageBands) -> Self {
        Scenario {
            name,
            scale_load: load,
            scale_pv: pv,
            scale_wind: wind,
            v_min: bands.v_min,
            v_max: bands.v_max,
            v_min_cont: bands.v_min_cont,
            v_max_cont: bands.v_max_cont,
            loading_max: 100.0,
        }
    }

    /// Default transformer setpoint for this scenario in pu.
    pub fn default_setpoint(&self) -> f64 {
        match self.name {
            ScenarioName::PeakLoad => 1.0,
            ScenarioName::PeakGeneration => 1.05,
        }
    }

    pub fn check(&self) -> Result<(), String> {
        for (what, v) in [("scale_load", self.scale_load), ("scale_pv", self.scale_pv), ("scale_wind", self.scale_wind)]
        {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{what} = {v} outside [0, 1]"));
            }
        }
        if !(self.v_min < self.v_max) {
            return Err("v_min must be below v_max".into());
        }
        if !(self.v_min_cont <= self.v_min && self.v_max <= self.v_max_cont) {
            return Err("contingency band must contain the normal band".into());
        }
        if !(self.loading_max > 0.0) {
            return Err("loading_max must be positive".into());
        }
        Ok(())
    }
}

/// Net demand at a bus. Generation counts negative.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BusPower {
    pub p_mw: f64,
    pub q_mvar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSetpoints {
    pub demand: BTreeMap<String, BusPower>,
    pub transformer_setpoints: BTreeMap<String, f64>,
}

/// Scales every injection for `scenario` and picks the transformer setpoints.
///
/// Loads draw `sn * scale_load` MVA at their power factor (inductive). DG
/// feeds `sn * scale` MVA; a power factor below one is taken as
/// under-excited operation, i.e. the unit absorbs reactive power.
pub fn apply_scenario(grid: &Grid, scenario: &Scenario) -> Result<ScenarioSetpoints, GridError> {
    let mut demand: BTreeMap<String, BusPower> = BTreeMap::new();
    for inj in &grid.injections {
        let pf = inj.power_factor();
        let sin = (1.0 - pf * pf).max(0.0).sqrt();
        let (s, sign) = match inj.category {
            InjectionCategory::Load => (inj.sn * scenario.scale_load, 1.0),
            InjectionCategory::Pv => (inj.sn * scenario.scale_pv, -1.0),
            InjectionCategory::Wind => (inj.sn * scenario.scale_wind, -1.0),
        };
        let e = demand.entry(inj.bus.clone()).or_default();
        e.p_mw += sign * s * pf;
        e.q_mvar += s * sin;
    }
    let mut transformer_setpoints = BTreeMap::new();
    for t in &grid.transformers {
        let v = t.setpoint_by_scenario.get(scenario.name.as_str()).ok_or_else(|| GridError::MissingSetpoint {
            transformer: t.id.clone(),
            scenario: scenario.name.as_str().to_string(),
        })?;
        transformer_setpoints.insert(t.id.clone(), *v);
    }
    Ok(ScenarioSetpoints { demand, transformer_setpoints })
}
