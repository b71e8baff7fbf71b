//! Planning principles: scenarios, voltage bands, costs, reliability and
//! optimizer settings, read from one JSON file where every key is optional.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::economics::CostModel;
use crate::grid::{GridError, Scenario, ScenarioName, VoltageBands};
use crate::planner::PlannerParams;
use crate::reliability::ReliabilityParams;

/// Environment variable overriding `planner_params.seed`.
pub const SEED_ENV: &str = "GRIDFORGE_SEED";

/// Simultaneity factors of one worst-case scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioScaling {
    pub name: ScenarioName,
    pub scale_load: f64,
    pub scale_pv: f64,
    pub scale_wind: f64,
    #[serde(default = "default_loading_max")]
    pub loading_max: f64,
}

fn default_loading_max() -> f64 {
    100.0
}

fn default_scenarios() -> Vec<ScenarioScaling> {
    vec![
        ScenarioScaling {
            name: ScenarioName::PeakLoad,
            scale_load: 1.0,
            scale_pv: 0.0,
            scale_wind: 0.0,
            loading_max: 100.0,
        },
        ScenarioScaling {
            name: ScenarioName::PeakGeneration,
            scale_load: 0.3,
            scale_pv: 0.8,
            scale_wind: 1.0,
            loading_max: 100.0,
        },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Principles {
    pub scenarios: Vec<ScenarioScaling>,
    pub voltage_bands: VoltageBands,
    pub cost_model: CostModel,
    pub reliability_params: ReliabilityParams,
    pub planner_params: PlannerParams,
}

impl Default for Principles {
    fn default() -> Self {
        Principles {
            scenarios: default_scenarios(),
            voltage_bands: VoltageBands::default(),
            cost_model: CostModel::default(),
            reliability_params: ReliabilityParams::default(),
            planner_params: PlannerParams::default(),
        }
    }
}

impl Principles {
    pub fn scenario(&self, name: ScenarioName) -> Scenario {
        let b = self.voltage_bands;
        match self.scenarios.iter().find(|s| s.name == name) {
            Some(s) => {
                let mut sc = Scenario::with_scaling(name, s.scale_load, s.scale_pv, s.scale_wind, b);
                sc.loading_max = s.loading_max;
                sc
            }
            None => match name {
                ScenarioName::PeakLoad => Scenario::peak_load(b),
                ScenarioName::PeakGeneration => Scenario::peak_generation(b),
            },
        }
    }

    pub fn peak_load(&self) -> Scenario {
        self.scenario(ScenarioName::PeakLoad)
    }

    /// Both worst-case scenarios.
    pub fn worst_cases(&self) -> Vec<Scenario> {
        vec![self.scenario(ScenarioName::PeakLoad), self.scenario(ScenarioName::PeakGeneration)]
    }

    pub fn check(&self) -> Result<(), String> {
        for sc in self.worst_cases() {
            sc.check().map_err(|e| format!("scenario {}: {e}", sc.name))?;
        }
        self.reliability_params.check().map_err(|e| e.to_string())?;
        self.planner_params.check()?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, GridError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let p: Principles = serde_path_to_error::deserialize(de).map_err(|e| GridError::Parse {
            path: crate::grid::io_json_path(&e.path().to_string()),
            message: e.inner().to_string(),
        })?;
        p.check().map_err(|message| GridError::Schema { path: "$".into(), message })?;
        Ok(p)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GridError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| GridError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    /// Applies `GRIDFORGE_SEED` when set to an integer.
    pub fn with_env_seed(mut self) -> Self {
        if let Some(seed) = std::env::var(SEED_ENV).ok().and_then(|s| s.trim().parse::<u64>().ok()) {
            self.planner_params.seed = seed;
        }
        self
    }
}
