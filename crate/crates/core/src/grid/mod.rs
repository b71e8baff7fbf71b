//! Typed medium-voltage grid model.
//!
//! A [`Grid`] is a plain value: buses, line types, lines, switches,
//! transformers, injections and external sources, plus free metadata. All
//! analysis modules treat it as immutable and express alternative switching
//! states through [`SwitchState`].

mod index;
mod io;
mod scenario;
mod validate;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use index::{GridIndex, Terminal};
pub(crate) use io::json_path as io_json_path;
pub use io::{grid_from_json, grid_to_json, load_grid, save_grid};
pub use scenario::{apply_scenario, BusPower, Scenario, ScenarioName, ScenarioSetpoints, VoltageBands};
pub use validate::{validate_grid, Fault};

/// Default power factor of loads when the file does not carry one.
pub const DEFAULT_LOAD_POWER_FACTOR: f64 = 0.97;
/// Default power factor of distributed generation.
pub const DEFAULT_DG_POWER_FACTOR: f64 = 1.0;

#[derive(Debug, thiserror::Error)]
pub enum GridError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("unknown {kind} `{id}`")]
    UnknownElement { kind: &'static str, id: String },
    #[error("transformer `{transformer}` has no setpoint for scenario `{scenario}`")]
    MissingSetpoint { transformer: String, scenario: String },
    #[error("grid is not valid: {0} integrity fault(s), first: {1}")]
    Invalid(usize, String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BusKind {
    PrimarySubstation,
    SecondarySubstation,
    SwitchingStation,
    Junction,
}

impl BusKind {
    /// Busbars carry circuit breakers and split feeders.
    pub fn is_busbar(self) -> bool {
        matches!(self, BusKind::PrimarySubstation | BusKind::SwitchingStation)
    }

    /// Stations that must be supplied: secondary substations and switching stations.
    pub fn is_station(self) -> bool {
        matches!(self, BusKind::SecondarySubstation | BusKind::SwitchingStation)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: String,
    pub kind: BusKind,
    pub x: f64,
    pub y: f64,
    /// Nominal voltage in kV.
    pub vn: f64,
    #[serde(default = "default_true")]
    pub requires_contingency_supply: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    Cable,
    Overhead,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineType {
    pub name: String,
    /// Ω/km
    pub r_per_km: f64,
    /// Ω/km
    pub x_per_km: f64,
    /// Ampacity in kA.
    pub i_max: f64,
    pub construction: Construction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub insulation: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineOrigin {
    #[default]
    Existing,
    NewTrail,
    Parallel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub id: String,
    pub from_bus: String,
    pub to_bus: String,
    /// km
    pub length: f64,
    pub line_type: String,
    #[serde(default = "default_true")]
    pub in_service: bool,
    #[serde(default)]
    pub origin: LineOrigin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchKind {
    LoadBreak,
    CircuitBreaker,
}

/// A switch sits at the terminal where `line` meets `bus`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Switch {
    pub id: String,
    pub bus: String,
    pub line: String,
    pub closed: bool,
    pub kind: SwitchKind,
    #[serde(default)]
    pub remote_controlled: bool,
}

impl Switch {
    /// An open load-break switch is a sectioning point.
    pub fn is_sectioning_point(&self) -> bool {
        !self.closed && self.kind == SwitchKind::LoadBreak
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transformer {
    pub id: String,
    pub hv_bus: String,
    pub lv_bus: String,
    /// MVA
    pub sn: f64,
    /// Voltage setpoint at the low-voltage side per scenario name (pu).
    pub setpoint_by_scenario: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InjectionCategory {
    Load,
    Pv,
    Wind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Injection {
    pub id: String,
    pub bus: String,
    /// Drag-pointer demand (loads) or installed power (DG), MVA.
    pub sn: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_factor: Option<f64>,
    pub category: InjectionCategory,
}

impl Injection {
    pub fn power_factor(&self) -> f64 {
        self.p_factor.unwrap_or(match self.category {
            InjectionCategory::Load => DEFAULT_LOAD_POWER_FACTOR,
            InjectionCategory::Pv | InjectionCategory::Wind => DEFAULT_DG_POWER_FACTOR,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalSource {
    pub id: String,
    pub bus: String,
    /// Voltage magnitude used when the source bus is not the low-voltage
    /// side of a transformer.
    #[serde(default = "default_vm")]
    pub vm_pu: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    #[serde(default)]
    pub name: String,
    /// Buses that lost a line during dismantling; candidate trail endpoints.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub affected_buses: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub buses: Vec<Bus>,
    pub line_types: Vec<LineType>,
    pub lines: Vec<Line>,
    pub switches: Vec<Switch>,
    pub transformers: Vec<Transformer>,
    pub injections: Vec<Injection>,
    pub external_sources: Vec<ExternalSource>,
    #[serde(default)]
    pub meta: GridMeta,
}

fn default_true() -> bool {
    true
}

fn default_vm() -> f64 {
    1.0
}

impl Grid {
    pub fn bus(&self, id: &str) -> Option<&Bus> {
        self.buses.iter().find(|b| b.id == id)
    }

    pub fn line(&self, id: &str) -> Option<&Line> {
        self.lines.iter().find(|l| l.id == id)
    }

    pub fn line_type(&self, name: &str) -> Option<&LineType> {
        self.line_types.iter().find(|t| t.name == name)
    }

    pub fn switch(&self, id: &str) -> Option<&Switch> {
        self.switches.iter().find(|s| s.id == id)
    }

    /// Installed load at each bus in kW (apparent drag-pointer power times power factor).
    pub fn installed_load_kw(&self) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        for inj in &self.injections {
            if inj.category == InjectionCategory::Load {
                *out.entry(inj.bus.clone()).or_insert(0.0) += inj.sn * inj.power_factor() * 1000.0;
            }
        }
        out
    }

    /// Ids of all buses of the given kind, in file order.
    pub fn buses_of_kind(&self, kind: BusKind) -> impl Iterator<Item = &Bus> {
        self.buses.iter().filter(move |b| b.kind == kind)
    }

    /// Adds a line type unless one with the same name already exists.
    pub fn ensure_line_type(&mut self, lt: &LineType) {
        if self.line_type(&lt.name).is_none() {
            self.line_types.push(lt.clone());
        }
    }

    /// Returns a copy with switch positions taken from `state`.
    pub fn with_switch_state(&self, state: &SwitchState) -> Grid {
        let mut g = self.clone();
        for (sw, &closed) in g.switches.iter_mut().zip(&state.0) {
            sw.closed = closed;
        }
        g
    }
}

/// Closed/open position of every switch, indexed like `Grid::switches`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SwitchState(pub Vec<bool>);

impl SwitchState {
    pub fn of(grid: &Grid) -> Self {
        SwitchState(grid.switches.iter().map(|s| s.closed).collect())
    }

    pub fn is_closed(&self, switch: usize) -> bool {
        self.0[switch]
    }

    pub fn set(&mut self, switch: usize, closed: bool) {
        self.0[switch] = closed;
    }
}
