//! Failure mode and effects analysis of line faults.

mod automation;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::exec::Exec;
use crate::grid::{Construction, Grid, GridError, GridIndex, LineType, SwitchState};
use crate::topology::{restore, RestorationMode, TopologyError};

pub use automation::{
    automate_for_reliability, automate_for_reliability_in, automate_station, is_automated, load_centre, Automation,
};

#[derive(Debug, thiserror::Error)]
pub enum ReliabilityError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("no installed load: ASIDI undefined")]
    NoLoad,
    #[error("reliability constraints remain violated with every station automated ({} violation(s))", .0.len())]
    Unsatisfiable(Vec<ReliabilityViolation>),
    #[error("invalid reliability parameters: {0}")]
    Params(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReliabilityParams {
    /// Failures per km and year by line class. A class is the insulation
    /// tag of a cable type if listed here, otherwise `cable` or `overhead`.
    pub failure_rate: BTreeMap<String, f64>,
    /// Hours to locate a fault.
    pub t_locate: f64,
    pub t_onsite: f64,
    pub t_remote: f64,
    /// Outage energy limit per station, kWh/a.
    pub e_out_max: f64,
}

impl Default for ReliabilityParams {
    fn default() -> Self {
        ReliabilityParams {
            failure_rate: BTreeMap::from([("cable".into(), 0.02), ("overhead".into(), 0.05)]),
            t_locate: 0.75,
            t_onsite: 0.25,
            t_remote: 0.02,
            e_out_max: 150.0,
        }
    }
}

impl ReliabilityParams {
    pub fn check(&self) -> Result<(), ReliabilityError> {
        if !(self.t_locate >= 0.0 && self.t_onsite >= 0.0 && self.t_remote >= 0.0) {
            return Err(ReliabilityError::Params("times must be non-negative".into()));
        }
        if self.t_remote > self.t_onsite {
            return Err(ReliabilityError::Params("t_remote exceeds t_onsite".into()));
        }
        if !(self.e_out_max > 0.0) {
            return Err(ReliabilityError::Params("e_out_max must be positive".into()));
        }
        if self.failure_rate.values().any(|r| !(*r >= 0.0)) {
            return Err(ReliabilityError::Params("failure rates must be non-negative".into()));
        }
        Ok(())
    }

    /// Failures per km and year for a line type.
    pub fn rate_for(&self, lt: &LineType) -> f64 {
        if let Some(r) = lt.insulation.as_ref().and_then(|i| self.failure_rate.get(i)) {
            return *r;
        }
        let class = match lt.construction {
            Construction::Cable => "cable",
            Construction::Overhead => "overhead",
        };
        self.failure_rate.get(class).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FmeaResult {
    /// Expected outage hours per year by station.
    pub t_out: BTreeMap<String, f64>,
    /// Expected outage energy, kWh/a.
    pub e_out: BTreeMap<String, f64>,
    /// Installed power, kW.
    pub p_installed: BTreeMap<String, f64>,
    pub asidi: f64,
    /// Failures per year by line.
    pub h: BTreeMap<String, f64>,
    /// Outage hours of each station for one failure of each line.
    pub outage_matrix: BTreeMap<String, BTreeMap<String, f64>>,
}

impl FmeaResult {
    pub fn total_e_out(&self) -> f64 {
        self.e_out.values().sum()
    }
}

fn station_outages(
    idx: &GridIndex,
    state: &SwitchState,
    params: &ReliabilityParams,
    line: usize,
) -> Result<Vec<f64>, TopologyError> {
    let nb = idx.n_buses();
    let r = match restore(idx, state, line, RestorationMode::RemoteOnly) {
        Ok(r) => r,
        Err(TopologyError::NotEnergized(_)) => return Ok(vec![0.0; nb]),
        Err(e) => return Err(e),
    };
    Ok((0..nb)
        .map(|b| {
            if !idx.is_station(b) || !r.interrupted(b) {
                0.0
            } else if r.final_energized[b] {
                params.t_locate + params.t_remote
            } else {
                params.t_locate + params.t_onsite
            }
        })
        .collect())
}

pub fn outage_matrix_in(
    idx: &GridIndex,
    state: &SwitchState,
    params: &ReliabilityParams,
    exec: Exec,
) -> Result<BTreeMap<String, BTreeMap<String, f64>>, ReliabilityError> {
    let grid = idx.grid;
    let rows = exec.map_range(idx.n_lines(), |l| station_outages(idx, state, params, l));
    let mut out = BTreeMap::new();
    for (l, row) in rows.into_iter().enumerate() {
        let row = row?;
        let entry: BTreeMap<String, f64> =
            (0..idx.n_buses()).filter(|&b| idx.is_station(b)).map(|b| (grid.buses[b].id.clone(), row[b])).collect();
        out.insert(grid.lines[l].id.clone(), entry);
    }
    Ok(out)
}

/// Outage time of every station for a fault on every line, in hours.
pub fn outage_matrix(
    grid: &Grid,
    params: &ReliabilityParams,
) -> Result<BTreeMap<String, BTreeMap<String, f64>>, ReliabilityError> {
    let idx = GridIndex::new(grid)?;
    outage_matrix_in(&idx, &SwitchState::of(grid), params, Exec::default())
}

pub fn fmea_in(
    idx: &GridIndex,
    state: &SwitchState,
    params: &ReliabilityParams,
    exec: Exec,
) -> Result<FmeaResult, ReliabilityError> {
    let grid = idx.grid;
    let matrix = outage_matrix_in(idx, state, params, exec)?;
    let loads = grid.installed_load_kw();
    let mut h = BTreeMap::new();
    for (l, line) in grid.lines.iter().enumerate() {
        let rate =
            if line.in_service { params.rate_for(&grid.line_types[idx.line_type[l]]) * line.length } else { 0.0 };
        h.insert(line.id.clone(), rate);
    }
    let mut t_out = BTreeMap::new();
    let mut e_out = BTreeMap::new();
    let mut p_installed = BTreeMap::new();
    for b in grid.buses.iter().filter(|b| b.kind.is_station()) {
        let t: f64 = matrix.iter().map(|(line, row)| h[line] * row[&b.id]).sum();
        let p = loads.get(&b.id).copied().unwrap_or(0.0);
        t_out.insert(b.id.clone(), t);
        e_out.insert(b.id.clone(), p * t);
        p_installed.insert(b.id.clone(), p);
    }
    let p_total: f64 = p_installed.values().sum();
    if !(p_total > 0.0) {
        return Err(ReliabilityError::NoLoad);
    }
    let asidi = e_out.values().sum::<f64>() / p_total;
    Ok(FmeaResult { t_out, e_out, p_installed, asidi, h, outage_matrix: matrix })
}

/// Expected outage times, energies and ASIDI under the stored switch state.
pub fn fmea(grid: &Grid, params: &ReliabilityParams) -> Result<FmeaResult, ReliabilityError> {
    let idx = GridIndex::new(grid)?;
    fmea_in(&idx, &SwitchState::of(grid), params, Exec::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReliabilityViolationKind {
    AsidiIncrease,
    StationOutageEnergy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityViolation {
    pub kind: ReliabilityViolationKind,
    /// Station id, or the grid name for ASIDI.
    pub element: String,
    pub value: f64,
    pub limit: f64,
}

impl ReliabilityViolation {
    pub fn magnitude(&self) -> f64 {
        self.value - self.limit
    }
}

/// ASIDI must not rise above the baseline; no station may exceed
/// `e_out_max`, or its own baseline value where that was already higher.
pub fn check_reliability(
    name: &str,
    result: &FmeaResult,
    params: &ReliabilityParams,
    baseline: &FmeaResult,
) -> Vec<ReliabilityViolation> {
    let mut out = Vec::new();
    if result.asidi > baseline.asidi + 1e-9 {
        out.push(ReliabilityViolation {
            kind: ReliabilityViolationKind::AsidiIncrease,
            element: name.to_string(),
            value: result.asidi,
            limit: baseline.asidi,
        });
    }
    for (station, &e) in &result.e_out {
        let limit = params.e_out_max.max(baseline.e_out.get(station).copied().unwrap_or(0.0));
        if e > limit + 1e-9 {
            out.push(ReliabilityViolation {
                kind: ReliabilityViolationKind::StationOutageEnergy,
                element: station.clone(),
                value: e,
                limit,
            });
        }
    }
    out
}
