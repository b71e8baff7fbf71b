//! Balanced AC power flow and operating-constraint checks.

mod checks;
mod model;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::grid::{Grid, GridError, GridIndex, Scenario, SwitchState};
use crate::topology::TopologyError;

pub use checks::{
    check_contingency_operation, check_contingency_operation_in, check_normal_operation, check_normal_operation_in,
    head_lines, Violation, ViolationKind, ViolationReport,
};
pub use model::{PfModel, S_BASE_MVA};

/// Mismatch tolerance in pu.
pub const TOLERANCE: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 30;

#[derive(Debug, thiserror::Error)]
pub enum PfError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BusVoltage {
    pub vm_pu: f64,
    pub va_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PfResult {
    pub converged: bool,
    pub iterations: usize,
    /// Largest absolute mismatch at the last iterate (pu).
    pub max_mismatch: f64,
    pub v: BTreeMap<String, BusVoltage>,
    /// Line loading in percent of ampacity.
    pub loading: BTreeMap<String, f64>,
    pub p_slack: f64,
    pub q_slack: f64,
    pub p_losses: f64,
    pub q_losses: f64,
    /// Buses held at a fixed voltage.
    pub slack_buses: Vec<String>,
    /// Stations without a connection to any source.
    pub unsupplied: Vec<String>,
}

/// Newton-Raphson from a flat start. Returns the final unknown vector, the
/// iteration count and whether the tolerance was reached.
pub fn newton_raphson(model: &PfModel) -> (Vec<f64>, usize, bool, f64) {
    let mut x = model.flat_start();
    if x.is_empty() {
        return (x, 0, true, 0.0);
    }
    for it in 0..=MAX_ITERATIONS {
        let f = model.mismatch(&x);
        let err = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !err.is_finite() {
            return (x, it, false, err);
        }
        if err < TOLERANCE {
            return (x, it, true, err);
        }
        if it == MAX_ITERATIONS {
            return (x, it, false, err);
        }
        let jac = model.jacobian(&x);
        let rhs = nalgebra::DVector::from_iterator(f.len(), f.iter().map(|v| -v));
        match jac.lu().solve(&rhs) {
            Some(dx) => {
                for (xi, d) in x.iter_mut().zip(dx.iter()) {
                    *xi += d;
                }
            }
            None => return (x, it, false, err),
        }
    }
    unreachable!()
}

pub(crate) fn solve_model(idx: &GridIndex, model: &PfModel) -> PfResult {
    let grid = idx.grid;
    let (x, iterations, converged, max_mismatch) = newton_raphson(model);
    let (va, vm) = model.expand(&x);
    let (p, q) = model.injections(&va, &vm);
    let mut v = BTreeMap::new();
    let mut slack_buses = Vec::new();
    let (mut p_slack, mut q_slack) = (0.0, 0.0);
    for (i, &b) in model.buses.iter().enumerate() {
        v.insert(grid.buses[b].id.clone(), BusVoltage { vm_pu: vm[i], va_rad: va[i] });
        if model.slack[i] {
            slack_buses.push(grid.buses[b].id.clone());
            p_slack += (p[i] - model.p_spec[i]) * S_BASE_MVA;
            q_slack += (q[i] - model.q_spec[i]) * S_BASE_MVA;
        }
    }
    slack_buses.sort();
    let mut loading = BTreeMap::new();
    let (mut p_losses, mut q_losses) = (0.0, 0.0);
    for br in &model.branches {
        let (ef, ff) = (vm[br.from] * va[br.from].cos(), vm[br.from] * va[br.from].sin());
        let (et, ft) = (vm[br.to] * va[br.to].cos(), vm[br.to] * va[br.to].sin());
        let (dr, di) = (ef - et, ff - ft);
        // I = y * dV with y = g + jb
        let (ir, ii) = (br.g * dr - br.b * di, br.g * di + br.b * dr);
        let i2 = ir * ir + ii * ii;
        let i_ka = i2.sqrt() * br.i_base_ka;
        loading.insert(grid.lines[br.line].id.clone(), i_ka / br.i_max_ka * 100.0);
        p_losses += i2 * br.r_pu * S_BASE_MVA;
        q_losses += i2 * br.x_pu * S_BASE_MVA;
    }
    let mut unsupplied: Vec<String> = model.unsupplied.iter().map(|&b| grid.buses[b].id.clone()).collect();
    unsupplied.sort();
    PfResult {
        converged,
        iterations,
        max_mismatch,
        v,
        loading,
        p_slack,
        q_slack,
        p_losses,
        q_losses,
        slack_buses,
        unsupplied,
    }
}

pub fn run_power_flow_in(idx: &GridIndex, state: &SwitchState, scenario: &Scenario) -> Result<PfResult, PfError> {
    let model = PfModel::build(idx, state, scenario)?;
    Ok(solve_model(idx, &model))
}

/// Power flow of the energized grid under `scenario`.
pub fn run_power_flow(grid: &Grid, scenario: &Scenario) -> Result<PfResult, PfError> {
    let idx = GridIndex::new(grid)?;
    run_power_flow_in(&idx, &SwitchState::of(grid), scenario)
}
