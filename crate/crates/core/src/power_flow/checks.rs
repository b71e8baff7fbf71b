use serde::{Deserialize, Serialize};

use super::{run_power_flow_in, PfError};
use crate::exec::Exec;
use crate::grid::{Grid, GridIndex, Scenario, ScenarioName, SwitchState};
use crate::topology::{energized_in, line_energized, restore, RestorationMode, TopologyError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Undervoltage,
    Overvoltage,
    Overload,
    Unsupplied,
    Nonconvergence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub element: String,
    pub kind: ViolationKind,
    /// pu for voltages, percent for loadings, 1 for unsupplied/nonconvergence.
    pub magnitude: f64,
    pub scenario: ScenarioName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contingency: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub entries: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn total_magnitude(&self) -> f64 {
        self.entries.iter().map(|v| v.magnitude).sum()
    }

    pub fn extend(&mut self, other: ViolationReport) {
        self.entries.extend(other.entries);
    }
}

const EPS: f64 = 1e-9;

fn evaluate(
    idx: &GridIndex,
    state: &SwitchState,
    scenario: &Scenario,
    (v_lo, v_hi): (f64, f64),
    contingency: Option<&str>,
    only_required: bool,
) -> Result<Vec<Violation>, PfError> {
    let grid = idx.grid;
    let res = run_power_flow_in(idx, state, scenario)?;
    let mk = |element: &str, kind, magnitude| Violation {
        element: element.to_string(),
        kind,
        magnitude,
        scenario: scenario.name,
        contingency: contingency.map(str::to_string),
    };
    let mut out = Vec::new();
    for s in &res.unsupplied {
        if only_required && !grid.bus(s).is_some_and(|b| b.requires_contingency_supply) {
            continue;
        }
        out.push(mk(s, ViolationKind::Unsupplied, 1.0));
    }
    if !res.converged {
        out.push(mk(&grid.meta.name, ViolationKind::Nonconvergence, 1.0));
        return Ok(out);
    }
    for (bus, v) in &res.v {
        if res.slack_buses.binary_search(bus).is_ok() {
            continue;
        }
        if v.vm_pu < v_lo - EPS {
            out.push(mk(bus, ViolationKind::Undervoltage, v_lo - v.vm_pu));
        } else if v.vm_pu > v_hi + EPS {
            out.push(mk(bus, ViolationKind::Overvoltage, v.vm_pu - v_hi));
        }
    }
    for (line, &l) in &res.loading {
        if l > scenario.loading_max + EPS {
            out.push(mk(line, ViolationKind::Overload, l - scenario.loading_max));
        }
    }
    Ok(out)
}

pub fn check_normal_operation_in(
    idx: &GridIndex,
    state: &SwitchState,
    scenarios: &[Scenario],
) -> Result<ViolationReport, PfError> {
    let mut entries = Vec::new();
    for sc in scenarios {
        entries.extend(evaluate(idx, state, sc, (sc.v_min, sc.v_max), None, false)?);
    }
    Ok(ViolationReport { entries })
}

/// Voltage band and loading violations over all given scenarios.
pub fn check_normal_operation(grid: &Grid, scenarios: &[Scenario]) -> Result<ViolationReport, PfError> {
    let idx = GridIndex::new(grid)?;
    check_normal_operation_in(&idx, &SwitchState::of(grid), scenarios)
}

/// Energized lines attached to a primary-substation or switching-station busbar, in id order.
pub fn head_lines(idx: &GridIndex, state: &SwitchState) -> Vec<usize> {
    let on = energized_in(idx, state);
    let mut heads: Vec<usize> = (0..idx.n_lines())
        .filter(|&l| {
            let [a, b] = idx.line_ends[l];
            (idx.is_busbar(a) || idx.is_busbar(b)) && line_energized(idx, state, &on, l)
        })
        .collect();
    heads.sort_by(|&a, &b| idx.grid.lines[a].id.cmp(&idx.grid.lines[b].id));
    heads
}

pub fn check_contingency_operation_in(
    idx: &GridIndex,
    state: &SwitchState,
    peak_load: &Scenario,
    exec: Exec,
) -> Result<ViolationReport, PfError> {
    let heads = head_lines(idx, state);
    let per_line = exec.map(&heads, |&l| -> Result<Vec<Violation>, PfError> {
        let id = idx.grid.lines[l].id.as_str();
        let r = match restore(idx, state, l, RestorationMode::Full) {
            Ok(r) => r,
            Err(TopologyError::NotEnergized(_)) => return Ok(Vec::new()),
            Err(e) => return Err(e.into()),
        };
        evaluate(idx, &r.final_state, peak_load, (peak_load.v_min_cont, peak_load.v_max_cont), Some(id), true)
    });
    let mut entries = Vec::new();
    for r in per_line {
        entries.extend(r?);
    }
    Ok(ViolationReport { entries })
}

/// Outage of every feeder-head line in turn, resupplied by switching, checked
/// at peak load against the contingency band.
pub fn check_contingency_operation(grid: &Grid, peak_load: &Scenario) -> Result<ViolationReport, PfError> {
    let idx = GridIndex::new(grid)?;
    check_contingency_operation_in(&idx, &SwitchState::of(grid), peak_load, Exec::default())
}
