//! Graph analytics over the switched grid.
//!
//! Every public function comes in two flavours: one taking a [`Grid`] (using
//! its stored switch positions) and an `*_in` variant taking a prebuilt
//! [`GridIndex`] plus an explicit [`SwitchState`], used by the optimizer to
//! evaluate candidate states without cloning grids.

mod contingency;
mod radiality;
mod resupply;

use std::collections::VecDeque;

use serde::Serialize;

use crate::grid::{Grid, GridError, GridIndex, SwitchState};

pub use contingency::{check_contingency_supply, check_contingency_supply_in, find_stubs, find_stubs_in, mark_stubs};
pub use radiality::{
    check_radiality, check_radiality_in, find_feeders, find_feeders_in, Feeder, RadialityMode, RadialityViolation,
    RadialityViolationKind,
};
pub use resupply::{
    restore, resupply_sequence, Actuation, Restoration, RestorationMode, Stage, SwitchAction, SwitchOp,
    SwitchingSequence,
};

#[derive(Debug, thiserror::Error)]
pub enum TopologyError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("unknown line `{0}`")]
    UnknownLine(String),
    #[error("line `{0}` is not energized")]
    NotEnergized(String),
    #[error("fault on line `{line}` reaches source bus `{bus}` without passing a circuit breaker")]
    NoProtection { line: String, bus: String },
}

/// A station without a path to an external source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SupplyViolation {
    pub station: String,
}

/// Buses reachable from an external source through transformers, in-service
/// lines and closed switches.
pub fn energized_in(idx: &GridIndex, state: &SwitchState) -> Vec<bool> {
    let mut seen = vec![false; idx.n_buses()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &s in &idx.source_buses {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(b) = queue.pop_front() {
        for &[hv, lv] in &idx.transformer_ends {
            for (x, y) in [(hv, lv), (lv, hv)] {
                if x == b && !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        for &l in &idx.bus_lines[b] {
            if idx.line_active(state, l) {
                let o = idx.other_end(l, b);
                if !seen[o] {
                    seen[o] = true;
                    queue.push_back(o);
                }
            }
        }
    }
    seen
}

/// Ids of all energized buses, sorted.
pub fn energized_buses(grid: &Grid) -> Result<Vec<String>, TopologyError> {
    let idx = GridIndex::new(grid)?;
    let on = energized_in(&idx, &SwitchState::of(grid));
    let mut ids: Vec<String> = grid.buses.iter().zip(on).filter(|(_, e)| *e).map(|(b, _)| b.id.clone()).collect();
    ids.sort();
    Ok(ids)
}

pub fn check_supply_in(idx: &GridIndex, state: &SwitchState) -> Vec<SupplyViolation> {
    let on = energized_in(idx, state);
    idx.grid
        .buses
        .iter()
        .zip(on)
        .filter(|(b, e)| b.kind.is_station() && !e)
        .map(|(b, _)| SupplyViolation { station: b.id.clone() })
        .collect()
}

/// Stations (secondary substations and switching stations) without supply.
pub fn check_supply(grid: &Grid) -> Result<Vec<SupplyViolation>, TopologyError> {
    let idx = GridIndex::new(grid)?;
    Ok(check_supply_in(&idx, &SwitchState::of(grid)))
}

/// Buses that are fed from a transformer or carry an external source:
/// the roots of supply.
pub(crate) fn is_source_busbar(idx: &GridIndex, bus: usize) -> bool {
    idx.source_buses.contains(&bus) || idx.transformer_ends.iter().any(|&[_, lv]| lv == bus)
}

/// A line that carries voltage from at least one energized side.
pub(crate) fn line_energized(idx: &GridIndex, state: &SwitchState, energized: &[bool], line: usize) -> bool {
    idx.grid.lines[line].in_service
        && (0..2).any(|end| {
            let t = crate::grid::Terminal { line, end };
            idx.terminal_closed(state, t) && energized[idx.line_ends[line][end]]
        })
}
