use serde::{Deserialize, Serialize};

use super::PlannerError;
use crate::grid::{BusKind, Grid, Line, LineOrigin, LineType, Switch, SwitchKind};

/// One atomic planning action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Measure {
    ReplaceLine { line: String, new_type: String },
    AddParallel { line: String, line_type: String },
    AddTrail { from_station: String, to_station: String, line_type: String, length: f64 },
    SetSectioningPoint { switch: String, open: bool },
    AutomateStation { bus: String },
    CloseRing { switch: String },
    RemoveSwitchingStation { bus: String },
    RenewSwitchingStation { bus: String },
}

impl Measure {
    /// Id of the line a trail measure creates.
    pub fn trail_line_id(from: &str, to: &str) -> String {
        format!("T_{from}_{to}")
    }

    pub fn parallel_line_id(line: &str) -> String {
        format!("{line}_par")
    }
}

fn find_type<'a>(grid: &Grid, catalog: &'a [LineType], name: &str) -> Result<Option<&'a LineType>, PlannerError> {
    if grid.line_type(name).is_some() {
        return Ok(None);
    }
    catalog
        .iter()
        .find(|t| t.name == name)
        .map(Some)
        .ok_or_else(|| PlannerError::Unknown { kind: "line type", id: name.into() })
}

fn ensure_type(grid: &mut Grid, catalog: &[LineType], name: &str) -> Result<(), PlannerError> {
    if let Some(t) = find_type(grid, catalog, name)? {
        grid.line_types.push(t.clone());
    }
    Ok(())
}

fn switch_mut<'g>(grid: &'g mut Grid, id: &str) -> Result<&'g mut Switch, PlannerError> {
    grid.switches.iter_mut().find(|s| s.id == id).ok_or_else(|| PlannerError::Unknown { kind: "switch", id: id.into() })
}

/// Applies `measure` in place. Line types not yet in the grid are taken from `catalog`.
pub fn apply_measure(grid: &mut Grid, measure: &Measure, catalog: &[LineType]) -> Result<(), PlannerError> {
    match measure {
        Measure::ReplaceLine { line, new_type } => {
            ensure_type(grid, catalog, new_type)?;
            let l = grid
                .lines
                .iter_mut()
                .find(|l| &l.id == line)
                .ok_or_else(|| PlannerError::Unknown { kind: "line", id: line.clone() })?;
            l.line_type = new_type.clone();
        }
        Measure::AddParallel { line, line_type } => {
            ensure_type(grid, catalog, line_type)?;
            let orig =
                grid.line(line).cloned().ok_or_else(|| PlannerError::Unknown { kind: "line", id: line.clone() })?;
            let id = Measure::parallel_line_id(line);
            let switches: Vec<Switch> = grid
                .switches
                .iter()
                .filter(|s| &s.line == line)
                .map(|s| Switch { id: format!("{}_par", s.id), line: id.clone(), ..s.clone() })
                .collect();
            grid.lines.push(Line { id, line_type: line_type.clone(), origin: LineOrigin::Parallel, ..orig });
            grid.switches.extend(switches);
        }
        Measure::AddTrail { from_station, to_station, line_type, length } => {
            ensure_type(grid, catalog, line_type)?;
            let id = Measure::trail_line_id(from_station, to_station);
            grid.lines.push(Line {
                id: id.clone(),
                from_bus: from_station.clone(),
                to_bus: to_station.clone(),
                length: *length,
                line_type: line_type.clone(),
                in_service: true,
                origin: LineOrigin::NewTrail,
            });
            for b in [from_station, to_station] {
                let kind =
                    grid.bus(b).map(|b| b.kind).ok_or_else(|| PlannerError::Unknown { kind: "bus", id: b.clone() })?;
                if kind == BusKind::Junction {
                    continue;
                }
                let breaker = kind.is_busbar();
                grid.switches.push(Switch {
                    id: format!("{id}@{b}"),
                    bus: b.clone(),
                    line: id.clone(),
                    closed: true,
                    kind: if breaker { SwitchKind::CircuitBreaker } else { SwitchKind::LoadBreak },
                    remote_controlled: breaker,
                });
            }
        }
        Measure::SetSectioningPoint { switch, open } => switch_mut(grid, switch)?.closed = !open,
        Measure::CloseRing { switch } => switch_mut(grid, switch)?.closed = true,
        Measure::AutomateStation { bus } => {
            if grid.bus(bus).is_none() {
                return Err(PlannerError::Unknown { kind: "bus", id: bus.clone() });
            }
            for s in grid.switches.iter_mut().filter(|s| &s.bus == bus) {
                s.remote_controlled = true;
            }
        }
        Measure::RemoveSwitchingStation { .. } | Measure::RenewSwitchingStation { .. } => {}
    }
    Ok(())
}

pub fn apply_measures(grid: &Grid, measures: &[Measure], catalog: &[LineType]) -> Result<Grid, PlannerError> {
    let mut g = grid.clone();
    for m in measures {
        apply_measure(&mut g, m, catalog)?;
    }
    Ok(g)
}
