use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{energized_in, is_source_busbar, line_energized, TopologyError};
use crate::grid::{Grid, GridIndex, SwitchKind, SwitchState, Terminal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    ProtectionTrip,
    FaultIsolation,
    Reclose,
    Resupply,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchOp {
    Open,
    Close,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Actuation {
    ProtectionTrip,
    Manual,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwitchAction {
    pub stage: Stage,
    pub op: SwitchOp,
    pub switch: String,
    pub actuation: Actuation,
}

/// Switching actions restoring supply after a line fault.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchingSequence {
    pub failed_line: String,
    pub actions: Vec<SwitchAction>,
    /// Switch id → closed, after the last action.
    pub resulting_state: BTreeMap<String, bool>,
    /// Stations that lost supply when the protection tripped.
    pub interrupted: Vec<String>,
    /// Stations still without supply at the end (no path avoiding the fault).
    pub unsupplied: Vec<String>,
}

/// Which switches an operator may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RestorationMode {
    /// Every switch, operated on site where needed.
    Full,
    /// Remote-controlled switches and substation breakers only; everything
    /// else stays as it is.
    RemoteOnly,
}

/// Index-level outcome of a restoration run.
#[derive(Debug, Clone)]
pub struct Restoration {
    pub actions: Vec<(Stage, SwitchOp, usize, Actuation)>,
    pub final_state: SwitchState,
    pub pre_energized: Vec<bool>,
    pub after_trip: Vec<bool>,
    pub final_energized: Vec<bool>,
    pub zone_buses: Vec<bool>,
}

impl Restoration {
    /// Buses energized before the fault and de-energized by the trip.
    pub fn interrupted(&self, bus: usize) -> bool {
        self.pre_energized[bus] && !self.after_trip[bus]
    }
}

fn actuation(idx: &GridIndex, s: usize) -> Actuation {
    if idx.grid.switches[s].remote_controlled || is_breaker(idx, s) {
        Actuation::Remote
    } else {
        Actuation::Manual
    }
}

fn is_breaker(idx: &GridIndex, s: usize) -> bool {
    idx.grid.switches[s].kind == SwitchKind::CircuitBreaker
}

/// Energized set when `blocked` buses and `blocked_line` are removed.
fn energized_avoiding(idx: &GridIndex, state: &SwitchState, blocked: &[bool], blocked_line: usize) -> Vec<bool> {
    let mut seen = vec![false; idx.n_buses()];
    let mut q = VecDeque::new();
    for &s in &idx.source_buses {
        if !blocked[s] && !seen[s] {
            seen[s] = true;
            q.push_back(s);
        }
    }
    while let Some(b) = q.pop_front() {
        for &[hv, lv] in &idx.transformer_ends {
            for (x, y) in [(hv, lv), (lv, hv)] {
                if x == b && !seen[y] && !blocked[y] {
                    seen[y] = true;
                    q.push_back(y);
                }
            }
        }
        for &l in &idx.bus_lines[b] {
            if l != blocked_line && idx.line_active(state, l) {
                let o = idx.other_end(l, b);
                if !seen[o] && !blocked[o] {
                    seen[o] = true;
                    q.push_back(o);
                }
            }
        }
    }
    seen
}

/// Breakers that open to clear a fault on `failed`: the nearest closed
/// breaker in every direction that feeds the fault.
fn protection_trip(idx: &GridIndex, pre: &SwitchState, failed: usize) -> Result<Vec<usize>, TopologyError> {
    let nb = idx.n_buses();
    let mut region = vec![false; nb];
    let mut queue = VecDeque::new();
    let mut candidates: Vec<(usize, usize)> = Vec::new();
    let enter = |b: usize, region: &mut Vec<bool>, queue: &mut VecDeque<usize>| -> Result<(), TopologyError> {
        if !region[b] {
            if is_source_busbar(idx, b) {
                return Err(TopologyError::NoProtection {
                    line: idx.grid.lines[failed].id.clone(),
                    bus: idx.grid.buses[b].id.clone(),
                });
            }
            region[b] = true;
            queue.push_back(b);
        }
        Ok(())
    };
    for end in 0..2 {
        let t = Terminal { line: failed, end };
        if !idx.terminal_closed(pre, t) {
            continue;
        }
        let b = idx.line_ends[failed][end];
        match idx.line_switch[failed][end] {
            Some(s) if is_breaker(idx, s) => candidates.push((s, b)),
            _ => enter(b, &mut region, &mut queue)?,
        }
    }
    while let Some(b) = queue.pop_front() {
        for &l in &idx.bus_lines[b] {
            if l == failed || !idx.grid.lines[l].in_service {
                continue;
            }
            let eb = idx.end_of(l, b).expect("incident");
            let tb = Terminal { line: l, end: eb };
            let o = idx.other_end(l, b);
            if !idx.terminal_closed(pre, tb) {
                continue;
            }
            if let Some(s) = idx.line_switch[l][eb].filter(|&s| is_breaker(idx, s)) {
                candidates.push((s, o));
                continue;
            }
            let to = Terminal { line: l, end: 1 - eb };
            if !idx.terminal_closed(pre, to) {
                continue;
            }
            if let Some(s) = idx.line_switch[l][1 - eb].filter(|&s| is_breaker(idx, s)) {
                candidates.push((s, o));
                continue;
            }
            enter(o, &mut region, &mut queue)?;
        }
    }
    let feeding = energized_avoiding(idx, pre, &region, failed);
    let mut trips: Vec<usize> = candidates.into_iter().filter(|&(_, beyond)| feeding[beyond]).map(|(s, _)| s).collect();
    trips.sort_by(|&a, &b| idx.grid.switches[a].id.cmp(&idx.grid.switches[b].id));
    trips.dedup();
    Ok(trips)
}

/// Smallest section around `failed` bounded by open or operable switches.
/// Returns zone lines, zone buses and the bounding operable switches.
fn fault_zone(
    idx: &GridIndex,
    state: &SwitchState,
    failed: usize,
    operable: &dyn Fn(usize) -> bool,
) -> (Vec<bool>, Vec<bool>, Vec<usize>) {
    let mut zone_line = vec![false; idx.n_lines()];
    let mut zone_bus = vec![false; idx.n_buses()];
    let mut boundary = Vec::new();
    zone_line[failed] = true;
    let mut stack = vec![failed];
    while let Some(l) = stack.pop() {
        for end in 0..2 {
            let b = idx.line_ends[l][end];
            match idx.line_switch[l][end] {
                Some(s) if !state.is_closed(s) => continue,
                Some(s) if operable(s) => {
                    boundary.push(s);
                    continue;
                }
                _ => {}
            }
            if zone_bus[b] || is_source_busbar(idx, b) {
                continue;
            }
            zone_bus[b] = true;
            for &l2 in &idx.bus_lines[b] {
                if zone_line[l2] || !idx.grid.lines[l2].in_service {
                    continue;
                }
                let e2 = idx.end_of(l2, b).expect("incident");
                match idx.line_switch[l2][e2] {
                    Some(s) if !state.is_closed(s) => {}
                    Some(s) if operable(s) => boundary.push(s),
                    _ => {
                        zone_line[l2] = true;
                        stack.push(l2);
                    }
                }
            }
        }
    }
    boundary.sort_by(|&a, &b| idx.grid.switches[a].id.cmp(&idx.grid.switches[b].id));
    boundary.dedup();
    (zone_line, zone_bus, boundary)
}

/// Restores supply after a fault on line `failed`.
///
/// Stages: the feeding breakers trip; the operable switches bounding the
/// fault section open; tripped breakers outside the fault section re-close;
/// normally open points close, fewest closures first (ties by switch id),
/// until no interrupted bus can be reached any more.
pub fn restore(
    idx: &GridIndex,
    pre: &SwitchState,
    failed: usize,
    mode: RestorationMode,
) -> Result<Restoration, TopologyError> {
    let grid = idx.grid;
    let pre_energized = energized_in(idx, pre);
    if !line_energized(idx, pre, &pre_energized, failed) {
        return Err(TopologyError::NotEnergized(grid.lines[failed].id.clone()));
    }
    let operable = |s: usize| mode == RestorationMode::Full || grid.switches[s].remote_controlled || is_breaker(idx, s);
    let mut actions = Vec::new();
    let mut state = pre.clone();

    let trips = protection_trip(idx, pre, failed)?;
    for &s in &trips {
        state.set(s, false);
        actions.push((Stage::ProtectionTrip, SwitchOp::Open, s, Actuation::ProtectionTrip));
    }
    let after_trip = energized_in(idx, &state);

    let (zone_line, zone_bus, boundary) = fault_zone(idx, &state, failed, &operable);
    for &s in &boundary {
        if state.is_closed(s) {
            state.set(s, false);
            actions.push((Stage::FaultIsolation, SwitchOp::Open, s, actuation(idx, s)));
        }
    }

    // Tripped breakers that border the fault section stay open; so do the
    // ones that cannot be operated in this mode.
    let mut held_open: Vec<bool> = vec![false; grid.switches.len()];
    for &s in &boundary {
        held_open[s] = true;
    }
    for &s in &trips {
        let bounds_zone = {
            let t = idx.switch_terminal[s];
            zone_line[t.line]
        };
        if bounds_zone || !operable(s) {
            held_open[s] = true;
        } else {
            state.set(s, true);
            actions.push((Stage::Reclose, SwitchOp::Close, s, actuation(idx, s)));
        }
    }

    loop {
        let on = energized_in(idx, &state);
        let wanted: Vec<bool> = (0..idx.n_buses()).map(|b| pre_energized[b] && !on[b] && !zone_bus[b]).collect();
        if !wanted.iter().any(|&w| w) {
            break;
        }
        match cheapest_closure(idx, &state, &on, &zone_line, &zone_bus, &held_open, &wanted, &operable) {
            Some(path) => {
                for s in path {
                    state.set(s, true);
                    actions.push((Stage::Resupply, SwitchOp::Close, s, actuation(idx, s)));
                }
            }
            None => break,
        }
    }

    let final_energized = energized_in(idx, &state);
    Ok(Restoration { actions, final_state: state, pre_energized, after_trip, final_energized, zone_buses: zone_bus })
}

/// Search label: closures so far, their switch ids, bus, switches on the path.
type Label = (usize, Vec<String>, usize, Vec<usize>);

/// Fewest open switches to close so that some wanted bus is reached from
/// the energized set, passing only de-energized buses. Ties resolve to the
/// lexicographically smallest list of switch ids.
#[allow(clippy::too_many_arguments)]
fn cheapest_closure(
    idx: &GridIndex,
    state: &SwitchState,
    on: &[bool],
    zone_line: &[bool],
    zone_bus: &[bool],
    held_open: &[bool],
    wanted: &[bool],
    operable: &dyn Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    let grid = idx.grid;
    let n = idx.n_buses();
    let mut best: Vec<Option<(usize, Vec<String>)>> = vec![None; n];
    let mut heap: BinaryHeap<Reverse<Label>> = BinaryHeap::new();
    for b in 0..n {
        if on[b] {
            best[b] = Some((0, Vec::new()));
            heap.push(Reverse((0, Vec::new(), b, Vec::new())));
        }
    }
    while let Some(Reverse((cost, ids, u, path))) = heap.pop() {
        if best[u].as_ref().is_some_and(|(c, i)| (*c, i) < (cost, &ids)) {
            continue;
        }
        if wanted[u] {
            return Some(path);
        }
        for &l in &idx.bus_lines[u] {
            if zone_line[l] || !grid.lines[l].in_service {
                continue;
            }
            let o = idx.other_end(l, u);
            if on[o] || zone_bus[o] {
                continue;
            }
            let mut add = Vec::new();
            let mut blocked = false;
            for end in 0..2 {
                if let Some(s) = idx.line_switch[l][end] {
                    if !state.is_closed(s) {
                        if held_open[s] || !operable(s) {
                            blocked = true;
                        } else {
                            add.push(s);
                        }
                    }
                }
            }
            if blocked {
                continue;
            }
            add.sort_by(|&a, &b| grid.switches[a].id.cmp(&grid.switches[b].id));
            let mut nids = ids.clone();
            nids.extend(add.iter().map(|&s| grid.switches[s].id.clone()));
            let ncost = cost + add.len();
            let better = match &best[o] {
                None => true,
                Some((c, i)) => (ncost, &nids) < (*c, i),
            };
            if better {
                best[o] = Some((ncost, nids.clone()));
                let mut npath = path.clone();
                npath.extend(add);
                heap.push(Reverse((ncost, nids, o, npath)));
            }
        }
    }
    None
}

/// Protection trip, fault isolation and resupply for a fault on `failed_line`.
pub fn resupply_sequence(grid: &Grid, failed_line: &str) -> Result<SwitchingSequence, TopologyError> {
    let idx = GridIndex::new(grid)?;
    let line = idx.line_idx(failed_line).ok_or_else(|| TopologyError::UnknownLine(failed_line.to_string()))?;
    let r = restore(&idx, &SwitchState::of(grid), line, RestorationMode::Full)?;
    let stations = |pred: &dyn Fn(usize) -> bool| -> Vec<String> {
        let mut v: Vec<String> =
            (0..idx.n_buses()).filter(|&b| idx.is_station(b) && pred(b)).map(|b| grid.buses[b].id.clone()).collect();
        v.sort();
        v
    };
    Ok(SwitchingSequence {
        failed_line: failed_line.to_string(),
        actions: r
            .actions
            .iter()
            .map(|&(stage, op, s, actuation)| SwitchAction {
                stage,
                op,
                switch: grid.switches[s].id.clone(),
                actuation,
            })
            .collect(),
        resulting_state: grid
            .switches
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id.clone(), r.final_state.is_closed(i)))
            .collect(),
        interrupted: stations(&|b| r.interrupted(b)),
        unsupplied: stations(&|b| r.pre_energized[b] && !r.final_energized[b]),
    })
}
