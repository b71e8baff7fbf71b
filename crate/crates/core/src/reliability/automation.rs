use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{check_reliability, fmea_in, FmeaResult, ReliabilityError, ReliabilityParams, ReliabilityViolationKind};
use crate::exec::Exec;
use crate::grid::{BusKind, Grid, GridIndex, SwitchState};
use crate::topology::{find_feeders_in, Feeder};

/// A station counts as automated when every switch in it is remote controlled.
pub fn is_automated(grid: &Grid, bus: &str) -> bool {
    let mut any = false;
    for s in grid.switches.iter().filter(|s| s.bus == bus) {
        if !s.remote_controlled {
            return false;
        }
        any = true;
    }
    any
}

fn automatable(grid: &Grid, bus: &str) -> bool {
    grid.bus(bus).is_some_and(|b| b.kind == BusKind::SecondarySubstation)
        && grid.switches.iter().any(|s| s.bus == bus && !s.remote_controlled)
}

#[derive(Debug, Clone)]
pub struct Automation {
    pub grid: Grid,
    /// Stations automated, in the order chosen.
    pub stations: Vec<String>,
    pub fmea: FmeaResult,
}

struct FeederTree {
    /// Buses in BFS order from the feeder head.
    order: Vec<usize>,
    parent: BTreeMap<usize, usize>,
    depth_km: BTreeMap<usize, f64>,
}

fn feeder_tree(idx: &GridIndex, state: &SwitchState, feeder: &Feeder) -> FeederTree {
    let members: BTreeSet<usize> = feeder.buses.iter().filter_map(|b| idx.bus_idx(b)).collect();
    let root_bus = idx.bus_idx(&feeder.root_bus).expect("feeder root");
    let root_line = idx.line_idx(&feeder.root_line).expect("feeder line");
    let first = idx.other_end(root_line, root_bus);
    let mut order = vec![first];
    let mut parent = BTreeMap::new();
    let mut depth_km = BTreeMap::from([(first, idx.grid.lines[root_line].length)]);
    let mut q = VecDeque::from([first]);
    while let Some(u) = q.pop_front() {
        let mut next: Vec<usize> = idx.bus_lines[u].clone();
        next.sort_by(|&a, &b| idx.grid.lines[a].id.cmp(&idx.grid.lines[b].id));
        for l in next {
            if !idx.line_active(state, l) {
                continue;
            }
            let v = idx.other_end(l, u);
            if members.contains(&v) && !depth_km.contains_key(&v) {
                depth_km.insert(v, depth_km[&u] + idx.grid.lines[l].length);
                parent.insert(v, u);
                order.push(v);
                q.push_back(v);
            }
        }
    }
    FeederTree { order, parent, depth_km }
}

/// Station in the remote zone around `target` that best balances the
/// installed power above and below it. The zone is the part of the feeder
/// between already automated stations. Ties go to the farther station.
pub fn load_centre(
    idx: &GridIndex,
    state: &SwitchState,
    feeder: &Feeder,
    target: &str,
    loads: &BTreeMap<String, f64>,
) -> Option<String> {
    let grid = idx.grid;
    let tree = feeder_tree(idx, state, feeder);
    let automated = |b: usize| is_automated(grid, &grid.buses[b].id);
    let target = idx.bus_idx(target)?;
    if !tree.depth_km.contains_key(&target) {
        return None;
    }
    // Zone head: nearest automated ancestor (inclusive), else the feeder's first bus.
    let mut head = target;
    while !automated(head) {
        match tree.parent.get(&head) {
            Some(&p) => head = p,
            None => break,
        }
    }
    let in_zone = |b: usize| -> bool {
        let mut cur = b;
        loop {
            if cur == head {
                return true;
            }
            if automated(cur) {
                return false;
            }
            match tree.parent.get(&cur) {
                Some(&p) => cur = p,
                None => return false,
            }
        }
    };
    let zone: Vec<usize> = tree.order.iter().copied().filter(|&b| in_zone(b)).collect();
    let p = |b: usize| loads.get(&grid.buses[b].id).copied().unwrap_or(0.0);
    let total: f64 = zone.iter().map(|&b| p(b)).sum();
    // Power of each zone bus's subtree restricted to the zone, children first.
    let mut below: BTreeMap<usize, f64> = zone.iter().map(|&b| (b, p(b))).collect();
    for &b in zone.iter().rev() {
        if b == head {
            continue;
        }
        if let Some(&par) = tree.parent.get(&b) {
            let v = below[&b];
            if let Some(x) = below.get_mut(&par) {
                *x += v;
            }
        }
    }
    zone.iter()
        .copied()
        .filter(|&b| automatable(grid, &grid.buses[b].id))
        .map(|b| {
            let down = below[&b];
            let up = total - down;
            ((up - down).abs(), b)
        })
        .min_by(|(ia, a), (ib, b)| {
            ia.total_cmp(ib)
                .then(tree.depth_km[b].total_cmp(&tree.depth_km[a]))
                .then(grid.buses[*a].id.cmp(&grid.buses[*b].id))
        })
        .map(|(_, b)| grid.buses[b].id.clone())
}

/// Station holding a normally open point at the edge of `feeder`, so that
/// resupply from the neighbouring feeder becomes remote.
fn backup_station(idx: &GridIndex, state: &SwitchState, feeder: &Feeder) -> Option<String> {
    let grid = idx.grid;
    let members: BTreeSet<&str> = feeder.buses.iter().map(String::as_str).collect();
    let mut cands: Vec<&str> = Vec::new();
    for (si, sw) in grid.switches.iter().enumerate() {
        if state.is_closed(si) {
            continue;
        }
        let Some(line) = grid.line(&sw.line) else { continue };
        if members.contains(line.from_bus.as_str()) || members.contains(line.to_bus.as_str()) {
            cands.extend([sw.bus.as_str(), line.from_bus.as_str(), line.to_bus.as_str()]);
        }
    }
    cands.sort();
    cands.into_iter().find(|b| automatable(grid, b)).map(str::to_string)
}

/// Marks the switches of `station` remote controlled.
pub fn automate_station(grid: &mut Grid, station: &str) {
    for s in grid.switches.iter_mut().filter(|s| s.bus == station) {
        s.remote_controlled = true;
    }
}

pub fn automate_for_reliability_in(
    grid: &Grid,
    params: &ReliabilityParams,
    baseline: &FmeaResult,
    exec: Exec,
) -> Result<Automation, ReliabilityError> {
    let mut grid = grid.clone();
    let mut stations = Vec::new();
    let loads = grid.installed_load_kw();
    loop {
        let idx = GridIndex::new(&grid)?;
        let state = SwitchState::of(&grid);
        let result = fmea_in(&idx, &state, params, exec)?;
        let violations = check_reliability(&grid.meta.name, &result, params, baseline);
        if violations.is_empty() {
            return Ok(Automation { grid, stations, fmea: result });
        }
        let feeders = find_feeders_in(&idx, &state);
        let feeder_of = |station: &str| feeders.iter().position(|f| f.buses.iter().any(|b| b == station));

        // Worst violating station per feeder.
        let mut targets: BTreeMap<usize, (f64, String)> = BTreeMap::new();
        for v in violations.iter().filter(|v| v.kind == ReliabilityViolationKind::StationOutageEnergy) {
            if let Some(f) = feeder_of(&v.element) {
                let cand = (v.value - v.limit, v.element.clone());
                let e = targets.entry(f).or_insert_with(|| cand.clone());
                if cand.0 > e.0 {
                    *e = cand;
                }
            }
        }
        let pick_in = |fi: usize, target: &str| -> Option<String> {
            let f = &feeders[fi];
            load_centre(&idx, &state, f, target, &loads)
                .or_else(|| {
                    // Zone exhausted: any remaining station of the feeder.
                    f.buses.iter().find(|b| automatable(&grid, b)).cloned()
                })
                .or_else(|| backup_station(&idx, &state, f))
        };
        let mut chosen = Vec::new();
        if targets.is_empty() {
            // Only ASIDI: feeders by outage energy, their worst station.
            let mut ranked: Vec<(f64, usize, String)> = Vec::new();
            for (fi, f) in feeders.iter().enumerate() {
                let e: f64 = f.buses.iter().filter_map(|b| result.e_out.get(b)).sum();
                let worst = f
                    .buses
                    .iter()
                    .filter_map(|b| result.e_out.get(b).map(|e| (*e, b.clone())))
                    .max_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
                if let Some((_, w)) = worst {
                    if e > 0.0 {
                        ranked.push((e, fi, w));
                    }
                }
            }
            ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            chosen.extend(ranked.iter().find_map(|(_, fi, w)| pick_in(*fi, w)));
        } else {
            for (fi, (_, target)) in &targets {
                chosen.extend(pick_in(*fi, target));
            }
        }
        if chosen.is_empty() {
            return Err(ReliabilityError::Unsatisfiable(violations));
        }
        for s in chosen {
            log::debug!("automating station {s}");
            automate_station(&mut grid, &s);
            stations.push(s);
        }
    }
}

/// Automates load-centre stations of violating feeders, one per feeder and
/// round, until the reliability constraints hold.
pub fn automate_for_reliability(
    grid: &Grid,
    params: &ReliabilityParams,
    baseline: &FmeaResult,
) -> Result<Automation, ReliabilityError> {
    automate_for_reliability_in(grid, params, baseline, Exec::default())
}
