use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::TopologyError;
use crate::grid::{Grid, GridIndex};

/// A station that needs a backup connection but has none.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContingencyViolation {
    pub station: String,
}

/// Stations that lose every path to a source when some single line branch
/// fails, whatever the switch positions. Exact parallel lines count as one
/// branch; switch states are ignored (any switch may be reconfigured).
fn single_branch_dependent(idx: &GridIndex) -> Vec<bool> {
    let nb = idx.n_buses();
    let sink = nb;
    // (u, v, is_line_branch)
    let mut edges: Vec<(usize, usize, bool)> = Vec::new();
    let mut grouped: BTreeMap<(usize, usize), ()> = BTreeMap::new();
    for l in 0..idx.n_lines() {
        if idx.grid.lines[l].in_service {
            grouped.insert(idx.branch_key(l), ());
        }
    }
    edges.extend(grouped.keys().map(|&(a, b)| (a, b, true)));
    edges.extend(idx.transformer_ends.iter().map(|&[a, b]| (a, b, false)));
    edges.extend(idx.source_buses.iter().map(|&s| (s, sink, false)));

    let n = nb + 1;
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (e, &(u, v, _)) in edges.iter().enumerate() {
        adj[u].push((v, e));
        adj[v].push((u, e));
    }

    // Iterative low-link bridge search.
    let mut order = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut is_bridge = vec![false; edges.len()];
    let mut clock = 0;
    for root in 0..n {
        if order[root] != usize::MAX {
            continue;
        }
        order[root] = clock;
        low[root] = clock;
        clock += 1;
        // (node, parent edge, next neighbour position)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        while let Some(top) = stack.last_mut() {
            let (u, pe) = (top.0, top.1);
            if top.2 < adj[u].len() {
                let (v, e) = adj[u][top.2];
                top.2 += 1;
                if e == pe {
                    continue;
                }
                if order[v] == usize::MAX {
                    order[v] = clock;
                    low[v] = clock;
                    clock += 1;
                    stack.push((v, e, 0));
                } else {
                    low[u] = low[u].min(order[v]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[u]);
                    if low[u] > order[p] {
                        is_bridge[pe] = true;
                    }
                }
            }
        }
    }

    // Components without line bridges; a station is safe iff it shares one with the sink.
    let mut comp = vec![usize::MAX; n];
    let mut stack = vec![sink];
    comp[sink] = 0;
    while let Some(u) = stack.pop() {
        for &(v, e) in &adj[u] {
            if is_bridge[e] && edges[e].2 {
                continue;
            }
            if comp[v] == usize::MAX {
                comp[v] = 0;
                stack.push(v);
            }
        }
    }
    (0..nb).map(|b| comp[b] != 0).collect()
}

pub fn find_stubs_in(idx: &GridIndex) -> BTreeSet<String> {
    let dependent = single_branch_dependent(idx);
    idx.grid
        .buses
        .iter()
        .enumerate()
        .filter(|(i, b)| b.kind.is_station() && dependent[*i])
        .map(|(_, b)| b.id.clone())
        .collect()
}

/// Stations that are not two-edge-connected to the external sources.
pub fn find_stubs(baseline: &Grid) -> Result<BTreeSet<String>, TopologyError> {
    let idx = GridIndex::new(baseline)?;
    Ok(find_stubs_in(&idx))
}

/// Sets `requires_contingency_supply` from the stub analysis of `grid`.
pub fn mark_stubs(grid: &mut Grid) -> Result<BTreeSet<String>, TopologyError> {
    let stubs = find_stubs(grid)?;
    for b in &mut grid.buses {
        if b.kind.is_station() {
            b.requires_contingency_supply = !stubs.contains(&b.id);
        }
    }
    Ok(stubs)
}

pub fn check_contingency_supply_in(idx: &GridIndex) -> Vec<ContingencyViolation> {
    let dependent = single_branch_dependent(idx);
    idx.grid
        .buses
        .iter()
        .enumerate()
        .filter(|(i, b)| b.kind.is_station() && b.requires_contingency_supply && dependent[*i])
        .map(|(_, b)| ContingencyViolation { station: b.id.clone() })
        .collect()
}

/// Stations flagged as needing a backup connection that some single line
/// failure would cut off from every source.
pub fn check_contingency_supply(grid: &Grid) -> Result<Vec<ContingencyViolation>, TopologyError> {
    let idx = GridIndex::new(grid)?;
    Ok(check_contingency_supply_in(&idx))
}
