use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use super::PlannerError;
use crate::grid::{BusKind, Grid, GridIndex, Switch, SwitchKind};
use crate::topology::is_source_busbar;

#[derive(Debug, Clone, Copy)]
struct Dist(f64);

impl PartialEq for Dist {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Length-weighted distance of every bus from the nearest source busbar,
/// ignoring switch positions. Returns distances and the parent line of each
/// reached non-source bus.
fn shortest_paths(idx: &GridIndex) -> (Vec<f64>, Vec<Option<usize>>) {
    let n = idx.n_buses();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![None; n];
    let mut heap = BinaryHeap::new();
    for (b, d) in dist.iter_mut().enumerate() {
        if is_source_busbar(idx, b) {
            *d = 0.0;
            heap.push(Reverse((Dist(0.0), b)));
        }
    }
    while let Some(Reverse((Dist(d), b))) = heap.pop() {
        if d > dist[b] {
            continue;
        }
        for &l in &idx.bus_lines[b] {
            if !idx.grid.lines[l].in_service {
                continue;
            }
            let o = idx.other_end(l, b);
            let nd = d + idx.grid.lines[l].length;
            if nd < dist[o] || (nd == dist[o] && parent[o].is_some_and(|p| l < p)) {
                dist[o] = nd;
                parent[o] = Some(l);
                heap.push(Reverse((Dist(nd), o)));
            }
        }
    }
    (dist, parent)
}

struct Components {
    parent: Vec<usize>,
    primary: Vec<bool>,
}

impl Components {
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
}

/// Sets switch positions so that the grid is strictly radial: every bus is
/// fed along its shortest path from a primary substation, and every further
/// line is closed only if it neither closes a cycle nor couples two primary
/// feeders. Lines that stay out of service are opened at their far end; a
/// load-break switch is added where that end has none.
pub fn radialize(grid: &mut Grid) -> Result<(), PlannerError> {
    let (open_at, new_switches) = {
        let idx = GridIndex::new(grid)?;
        let (dist, parent) = shortest_paths(&idx);
        let mut node_of: HashMap<(usize, (usize, usize)), usize> = HashMap::new();
        let mut comps = Components { parent: Vec::new(), primary: Vec::new() };
        let mut node = |bus: usize, line: usize, comps: &mut Components| -> usize {
            let key = if idx.is_busbar(bus) { (bus, idx.branch_key(line)) } else { (bus, (usize::MAX, usize::MAX)) };
            *node_of.entry(key).or_insert_with(|| {
                comps.parent.push(comps.parent.len());
                comps.primary.push(idx.is_busbar(bus) && idx.grid.buses[bus].kind == BusKind::PrimarySubstation);
                comps.parent.len() - 1
            })
        };
        // Second view with switching-station busbars merged: a loop that leaves
        // and re-enters the same switching station is opened as well.
        let mut merged: HashMap<(usize, (usize, usize)), usize> = HashMap::new();
        let mut loops = Components { parent: Vec::new(), primary: Vec::new() };
        let mut merged_node = |bus: usize, line: usize, loops: &mut Components| -> usize {
            let key = if idx.is_busbar(bus) && idx.grid.buses[bus].kind == BusKind::PrimarySubstation {
                (bus, idx.branch_key(line))
            } else {
                (bus, (usize::MAX, usize::MAX))
            };
            *merged.entry(key).or_insert_with(|| {
                loops.parent.push(loops.parent.len());
                loops.primary.push(false);
                loops.parent.len() - 1
            })
        };
        let mut closed_branches: BTreeMap<(usize, usize), ()> = BTreeMap::new();
        let mut is_tree = vec![false; idx.n_lines()];
        for p in parent.iter().flatten() {
            is_tree[*p] = true;
        }
        let mut join = |l: usize, comps: &mut Components, closed: &mut BTreeMap<(usize, usize), ()>| {
            let [a, b] = idx.line_ends[l];
            let (na, nb) = (node(a, l, comps), node(b, l, comps));
            let (ra, rb) = (comps.find(na), comps.find(nb));
            if closed.contains_key(&idx.branch_key(l)) {
                return true;
            }
            if ra == rb || (comps.primary[ra] && comps.primary[rb]) {
                return false;
            }
            let (ma, mb) = (merged_node(a, l, &mut loops), merged_node(b, l, &mut loops));
            let (la, lb) = (loops.find(ma), loops.find(mb));
            if la == lb {
                return false;
            }
            loops.parent[lb] = la;
            comps.parent[rb] = ra;
            comps.primary[ra] |= comps.primary[rb];
            closed.insert(idx.branch_key(l), ());
            true
        };
        let mut order: Vec<usize> = (0..idx.n_lines()).filter(|&l| idx.grid.lines[l].in_service).collect();
        order.sort_by_key(|&l| (!is_tree[l], idx.grid.lines[l].id.clone()));
        let mut open_at: Vec<(usize, usize)> = Vec::new();
        for l in order {
            if !join(l, &mut comps, &mut closed_branches) {
                let [a, b] = idx.line_ends[l];
                let far = if dist[b] >= dist[a] { b } else { a };
                open_at.push((l, far));
            }
        }
        let mut new_switches = Vec::new();
        let mut opens = Vec::new();
        for (l, far) in open_at {
            let near = idx.other_end(l, far);
            match (idx.switch_at(l, far), idx.switch_at(l, near)) {
                (Some(s), _) | (None, Some(s)) => opens.push(s),
                (None, None) => {
                    let line = &idx.grid.lines[l].id;
                    let bus = &idx.grid.buses[far].id;
                    new_switches.push(Switch {
                        id: format!("{line}@{bus}"),
                        bus: bus.clone(),
                        line: line.clone(),
                        closed: false,
                        kind: if idx.is_busbar(far) { SwitchKind::CircuitBreaker } else { SwitchKind::LoadBreak },
                        remote_controlled: false,
                    });
                }
            }
        }
        (opens, new_switches)
    };
    for s in grid.switches.iter_mut() {
        s.closed = true;
    }
    for s in open_at {
        grid.switches[s].closed = false;
    }
    grid.switches.extend(new_switches);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::topology::{check_radiality, check_supply, RadialityMode};

    #[test]
    fn closed_ring_is_opened_once() {
        let mut g = fixtures::fig1_closed_ring();
        radialize(&mut g).unwrap();
        assert!(check_radiality(&g, RadialityMode::Strict).unwrap().is_empty());
        assert!(check_supply(&g).unwrap().is_empty());
        assert_eq!(g.switches.iter().filter(|s| !s.closed).count(), 1);
    }

    #[test]
    fn random_radial_grids_stay_supplied() {
        for seed in 0..10 {
            let mut g = fixtures::random_radial(seed, 12);
            radialize(&mut g).unwrap();
            assert!(check_radiality(&g, RadialityMode::Strict).unwrap().is_empty(), "seed {seed}");
            assert!(check_supply(&g).unwrap().is_empty(), "seed {seed}");
        }
    }
}
