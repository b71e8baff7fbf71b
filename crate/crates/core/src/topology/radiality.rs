use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{energized_in, TopologyError};
use crate::grid::{BusKind, Grid, GridIndex, SwitchState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialityMode {
    /// No cycles, no galvanic connection between two primary-substation feeders.
    Strict,
    /// Feeders may be meshed with each other (closed rings); cycles that do
    /// not pass a busbar are still forbidden.
    MeshedFeeders,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialityViolationKind {
    Cycle,
    FeederCoupling,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RadialityViolation {
    pub kind: RadialityViolationKind,
    /// Lines along the offending cycle or coupling path.
    pub lines: Vec<String>,
    pub buses: Vec<String>,
}

/// Node of the busbar-split graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Node {
    Bus(usize),
    /// One copy of a busbar per incident logical branch.
    Busbar {
        bus: usize,
        branch: usize,
    },
}

#[derive(Debug)]
struct Branch {
    lines: Vec<usize>,
    nodes: [usize; 2],
}

/// Energized sub-graph with every busbar split into one node per incident
/// branch; exact parallel lines collapse into one branch.
#[derive(Debug)]
struct SplitGraph {
    nodes: Vec<Node>,
    branches: Vec<Branch>,
}

impl SplitGraph {
    fn build(idx: &GridIndex, state: &SwitchState) -> Self {
        let on = energized_in(idx, state);
        let mut grouped: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for l in 0..idx.n_lines() {
            let [a, b] = idx.line_ends[l];
            if idx.line_active(state, l) && on[a] && on[b] {
                grouped.entry(idx.branch_key(l)).or_default().push(l);
            }
        }
        let mut nodes = Vec::new();
        let mut bus_node: BTreeMap<usize, usize> = BTreeMap::new();
        let mut branches = Vec::with_capacity(grouped.len());
        for (bi, ((a, b), lines)) in grouped.into_iter().enumerate() {
            let mut ends = [0; 2];
            for (k, bus) in [a, b].into_iter().enumerate() {
                ends[k] = if idx.is_busbar(bus) {
                    nodes.push(Node::Busbar { bus, branch: bi });
                    nodes.len() - 1
                } else {
                    *bus_node.entry(bus).or_insert_with(|| {
                        nodes.push(Node::Bus(bus));
                        nodes.len() - 1
                    })
                };
            }
            branches.push(Branch { lines, nodes: ends });
        }
        SplitGraph { nodes, branches }
    }

    fn node_bus(&self, n: usize) -> usize {
        match self.nodes[n] {
            Node::Bus(b) | Node::Busbar { bus: b, .. } => b,
        }
    }

    fn is_primary_copy(&self, idx: &GridIndex, n: usize) -> bool {
        matches!(self.nodes[n], Node::Busbar { bus, .. } if idx.grid.buses[bus].kind == BusKind::PrimarySubstation)
    }

    /// Shortest path (in branches) between two nodes over the given branches.
    fn path(&self, included: &[bool], from: usize, to: usize) -> Vec<usize> {
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.nodes.len()];
        for (bi, br) in self.branches.iter().enumerate() {
            if included[bi] {
                adj[br.nodes[0]].push((br.nodes[1], bi));
                adj[br.nodes[1]].push((br.nodes[0], bi));
            }
        }
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; self.nodes.len()];
        let mut seen = vec![false; self.nodes.len()];
        seen[from] = true;
        let mut q = VecDeque::from([from]);
        while let Some(n) = q.pop_front() {
            if n == to {
                break;
            }
            for &(m, bi) in &adj[n] {
                if !seen[m] {
                    seen[m] = true;
                    prev[m] = Some((n, bi));
                    q.push_back(m);
                }
            }
        }
        let mut out = Vec::new();
        let mut cur = to;
        while let Some((p, bi)) = prev[cur] {
            out.push(bi);
            cur = p;
        }
        out.reverse();
        out
    }
}

struct UnionFind {
    parent: Vec<usize>,
    primaries: Vec<Vec<usize>>,
}

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[rb] = ra;
            let moved = std::mem::take(&mut self.primaries[rb]);
            self.primaries[ra].extend(moved);
        }
    }
}

fn describe(idx: &GridIndex, g: &SplitGraph, branches: &[usize]) -> (Vec<String>, Vec<String>) {
    let mut lines = Vec::new();
    let mut buses = Vec::new();
    for &bi in branches {
        for &l in &g.branches[bi].lines {
            lines.push(idx.grid.lines[l].id.clone());
        }
        for &n in &g.branches[bi].nodes {
            let id = idx.grid.buses[g.node_bus(n)].id.clone();
            if !buses.contains(&id) {
                buses.push(id);
            }
        }
    }
    (lines, buses)
}

pub fn check_radiality_in(idx: &GridIndex, state: &SwitchState, mode: RadialityMode) -> Vec<RadialityViolation> {
    let g = SplitGraph::build(idx, state);
    let mut uf = UnionFind {
        parent: (0..g.nodes.len()).collect(),
        primaries: (0..g.nodes.len()).map(|n| if g.is_primary_copy(idx, n) { vec![n] } else { vec![] }).collect(),
    };
    let mut included = vec![false; g.branches.len()];
    let mut out = Vec::new();
    for (bi, br) in g.branches.iter().enumerate() {
        let [a, b] = br.nodes;
        let (ra, rb) = (uf.find(a), uf.find(b));
        if ra == rb {
            let mut path = g.path(&included, a, b);
            path.push(bi);
            let (lines, buses) = describe(idx, &g, &path);
            out.push(RadialityViolation { kind: RadialityViolationKind::Cycle, lines, buses });
            continue;
        }
        if mode == RadialityMode::Strict && !uf.primaries[ra].is_empty() && !uf.primaries[rb].is_empty() {
            let (pa, pb) = (uf.primaries[ra][0], uf.primaries[rb][0]);
            included[bi] = true;
            let path = g.path(&included, pa, pb);
            let (lines, buses) = describe(idx, &g, &path);
            out.push(RadialityViolation { kind: RadialityViolationKind::FeederCoupling, lines, buses });
        }
        included[bi] = true;
        uf.union(a, b);
    }
    out
}

/// Radiality of the energized grid with busbars as splitting nodes.
pub fn check_radiality(grid: &Grid, mode: RadialityMode) -> Result<Vec<RadialityViolation>, TopologyError> {
    let idx = GridIndex::new(grid)?;
    Ok(check_radiality_in(&idx, &SwitchState::of(grid), mode))
}

/// The buses and lines energized from one circuit-breaker terminal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Feeder {
    pub root_bus: String,
    pub root_line: String,
    pub root_switch: Option<String>,
    /// Non-busbar buses in breadth-first order from the root.
    pub buses: Vec<String>,
    pub lines: Vec<String>,
    /// Further busbar terminals inside the same galvanic section (downstream
    /// switching-station breakers, or the coupled feeder head of a closed ring).
    pub other_terminals: Vec<(String, String)>,
}

impl Feeder {
    pub fn is_coupled(&self, grid: &Grid) -> bool {
        self.other_terminals.iter().any(|(b, _)| grid.bus(b).is_some_and(|b| b.kind == BusKind::PrimarySubstation))
    }
}

pub fn find_feeders_in(idx: &GridIndex, state: &SwitchState) -> Vec<Feeder> {
    let g = SplitGraph::build(idx, state);
    let n = g.nodes.len();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (bi, br) in g.branches.iter().enumerate() {
        adj[br.nodes[0]].push((br.nodes[1], bi));
        adj[br.nodes[1]].push((br.nodes[0], bi));
    }
    let terminal = |node: usize| -> (String, String) {
        match g.nodes[node] {
            Node::Busbar { bus, branch } => {
                let l = g.branches[branch].lines[0];
                (idx.grid.buses[bus].id.clone(), idx.grid.lines[l].id.clone())
            }
            Node::Bus(_) => unreachable!("terminal of a plain bus"),
        }
    };

    let mut comp = vec![usize::MAX; n];
    let mut feeders = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut members = vec![start];
        comp[start] = start;
        let mut i = 0;
        while i < members.len() {
            let x = members[i];
            i += 1;
            for &(y, _) in &adj[x] {
                if comp[y] == usize::MAX {
                    comp[y] = start;
                    members.push(y);
                }
            }
        }
        let mut roots: Vec<usize> =
            members.iter().copied().filter(|&m| matches!(g.nodes[m], Node::Busbar { .. })).collect();
        if roots.is_empty() {
            continue;
        }
        roots.sort_by_key(|&r| {
            let primary = !g.is_primary_copy(idx, r);
            (primary, terminal(r))
        });
        let root = roots[0];

        // BFS from the root for ordered bus and line lists.
        let mut seen = vec![false; n];
        seen[root] = true;
        let mut q = VecDeque::from([root]);
        let mut buses = Vec::new();
        let mut lines = Vec::new();
        while let Some(x) = q.pop_front() {
            if let Node::Bus(b) = g.nodes[x] {
                buses.push(idx.grid.buses[b].id.clone());
            }
            let mut next: Vec<(usize, usize)> = adj[x].clone();
            next.sort_by_key(|&(_, bi)| bi);
            for (y, bi) in next {
                if !seen[y] {
                    seen[y] = true;
                    for &l in &g.branches[bi].lines {
                        lines.push(idx.grid.lines[l].id.clone());
                    }
                    q.push_back(y);
                }
            }
        }
        let (root_bus, root_line) = terminal(root);
        let root_switch = {
            let bi = match g.nodes[root] {
                Node::Busbar { branch, .. } => branch,
                Node::Bus(_) => unreachable!(),
            };
            let bus = g.node_bus(root);
            g.branches[bi].lines.iter().find_map(|&l| idx.switch_at(l, bus)).map(|s| idx.grid.switches[s].id.clone())
        };
        feeders.push(Feeder {
            root_bus,
            root_line,
            root_switch,
            buses,
            lines,
            other_terminals: roots[1..].iter().map(|&r| terminal(r)).collect(),
        });
    }
    feeders.sort_by(|a, b| (&a.root_bus, &a.root_line).cmp(&(&b.root_bus, &b.root_line)));
    feeders
}

/// Decomposes the energized grid into feeders rooted at busbar terminals.
pub fn find_feeders(grid: &Grid) -> Result<Vec<Feeder>, TopologyError> {
    let idx = GridIndex::new(grid)?;
    Ok(find_feeders_in(&idx, &SwitchState::of(grid)))
}
