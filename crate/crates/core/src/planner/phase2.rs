use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use super::{
    apply_measures, assess, failed_evaluation, ils, Assessment, Evaluation, Measure, Penalty, PlannerError,
    PlannerParams, Scope,
};
use crate::economics::measures_cost;
use crate::grid::{BusKind, Grid, GridIndex, SwitchKind, SwitchState};
use crate::power_flow::{ViolationKind, ViolationReport};
use crate::principles::Principles;
use crate::topology::{check_radiality_in, check_supply_in, find_feeders_in, RadialityMode};

const MAX_SECTIONING_MOVES: usize = 200;

/// Outcome of sectioning-point optimization and cable reinforcement.
#[derive(Debug, Clone, Serialize)]
pub struct Reinforcement {
    /// Switch changes against the input grid.
    pub sectioning: Vec<Measure>,
    pub pool: Vec<Measure>,
    pub chosen: Vec<bool>,
    /// Chosen reinforcement measures.
    pub measures: Vec<Measure>,
    /// €/a of the chosen measures.
    pub cost: f64,
    pub evaluations: usize,
    /// Input grid with the optimized sectioning points, not reinforced.
    #[serde(skip)]
    pub sectioned: Grid,
    #[serde(skip)]
    pub grid: Grid,
}

fn score(a: &Assessment, weight: f64) -> f64 {
    1000.0 * a.count() as f64 + weight * a.operation.total_magnitude()
}

/// Lines on the path between the ends of `line` through the active grid.
fn bypass_path(idx: &GridIndex, state: &SwitchState, line: usize) -> Vec<usize> {
    let [from, to] = idx.line_ends[line];
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; idx.n_buses()];
    let mut seen = vec![false; idx.n_buses()];
    seen[from] = true;
    let mut q = VecDeque::from([from]);
    while let Some(b) = q.pop_front() {
        if b == to {
            break;
        }
        for &l in &idx.bus_lines[b] {
            if l == line || !idx.line_active(state, l) {
                continue;
            }
            let o = idx.other_end(l, b);
            if !seen[o] {
                seen[o] = true;
                prev[o] = Some((b, l));
                q.push_back(o);
            }
        }
    }
    let mut path = Vec::new();
    let mut cur = to;
    while let Some((p, l)) = prev[cur] {
        path.push(l);
        cur = p;
    }
    path
}

/// Moves of a sectioning point: close an open load-break switch and open a
/// closed one on the path the closure would short.
fn sectioning_moves(idx: &GridIndex, state: &SwitchState) -> Vec<(usize, usize)> {
    let grid = idx.grid;
    let mut out = BTreeSet::new();
    for (s, sw) in grid.switches.iter().enumerate() {
        if state.is_closed(s) || sw.kind != SwitchKind::LoadBreak {
            continue;
        }
        let line = idx.switch_terminal[s].line;
        if !grid.lines[line].in_service {
            continue;
        }
        for l in bypass_path(idx, state, line) {
            for t in idx.line_switch[l].into_iter().flatten() {
                if state.is_closed(t) && grid.switches[t].kind == SwitchKind::LoadBreak {
                    out.insert((s, t));
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Steepest descent over sectioning-point moves that keep the grid radial
/// and supplied, minimizing operating violations.
fn optimize_sectioning(grid: &Grid, pr: &Principles) -> Result<Grid, PlannerError> {
    let pp = &pr.planner_params;
    let idx = GridIndex::new(grid)?;
    let scope = Scope { radiality: RadialityMode::Strict, operation: true };
    let mut state = SwitchState::of(grid);
    let mut cur = assess(&idx, &state, pr, scope)?;
    for _ in 0..MAX_SECTIONING_MOVES {
        if cur.operation.is_empty() {
            break;
        }
        let moves = sectioning_moves(&idx, &state);
        let scored = pp.exec.map(&moves, |&(close, open)| {
            let mut s = state.clone();
            s.set(close, true);
            s.set(open, false);
            if !check_supply_in(&idx, &s).is_empty() || !check_radiality_in(&idx, &s, RadialityMode::Strict).is_empty()
            {
                return None;
            }
            assess(&idx, &s, pr, scope).ok().map(|a| score(&a, pp.magnitude_weight))
        });
        let best = scored
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| (v, i)))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        match best {
            Some((v, i)) if v < score(&cur, pp.magnitude_weight) - 1e-9 => {
                let (close, open) = moves[i];
                state.set(close, true);
                state.set(open, false);
                cur = assess(&idx, &state, pr, scope)?;
            }
            _ => break,
        }
    }
    Ok(grid.with_switch_state(&state))
}

/// Cable measures for lines of feeders with violations: the next rung of
/// the ladder and, between two stations, a parallel line.
pub fn reinforcement_pool(
    idx: &GridIndex,
    state: &SwitchState,
    report: &ViolationReport,
    pp: &PlannerParams,
) -> Vec<Measure> {
    let grid = idx.grid;
    let elements: BTreeSet<&str> =
        report.entries.iter().flat_map(|v| [Some(v.element.as_str()), v.contingency.as_deref()]).flatten().collect();
    let everywhere = report.entries.iter().any(|v| v.kind == ViolationKind::Nonconvergence);
    let mut lines: BTreeSet<String> = BTreeSet::new();
    for f in find_feeders_in(idx, state) {
        let touched = everywhere
            || f.buses.iter().chain(&f.lines).any(|e| elements.contains(e.as_str()))
            || elements.contains(f.root_line.as_str());
        if touched {
            lines.extend(f.lines.iter().cloned());
        }
    }
    lines.extend(elements.iter().filter(|e| grid.line(e).is_some()).map(|e| e.to_string()));
    let ampacity =
        |name: &str| grid.line_type(name).or_else(|| pp.line_catalog.iter().find(|t| t.name == name)).map(|t| t.i_max);
    let mut pool = Vec::new();
    for id in lines {
        let Some(line) = grid.line(&id) else { continue };
        if !line.in_service {
            continue;
        }
        let current = ampacity(&line.line_type).unwrap_or(0.0);
        if let Some(next) = pp.ladder.iter().find(|t| ampacity(t).is_some_and(|a| a > current)) {
            pool.push(Measure::ReplaceLine { line: id.clone(), new_type: next.clone() });
        }
        let secondary = |b: &str| grid.bus(b).is_some_and(|b| b.kind == BusKind::SecondarySubstation);
        if secondary(&line.from_bus) && secondary(&line.to_bus) {
            pool.push(Measure::AddParallel { line: id.clone(), line_type: line.line_type.clone() });
        }
    }
    pool
}

fn sectioning_diff(before: &Grid, after: &Grid) -> Vec<Measure> {
    let mut out: Vec<Measure> = before
        .switches
        .iter()
        .zip(&after.switches)
        .filter(|(a, b)| a.closed != b.closed)
        .map(|(_, b)| Measure::SetSectioningPoint { switch: b.id.clone(), open: !b.closed })
        .collect();
    out.sort_by(|a, b| format!("{a:?}").cmp(&format!("{b:?}")));
    out
}

fn chosen(pool: &[Measure], active: &[bool]) -> Vec<Measure> {
    pool.iter().zip(active).filter(|(_, &a)| a).map(|(m, _)| m.clone()).collect()
}

/// Moves sectioning points, then picks the cheapest set of cable measures
/// that clears every voltage and loading violation.
pub fn reinforce(grid: &Grid, pr: &Principles, seed: u64) -> Result<Reinforcement, PlannerError> {
    let pp = &pr.planner_params;
    let sectioned = optimize_sectioning(grid, pr)?;
    let sectioning = sectioning_diff(grid, &sectioned);
    let scope = Scope { radiality: RadialityMode::Strict, operation: true };
    let (pool, residual) = {
        let idx = GridIndex::new(&sectioned)?;
        let state = SwitchState::of(&sectioned);
        let a = assess(&idx, &state, pr, scope)?;
        (reinforcement_pool(&idx, &state, &a.operation, pp), a.count())
    };
    if residual == 0 {
        let n = pool.len();
        return Ok(Reinforcement {
            sectioning,
            pool,
            chosen: vec![false; n],
            measures: Vec::new(),
            cost: 0.0,
            evaluations: 1,
            grid: sectioned.clone(),
            sectioned,
        });
    }
    let costs: Vec<f64> = pool
        .iter()
        .map(|m| measures_cost(&sectioned, std::slice::from_ref(m), &pr.cost_model))
        .collect::<Result<_, _>>()?;
    let penalty = Penalty::for_pool(costs.iter().sum(), pp.magnitude_weight);
    let objective = |x: &[bool]| -> Evaluation {
        let cost: f64 = costs.iter().zip(x).filter(|(_, &a)| a).map(|(c, _)| c).sum();
        let result = apply_measures(&sectioned, &chosen(&pool, x), &pp.line_catalog).and_then(|g| {
            let idx = GridIndex::new(&g)?;
            assess(&idx, &SwitchState::of(&g), pr, scope)
        });
        match result {
            Ok(a) => a.evaluation(cost),
            Err(e) => failed_evaluation(cost, &e),
        }
    };
    let res = ils(pool.len(), &objective, penalty, &pp.ils, seed, None, pp.exec)?;
    if !res.best.evaluation.feasible() {
        return Err(PlannerError::Infeasible { phase: "reinforcement", violations: res.best.evaluation.violations });
    }
    let measures = chosen(&pool, &res.best.active);
    let grid = apply_measures(&sectioned, &measures, &pp.line_catalog)?;
    Ok(Reinforcement {
        sectioning,
        chosen: res.best.active,
        cost: res.best.evaluation.cost,
        evaluations: res.evaluations,
        measures,
        pool,
        sectioned,
        grid,
    })
}
