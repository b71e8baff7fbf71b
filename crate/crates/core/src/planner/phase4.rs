use std::collections::BTreeSet;

use serde::Serialize;

use super::{apply_measures, assess, failed_evaluation, ils, Evaluation, Measure, Penalty, PlannerError, Scope};
use crate::economics::measures_cost;
use crate::grid::{BusKind, Grid, GridIndex, SwitchKind, SwitchState};
use crate::principles::Principles;
use crate::reliability::is_automated;
use crate::topology::RadialityMode;

/// Closed rings on top of a radial plan.
#[derive(Debug, Clone, Serialize)]
pub struct Meshing {
    /// Ring closures with the automation each one needs.
    pub closures: Vec<Measure>,
    pub reinforcements: Vec<Measure>,
    /// €/a of closures and reinforcements.
    pub cost: f64,
    pub evaluations: usize,
    #[serde(skip)]
    pub grid: Grid,
}

/// Open load-break switches in secondary substations.
fn ring_switches(grid: &Grid) -> Vec<String> {
    let mut out: Vec<String> = grid
        .switches
        .iter()
        .filter(|s| !s.closed && s.kind == SwitchKind::LoadBreak)
        .filter(|s| grid.bus(&s.bus).is_some_and(|b| b.kind == BusKind::SecondarySubstation))
        .filter(|s| grid.line(&s.line).is_some_and(|l| l.in_service))
        .map(|s| s.id.clone())
        .collect();
    out.sort();
    out
}

/// Measures for an activation vector: closures first (each followed by the
/// automation of its station where needed), then reinforcements.
fn decode(base: &Grid, rings: &[String], reinforcements: &[Measure], x: &[bool]) -> (Vec<Measure>, Vec<Measure>) {
    let mut closures = Vec::new();
    let mut automated = BTreeSet::new();
    for (sw, _) in rings.iter().zip(x).filter(|(_, &a)| a) {
        closures.push(Measure::CloseRing { switch: sw.clone() });
        let bus = base.switch(sw).map(|s| s.bus.clone()).unwrap_or_default();
        if !is_automated(base, &bus) && automated.insert(bus.clone()) {
            closures.push(Measure::AutomateStation { bus });
        }
    }
    let chosen = reinforcements.iter().zip(&x[rings.len()..]).filter(|(_, &a)| a).map(|(m, _)| m.clone()).collect();
    (closures, chosen)
}

/// Closes rings at sectioning points where that saves reinforcement.
/// `base` is the sectioned, automated radial grid without reinforcement;
/// `initial` marks the reinforcements of the radial plan.
pub fn mesh(
    base: &Grid,
    reinforcements: &[Measure],
    initial: &[bool],
    pr: &Principles,
    seed: u64,
) -> Result<Meshing, PlannerError> {
    let pp = &pr.planner_params;
    if initial.len() != reinforcements.len() {
        return Err(PlannerError::PoolMismatch { expected: reinforcements.len(), got: initial.len() });
    }
    let rings = ring_switches(base);
    let n = rings.len() + reinforcements.len();
    let scope = Scope { radiality: RadialityMode::MeshedFeeders, operation: true };
    let cost_of = |ms: &[Measure]| measures_cost(base, ms, &pr.cost_model);
    let pool_cost = cost_of(&decode(base, &rings, reinforcements, &vec![true; n]).0)? + cost_of(reinforcements)?;
    let penalty = Penalty::for_pool(pool_cost, pp.magnitude_weight);
    let objective = |x: &[bool]| -> Evaluation {
        let (closures, chosen) = decode(base, &rings, reinforcements, x);
        let all: Vec<Measure> = closures.into_iter().chain(chosen).collect();
        let cost = cost_of(&all).unwrap_or(f64::INFINITY);
        let result = apply_measures(base, &all, &pp.line_catalog).and_then(|g| {
            let idx = GridIndex::new(&g)?;
            assess(&idx, &SwitchState::of(&g), pr, scope)
        });
        match result {
            Ok(a) => a.evaluation(cost),
            Err(e) => failed_evaluation(cost, &e),
        }
    };
    let start: Vec<bool> = std::iter::repeat_n(false, rings.len()).chain(initial.iter().copied()).collect();
    let res = ils(n, &objective, penalty, &pp.ils, seed, Some(&start), pp.exec)?;
    if !res.best.evaluation.feasible() {
        return Err(PlannerError::Infeasible { phase: "meshing", violations: res.best.evaluation.violations });
    }
    let (closures, chosen) = decode(base, &rings, reinforcements, &res.best.active);
    let all: Vec<Measure> = closures.iter().chain(&chosen).cloned().collect();
    Ok(Meshing {
        grid: apply_measures(base, &all, &pp.line_catalog)?,
        cost: res.best.evaluation.cost,
        evaluations: res.evaluations,
        closures,
        reinforcements: chosen,
    })
}
