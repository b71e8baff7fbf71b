use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    apply_measures, assess, derive_seed, failed_evaluation, ils, radialize, Evaluation, Measure, Penalty, PlannerError,
    Scope,
};
use crate::economics::measures_cost;
use crate::exec::Exec;
use crate::grid::{Grid, GridIndex, SwitchState};
use crate::principles::Principles;
use crate::topology::RadialityMode;

/// A radial target-grid topology built from a dismantled grid.
#[derive(Debug, Clone, Serialize)]
pub struct Topology {
    pub index: usize,
    pub seed: u64,
    /// Trails laid, in pool order.
    pub trails: Vec<Measure>,
    /// €/a of the trails.
    pub cost: f64,
    /// Dismantled grid plus trails, radially switched.
    #[serde(skip)]
    pub grid: Grid,
}

/// Grid with the active trails of `pool`, radially switched.
fn build(base: &Grid, pool: &[Measure], active: &[bool], pr: &Principles) -> Result<Grid, PlannerError> {
    let chosen: Vec<Measure> = pool.iter().zip(active).filter(|(_, &a)| a).map(|(m, _)| m.clone()).collect();
    let mut g = apply_measures(base, &chosen, &pr.planner_params.line_catalog)?;
    radialize(&mut g)?;
    Ok(g)
}

fn evaluate(base: &Grid, pool: &[Measure], costs: &[f64], active: &[bool], pr: &Principles) -> Evaluation {
    let cost: f64 = costs.iter().zip(active).filter(|(_, &a)| a).map(|(c, _)| c).sum();
    let scope = Scope { radiality: RadialityMode::Strict, operation: false };
    let result = build(base, pool, active, pr).and_then(|g| {
        let idx = GridIndex::new(&g)?;
        assess(&idx, &SwitchState::of(&g), pr, scope)
    });
    match result {
        Ok(a) => a.evaluation(cost),
        Err(e) => failed_evaluation(cost, &e),
    }
}

/// Random greedy start: trails in shuffled order until the topology is
/// feasible, then every trail that can go is dropped again.
fn greedy_start(n: usize, rng: &mut ChaCha8Rng, feasible: impl Fn(&[bool]) -> bool) -> Option<Vec<bool>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut x = vec![false; n];
    if !feasible(&x) {
        let mut found = false;
        for &j in &order {
            x[j] = true;
            if feasible(&x) {
                found = true;
                break;
            }
        }
        if !found {
            return None;
        }
    }
    order.shuffle(rng);
    for &j in &order {
        if x[j] {
            x[j] = false;
            if !feasible(&x) {
                x[j] = true;
            }
        }
    }
    Some(x)
}

/// Generates `n_topologies` radial topologies over the trail pool, each from
/// its own random greedy start polished by local search. Setup errors fail
/// the whole search; a topology without a feasible solution fails alone.
pub fn search_topologies(
    dismantled: &Grid,
    pool: &[Measure],
    pr: &Principles,
    seed: u64,
) -> Result<Vec<Result<Topology, PlannerError>>, PlannerError> {
    let pp = &pr.planner_params;
    let costs: Vec<f64> = pool
        .iter()
        .map(|m| measures_cost(dismantled, std::slice::from_ref(m), &pr.cost_model))
        .collect::<Result<_, _>>()?;
    let penalty = Penalty::for_pool(costs.iter().sum(), pp.magnitude_weight);
    let objective = |x: &[bool]| evaluate(dismantled, pool, &costs, x, pr);
    let run = |k: usize| -> Result<Topology, PlannerError> {
        let s = derive_seed(seed, k as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let start = greedy_start(pool.len(), &mut rng, |x| objective(x).feasible()).ok_or_else(|| {
            PlannerError::Infeasible { phase: "topology", violations: objective(&vec![true; pool.len()]).violations }
        })?;
        let res = ils(pool.len(), &objective, penalty, &pp.ils, s, Some(&start), Exec::Sequential)?;
        if !res.best.evaluation.feasible() {
            return Err(PlannerError::Infeasible { phase: "topology", violations: res.best.evaluation.violations });
        }
        let trails: Vec<Measure> =
            pool.iter().zip(&res.best.active).filter(|(_, &a)| a).map(|(m, _)| m.clone()).collect();
        Ok(Topology {
            index: k,
            seed: s,
            cost: res.best.evaluation.cost,
            grid: build(dismantled, pool, &res.best.active, pr)?,
            trails,
        })
    };
    Ok(pp.exec.map_range(pp.n_topologies, run))
}
