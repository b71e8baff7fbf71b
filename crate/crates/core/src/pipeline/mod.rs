//! Runs every planning phase for all three grid concepts of an area, picks
//! the cheapest valid plan per concept and compares them.

mod report;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::economics::{plan_cost, Concept, CostBreakdown};
use crate::grid::{validate_grid, BusKind, Grid};
use crate::planner::{
    apply_measures, automate, candidate_trails, derive_seed, dismantle, mesh, reinforce, search_topologies, Measure,
    PlannerError, Topology,
};
use crate::power_flow::{check_contingency_operation, check_normal_operation, Violation};
use crate::principles::Principles;
use crate::reliability::{check_reliability, fmea, FmeaResult, ReliabilityViolation};
use crate::topology::{
    check_contingency_supply, check_radiality, check_supply, mark_stubs, RadialityMode, RadialityViolation,
};

pub use report::{compare, comparison_csv, write_outputs, ComparisonReport, ConceptSummary};

/// Every constraint a finished plan violates, found by fresh validator calls.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub integrity: Vec<String>,
    pub unsupplied: Vec<String>,
    pub no_backup: Vec<String>,
    pub radiality: Vec<RadialityViolation>,
    pub operation: Vec<Violation>,
    pub reliability: Vec<ReliabilityViolation>,
    /// Reliability limits are binding for this concept.
    pub reliability_enforced: bool,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.integrity.is_empty()
            && self.unsupplied.is_empty()
            && self.no_backup.is_empty()
            && self.radiality.is_empty()
            && self.operation.is_empty()
            && (!self.reliability_enforced || self.reliability.is_empty())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConceptPlan {
    pub concept: Concept,
    pub topology: usize,
    pub measures: Vec<Measure>,
    pub cost: CostBreakdown,
    pub fmea: FmeaResult,
    pub validation: ValidationReport,
    pub grid: Grid,
}

impl ConceptPlan {
    pub fn feasible(&self) -> bool {
        self.validation.is_empty()
    }
}

/// Plan of one topology, or why there is none.
#[derive(Debug, Clone, Serialize)]
pub struct TopologyOutcome {
    pub topology: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<ConceptPlan>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TopologyOutcome {
    pub fn feasible_cost(&self) -> Option<f64> {
        self.plan.as_ref().filter(|p| p.feasible()).map(|p| p.cost.total)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("baseline grid is invalid: {0}")]
    Baseline(String),
    #[error(transparent)]
    Planner(#[from] PlannerError),
}

/// Plans of every concept for one area, plus the comparison.
#[derive(Debug, Clone, Serialize)]
pub struct AreaResult {
    pub area: String,
    pub plans: BTreeMap<Concept, Vec<TopologyOutcome>>,
    pub report: ComparisonReport,
}

fn radiality_mode(concept: Concept) -> RadialityMode {
    match concept {
        Concept::ClosedRing => RadialityMode::MeshedFeeders,
        _ => RadialityMode::Strict,
    }
}

/// Re-checks a finished grid with the public validators.
pub fn validate_plan(
    grid: &Grid,
    concept: Concept,
    pr: &Principles,
    baseline: &FmeaResult,
) -> Result<(ValidationReport, FmeaResult), PlannerError> {
    let mut v = ValidationReport {
        integrity: validate_grid(grid).into_iter().map(|f| format!("{}: {}", f.element, f.detail)).collect(),
        reliability_enforced: concept != Concept::ClosedRing,
        ..Default::default()
    };
    if !v.integrity.is_empty() {
        return Err(PlannerError::Grid(crate::grid::GridError::Invalid(v.integrity.len(), v.integrity[0].clone())));
    }
    v.unsupplied = check_supply(grid)?.into_iter().map(|s| s.station).collect();
    v.no_backup = check_contingency_supply(grid)?.into_iter().map(|s| s.station).collect();
    v.radiality = check_radiality(grid, radiality_mode(concept))?;
    v.operation = check_normal_operation(grid, &pr.worst_cases())?.entries;
    v.operation.extend(check_contingency_operation(grid, &pr.peak_load())?.entries);
    let f = fmea(grid, &pr.reliability_params)?;
    v.reliability = check_reliability(&grid.meta.name, &f, &pr.reliability_params, baseline);
    Ok((v, f))
}

fn the_switching_station(grid: &Grid) -> Result<String, PlannerError> {
    let ids: Vec<&str> = grid.buses_of_kind(BusKind::SwitchingStation).map(|b| b.id.as_str()).collect();
    match ids.as_slice() {
        [one] => Ok(one.to_string()),
        [] => Err(PlannerError::NoSwitchingStation),
        _ => Err(PlannerError::SeveralSwitchingStations(ids.len())),
    }
}

fn finish(
    concept: Concept,
    topology: usize,
    grid: Grid,
    measures: Vec<Measure>,
    pr: &Principles,
    baseline: &FmeaResult,
) -> Result<ConceptPlan, PlannerError> {
    let cost = plan_cost(&grid, &measures, &pr.cost_model, concept)?;
    let (validation, fmea) = validate_plan(&grid, concept, pr, baseline)?;
    Ok(ConceptPlan { concept, topology, measures, cost, fmea, validation, grid })
}

/// Reinforcement and automation of one topology, and for the radial variant
/// the meshed closed-ring counterpart.
fn plan_topology(
    topo: &Topology,
    concept: Concept,
    station: &str,
    pr: &Principles,
    baseline: &FmeaResult,
    with_rings: bool,
) -> Result<(ConceptPlan, Option<Result<ConceptPlan, PlannerError>>), PlannerError> {
    let r = reinforce(&topo.grid, pr, derive_seed(topo.seed, 2))?;
    let a = automate(&r.grid, baseline, pr)?;
    let station_measure = match concept {
        Concept::SwitchingStation => Measure::RenewSwitchingStation { bus: station.to_string() },
        _ => Measure::RemoveSwitchingStation { bus: station.to_string() },
    };
    let mut measures: Vec<Measure> = topo.trails.clone();
    measures.extend(r.sectioning.iter().cloned());
    measures.extend(r.measures.iter().cloned());
    measures.extend(a.measures.iter().cloned());
    measures.push(station_measure.clone());
    let plan = finish(concept, topo.index, a.grid, measures, pr, baseline)?;
    let ring = with_rings.then(|| {
        let base = apply_measures(&r.sectioned, &a.measures, &pr.planner_params.line_catalog)?;
        let m = mesh(&base, &r.pool, &r.chosen, pr, derive_seed(topo.seed, 4))?;
        let mut measures: Vec<Measure> = topo.trails.clone();
        measures.extend(r.sectioning.iter().cloned());
        measures.extend(a.measures.iter().cloned());
        measures.extend(m.closures);
        measures.extend(m.reinforcements);
        measures.push(station_measure);
        finish(Concept::ClosedRing, topo.index, m.grid, measures, pr, baseline)
    });
    Ok((plan, ring))
}

fn outcome(topology: usize, r: Result<ConceptPlan, PlannerError>) -> TopologyOutcome {
    match r {
        Ok(plan) => TopologyOutcome { topology, plan: Some(plan), error: None },
        Err(e) => TopologyOutcome { topology, plan: None, error: Some(e.to_string()) },
    }
}

/// Plans for the requested concepts. The closed-ring concept is derived from
/// the radial topologies, so asking for it also plans the radial ones.
pub fn plan_concepts(
    baseline: &Grid,
    pr: &Principles,
    concepts: &[Concept],
) -> Result<BTreeMap<Concept, Vec<TopologyOutcome>>, PipelineError> {
    let faults = validate_grid(baseline);
    if let Some(f) = faults.first() {
        return Err(PipelineError::Baseline(format!("{} fault(s), first: {}: {}", faults.len(), f.element, f.detail)));
    }
    let pp = &pr.planner_params;
    pp.exec.install(pp.jobs, || {
        let mut marked = baseline.clone();
        mark_stubs(&mut marked).map_err(PlannerError::from)?;
        let station = the_switching_station(&marked)?;
        let base_fmea = fmea(&marked, &pr.reliability_params).map_err(PlannerError::from)?;
        let mut out: BTreeMap<Concept, Vec<TopologyOutcome>> = BTreeMap::new();
        let variants = [(Concept::SwitchingStation, false), (Concept::Radial, true)];
        for (vi, (concept, remove)) in variants.into_iter().enumerate() {
            let rings = concept == Concept::Radial && concepts.contains(&Concept::ClosedRing);
            if !concepts.contains(&concept) && !rings {
                continue;
            }
            let d = dismantle(&marked, pp.dismantle_threshold, remove)?;
            let pool = candidate_trails(&d, pp.trail_factor, &pp.trail_line_type);
            log::info!(
                "{concept}: {} candidate trails over {} affected buses",
                pool.len(),
                d.meta.affected_buses.len()
            );
            let topologies = search_topologies(&d, &pool, pr, derive_seed(pp.seed, vi as u64))?;
            let planned = pp.exec.map(&topologies, |t| match t {
                Ok(t) => plan_topology(t, concept, &station, pr, &base_fmea, rings).map_err(|e| e.to_string()),
                Err(e) => Err(e.to_string()),
            });
            let mut main = Vec::new();
            let mut closed = Vec::new();
            for (k, p) in planned.into_iter().enumerate() {
                match p {
                    Ok((plan, ring)) => {
                        main.push(outcome(k, Ok(plan)));
                        if let Some(r) = ring {
                            closed.push(outcome(k, r));
                        }
                    }
                    Err(e) => {
                        main.push(TopologyOutcome { topology: k, plan: None, error: Some(e.clone()) });
                        if rings {
                            closed.push(TopologyOutcome { topology: k, plan: None, error: Some(e) });
                        }
                    }
                }
            }
            if concepts.contains(&concept) {
                out.insert(concept, main);
            }
            if rings {
                out.insert(Concept::ClosedRing, closed);
            }
        }
        Ok(out)
    })
}

/// All three concepts for one area and their comparison.
pub fn run_area(baseline: &Grid, pr: &Principles) -> Result<AreaResult, PipelineError> {
    let plans = plan_concepts(baseline, pr, &Concept::ALL)?;
    let report = compare(&baseline.meta.name, pr.planner_params.seed, &plans);
    Ok(AreaResult { area: baseline.meta.name.clone(), plans, report })
}
