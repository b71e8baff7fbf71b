//! Target-grid planning: topology search, reinforcement, automation and
//! meshing, each driven by an iterated local search over measure pools.

mod dismantle;
mod ils;
mod measure;
mod phase1;
mod phase2;
mod phase3;
mod phase4;
mod radialize;

use serde::{Deserialize, Serialize};

use crate::economics::EconomicsError;
use crate::exec::Exec;
use crate::fixtures::{standard_line_types, CABLE_150, CABLE_240, CABLE_300};
use crate::grid::{GridError, GridIndex, LineType, SwitchState};
use crate::power_flow::{check_contingency_operation_in, check_normal_operation_in, PfError, ViolationReport};
use crate::principles::Principles;
use crate::reliability::ReliabilityError;
use crate::topology::{check_contingency_supply_in, check_radiality_in, check_supply_in, RadialityMode, TopologyError};

pub use dismantle::{candidate_trails, delaunay_edges, dismantle};
pub use ils::{ils, CandidateSolution, Evaluation, IlsParams, IlsResult, Penalty};
pub use measure::{apply_measure, apply_measures, Measure};
pub use phase1::{search_topologies, Topology};
pub use phase2::{reinforce, reinforcement_pool, Reinforcement};
pub use phase3::{automate, AutomationPlan};
pub use phase4::{mesh, Meshing};
pub use radialize::radialize;

#[derive(Debug, thiserror::Error)]
pub enum PlannerError {
    #[error("unknown {kind} `{id}`")]
    Unknown { kind: &'static str, id: String },
    #[error("evaluation budget must be positive")]
    ZeroBudget,
    #[error("initial vector has {got} entries, pool has {expected}")]
    PoolMismatch { expected: usize, got: usize },
    #[error("grid has no switching station")]
    NoSwitchingStation,
    #[error("grid has {0} switching stations, expected one")]
    SeveralSwitchingStations(usize),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Pf(#[from] PfError),
    #[error(transparent)]
    Reliability(#[from] ReliabilityError),
    #[error(transparent)]
    Economics(#[from] EconomicsError),
    #[error("{phase}: no feasible solution, {violations} violation(s) remain")]
    Infeasible { phase: &'static str, violations: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerParams {
    /// Target-grid topologies generated per dismantling variant.
    pub n_topologies: usize,
    /// Lines longer than this (km) are dismantled.
    pub dismantle_threshold: f64,
    /// Trail length over air-line distance.
    pub trail_factor: f64,
    pub ils: IlsParams,
    pub seed: u64,
    /// Line types available to measures.
    pub line_catalog: Vec<LineType>,
    /// Replacement types in rising ampacity.
    pub ladder: Vec<String>,
    pub trail_line_type: String,
    /// Penalty per unit of violation magnitude.
    pub magnitude_weight: f64,
    pub exec: Exec,
    /// Worker threads, 0 for one per core.
    pub jobs: usize,
}

impl Default for PlannerParams {
    fn default() -> Self {
        PlannerParams {
            n_topologies: 50,
            dismantle_threshold: 2.0,
            trail_factor: 1.5,
            ils: IlsParams::default(),
            seed: 1,
            line_catalog: standard_line_types(),
            ladder: vec![CABLE_150.into(), CABLE_240.into(), CABLE_300.into()],
            trail_line_type: CABLE_300.into(),
            magnitude_weight: 100.0,
            exec: Exec::default(),
            jobs: 0,
        }
    }
}

impl PlannerParams {
    pub fn check(&self) -> Result<(), String> {
        if self.n_topologies == 0 {
            return Err("n_topologies must be positive".into());
        }
        if self.ils.max_evaluations == 0 {
            return Err("ils.max_evaluations must be positive".into());
        }
        if !(self.dismantle_threshold > 0.0) || !(self.trail_factor >= 1.0) {
            return Err("dismantle_threshold must be positive and trail_factor at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.ils.perturbation) {
            return Err("ils.perturbation must lie in [0, 1]".into());
        }
        for name in self.ladder.iter().chain([&self.trail_line_type]) {
            if !self.line_catalog.iter().any(|t| &t.name == name) {
                return Err(format!("line type `{name}` is not in the catalog"));
            }
        }
        Ok(())
    }
}

/// Seed for the `k`-th independent stream derived from `seed`.
pub fn derive_seed(seed: u64, k: u64) -> u64 {
    let mut z = seed ^ k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Which constraint groups an assessment covers.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Scope {
    pub radiality: RadialityMode,
    pub operation: bool,
}

/// All violated constraints of a switched grid.
#[derive(Debug, Clone, Default)]
pub struct Assessment {
    pub unsupplied: Vec<String>,
    pub no_backup: Vec<String>,
    pub radiality: usize,
    pub operation: ViolationReport,
}

impl Assessment {
    pub fn count(&self) -> usize {
        self.unsupplied.len() + self.no_backup.len() + self.radiality + self.operation.len()
    }

    pub fn evaluation(&self, cost: f64) -> Evaluation {
        Evaluation { cost, violations: self.count(), magnitude: self.operation.total_magnitude() }
    }
}

pub(crate) fn assess(
    idx: &GridIndex,
    state: &SwitchState,
    pr: &Principles,
    scope: Scope,
) -> Result<Assessment, PlannerError> {
    let mut a = Assessment {
        unsupplied: check_supply_in(idx, state).into_iter().map(|v| v.station).collect(),
        no_backup: check_contingency_supply_in(idx).into_iter().map(|v| v.station).collect(),
        radiality: check_radiality_in(idx, state, scope.radiality).len(),
        operation: ViolationReport::default(),
    };
    if scope.operation {
        let mut report = check_normal_operation_in(idx, state, &pr.worst_cases())?;
        report.extend(check_contingency_operation_in(idx, state, &pr.peak_load(), Exec::Sequential)?);
        a.operation = report;
    }
    Ok(a)
}

/// Objective value for an assessment that failed outright: a single step
/// penalty far above any real violation count.
pub(crate) fn failed_evaluation(cost: f64, err: &PlannerError) -> Evaluation {
    log::debug!("candidate evaluation failed: {err}");
    Evaluation { cost, violations: 1000, magnitude: 0.0 }
}
