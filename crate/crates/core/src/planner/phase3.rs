use serde::Serialize;

use super::{Measure, PlannerError};
use crate::grid::Grid;
use crate::principles::Principles;
use crate::reliability::{automate_for_reliability_in, FmeaResult};

#[derive(Debug, Clone, Serialize)]
pub struct AutomationPlan {
    pub measures: Vec<Measure>,
    pub fmea: FmeaResult,
    #[serde(skip)]
    pub grid: Grid,
}

/// Automates stations until ASIDI and per-station outage energy are within
/// the limits set by `baseline`.
pub fn automate(grid: &Grid, baseline: &FmeaResult, pr: &Principles) -> Result<AutomationPlan, PlannerError> {
    let a = automate_for_reliability_in(grid, &pr.reliability_params, baseline, pr.planner_params.exec)?;
    Ok(AutomationPlan {
        measures: a.stations.into_iter().map(|bus| Measure::AutomateStation { bus }).collect(),
        fmea: a.fmea,
        grid: a.grid,
    })
}
