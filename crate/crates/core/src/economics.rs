//! Annual cost model.

use serde::{Deserialize, Serialize};

use crate::grid::{BusKind, Grid};
use crate::planner::Measure;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EconomicsError {
    #[error("lifetime must be at least one year, got {0}")]
    Lifetime(f64),
    #[error("invalid amount {0}")]
    Amount(f64),
    #[error("measure references unknown {kind} `{id}`")]
    Unknown { kind: &'static str, id: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Concept {
    Radial,
    SwitchingStation,
    ClosedRing,
}

impl Concept {
    pub const ALL: [Concept; 3] = [Concept::Radial, Concept::SwitchingStation, Concept::ClosedRing];

    pub fn as_str(self) -> &'static str {
        match self {
            Concept::Radial => "radial",
            Concept::SwitchingStation => "switching_station",
            Concept::ClosedRing => "closed_ring",
        }
    }
}

impl std::fmt::Display for Concept {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Concept {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Concept::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown concept `{s}` (radial, switching_station, closed_ring)"))
    }
}

/// A one-off investment that is turned into an annuity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Investment {
    pub name: String,
    /// €
    pub c_total: f64,
    /// Years.
    pub lifetime: f64,
}

/// Annual cost rates in €/a.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostModel {
    /// %/a
    pub interest_rate: f64,
    /// €/(km·a)
    pub cable: f64,
    pub switching_station: f64,
    /// Per automated station.
    pub communication_link: f64,
    /// Per secondary substation in a closed-ring area.
    pub directional_indicator: f64,
    /// Per feeder in a closed-ring area.
    pub impedance_protection: f64,
    pub investments: Vec<Investment>,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            interest_rate: 5.0,
            cable: 7000.0,
            switching_station: 35_900.0,
            communication_link: 1200.0,
            directional_indicator: 30.0,
            impedance_protection: 400.0,
            investments: Vec::new(),
        }
    }
}

impl CostModel {
    /// Every rate multiplied by `k`.
    pub fn scaled(&self, k: f64) -> CostModel {
        CostModel {
            interest_rate: self.interest_rate,
            cable: self.cable * k,
            switching_station: self.switching_station * k,
            communication_link: self.communication_link * k,
            directional_indicator: self.directional_indicator * k,
            impedance_protection: self.impedance_protection * k,
            investments: self.investments.iter().map(|i| Investment { c_total: i.c_total * k, ..i.clone() }).collect(),
        }
    }
}

/// Uniform annual cost of `c_total` over `m` years at `i` percent.
pub fn annualize(c_total: f64, i: f64, m: f64) -> Result<f64, EconomicsError> {
    if !(m >= 1.0) {
        return Err(EconomicsError::Lifetime(m));
    }
    if !(c_total >= 0.0) || !c_total.is_finite() {
        return Err(EconomicsError::Amount(c_total));
    }
    if !(i >= 0.0) {
        return Err(EconomicsError::Amount(i));
    }
    if i == 0.0 {
        return Ok(c_total / m);
    }
    let q = 1.0 + i / 100.0;
    let d = q - 1.0;
    let qm = q.powf(m);
    Ok(c_total * qm * (d / (qm - 1.0)))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub cable: f64,
    pub switching_station: f64,
    pub communication: f64,
    pub impedance_protection: f64,
    pub directional_indicators: f64,
    pub investments: f64,
    pub total: f64,
}

impl CostBreakdown {
    fn finish(mut self) -> Self {
        self.total = self.cable
            + self.switching_station
            + self.communication
            + self.impedance_protection
            + self.directional_indicators
            + self.investments;
        self
    }

    pub fn add(&self, other: &CostBreakdown) -> CostBreakdown {
        CostBreakdown {
            cable: self.cable + other.cable,
            switching_station: self.switching_station + other.switching_station,
            communication: self.communication + other.communication,
            impedance_protection: self.impedance_protection + other.impedance_protection,
            directional_indicators: self.directional_indicators + other.directional_indicators,
            investments: self.investments + other.investments,
            total: 0.0,
        }
        .finish()
    }
}

/// Annual cost of one measure in €/a, checked against `grid`.
pub fn measure_cost(grid: &Grid, m: &Measure, cm: &CostModel) -> Result<CostBreakdown, EconomicsError> {
    let line_len = |id: &str| {
        grid.line(id).map(|l| l.length).ok_or_else(|| EconomicsError::Unknown { kind: "line", id: id.into() })
    };
    let bus = |id: &str| grid.bus(id).ok_or_else(|| EconomicsError::Unknown { kind: "bus", id: id.into() });
    let switch = |id: &str| grid.switch(id).ok_or_else(|| EconomicsError::Unknown { kind: "switch", id: id.into() });
    let mut c = CostBreakdown::default();
    match m {
        Measure::ReplaceLine { line, .. } | Measure::AddParallel { line, .. } => c.cable = cm.cable * line_len(line)?,
        Measure::AddTrail { from_station, to_station, length, .. } => {
            bus(from_station)?;
            bus(to_station)?;
            c.cable = cm.cable * length;
        }
        Measure::SetSectioningPoint { switch: s, .. } | Measure::CloseRing { switch: s } => {
            switch(s)?;
        }
        Measure::AutomateStation { bus: b } => {
            bus(b)?;
            c.communication = cm.communication_link;
        }
        Measure::RenewSwitchingStation { .. } => c.switching_station = cm.switching_station,
        Measure::RemoveSwitchingStation { .. } => {}
    }
    Ok(c.finish())
}

/// Protection overhead of a grid concept: impedance protection per feeder
/// and directional indicators per secondary substation for closed rings.
pub fn concept_overhead(grid: &Grid, concept: Concept, cm: &CostModel) -> CostBreakdown {
    if concept != Concept::ClosedRing {
        return CostBreakdown::default();
    }
    let feeders = feeder_count(grid);
    let stations = grid.buses_of_kind(BusKind::SecondarySubstation).count();
    CostBreakdown {
        impedance_protection: cm.impedance_protection * feeders as f64,
        directional_indicators: cm.directional_indicator * stations as f64,
        ..Default::default()
    }
    .finish()
}

/// Outgoing in-service lines at primary-substation busbars.
pub fn feeder_count(grid: &Grid) -> usize {
    grid.lines
        .iter()
        .filter(|l| l.in_service)
        .filter(|l| {
            [&l.from_bus, &l.to_bus]
                .into_iter()
                .any(|b| grid.bus(b).is_some_and(|b| b.kind == BusKind::PrimarySubstation))
        })
        .count()
}

/// Annual cost of a plan: its measures, the concept overhead and any
/// annualized investments of the cost model.
pub fn plan_cost(
    grid: &Grid,
    measures: &[Measure],
    cm: &CostModel,
    concept: Concept,
) -> Result<CostBreakdown, EconomicsError> {
    let mut total = concept_overhead(grid, concept, cm);
    for m in measures {
        total = total.add(&measure_cost(grid, m, cm)?);
    }
    for inv in &cm.investments {
        let a = annualize(inv.c_total, cm.interest_rate, inv.lifetime)?;
        total = total.add(&CostBreakdown { investments: a, ..Default::default() });
    }
    Ok(total)
}

/// Sum of measure costs alone.
pub fn measures_cost(grid: &Grid, measures: &[Measure], cm: &CostModel) -> Result<f64, EconomicsError> {
    measures.iter().map(|m| measure_cost(grid, m, cm).map(|c| c.total)).sum()
}
