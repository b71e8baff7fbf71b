use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{AreaResult, TopologyOutcome};
use crate::economics::{Concept, CostBreakdown};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConceptSummary {
    /// Annual cost per topology, `None` where no valid plan exists.
    pub costs: Vec<Option<f64>>,
    pub reference_topology: Option<usize>,
    pub reference_cost: Option<CostBreakdown>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub area: String,
    pub seed: u64,
    pub concepts: BTreeMap<Concept, ConceptSummary>,
    /// Concept with the cheapest reference plan.
    pub winner: Option<Concept>,
    /// `deltas[a][b]` = reference cost of `a` minus that of `b`, €/a.
    pub deltas: BTreeMap<Concept, BTreeMap<Concept, f64>>,
    pub infeasible: Vec<Concept>,
}

impl ComparisonReport {
    pub fn reference_cost(&self, c: Concept) -> Option<f64> {
        self.concepts.get(&c)?.reference_cost.map(|b| b.total)
    }
}

/// Reference plan per concept (cheapest valid one, lowest topology index on
/// ties), the winning concept and pairwise cost differences.
pub fn compare(area: &str, seed: u64, plans: &BTreeMap<Concept, Vec<TopologyOutcome>>) -> ComparisonReport {
    let mut concepts = BTreeMap::new();
    let mut infeasible = Vec::new();
    for (&c, outcomes) in plans {
        let costs: Vec<Option<f64>> = outcomes.iter().map(TopologyOutcome::feasible_cost).collect();
        let best = outcomes
            .iter()
            .filter_map(|o| o.feasible_cost().map(|c| (c, o)))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.topology.cmp(&b.1.topology)))
            .map(|(_, o)| o);
        if best.is_none() {
            infeasible.push(c);
        }
        concepts.insert(
            c,
            ConceptSummary {
                costs,
                reference_topology: best.map(|o| o.topology),
                reference_cost: best.and_then(|o| o.plan.as_ref()).map(|p| p.cost),
            },
        );
    }
    let refs: Vec<(Concept, f64)> =
        concepts.iter().filter_map(|(&c, s)| s.reference_cost.map(|b| (c, b.total))).collect();
    let winner = refs.iter().min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0))).map(|(c, _)| *c);
    let mut deltas: BTreeMap<Concept, BTreeMap<Concept, f64>> = BTreeMap::new();
    for &(a, ca) in &refs {
        for &(b, cb) in &refs {
            if a != b {
                deltas.entry(a).or_default().insert(b, ca - cb);
            }
        }
    }
    ComparisonReport { area: area.to_string(), seed, concepts, winner, deltas, infeasible }
}

fn dir_name(s: &str) -> String {
    let clean: String =
        s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect();
    if clean.is_empty() {
        "area".into()
    } else {
        clean
    }
}

fn to_json<T: Serialize>(v: &T) -> std::io::Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(std::io::Error::other)?;
    s.push('\n');
    Ok(s)
}

/// Cost table, one row per concept and topology.
pub fn comparison_csv(result: &AreaResult) -> String {
    let mut out = String::from(
        "concept,topology,feasible,cable,switching_station,communication,impedance_protection,directional_indicators,investments,total,reference\n",
    );
    for (c, outcomes) in &result.plans {
        let reference = result.report.concepts.get(c).and_then(|s| s.reference_topology);
        for o in outcomes {
            let feasible = o.feasible_cost().is_some();
            match &o.plan {
                Some(p) => {
                    let b = &p.cost;
                    let _ = writeln!(
                        out,
                        "{c},{},{feasible},{:.2},{:.2},{:.2},{:.2},{:.2},{:.2},{:.2},{}",
                        o.topology,
                        b.cable,
                        b.switching_station,
                        b.communication,
                        b.impedance_protection,
                        b.directional_indicators,
                        b.investments,
                        b.total,
                        reference == Some(o.topology)
                    );
                }
                None => {
                    let _ = writeln!(out, "{c},{},false,,,,,,,,false", o.topology);
                }
            }
        }
    }
    out
}

/// Writes `<out>/<area>/<concept>/topology_<k>.json`, `comparison.json` and
/// `comparison.csv`. Returns the area directory.
pub fn write_outputs(result: &AreaResult, out: &Path) -> std::io::Result<PathBuf> {
    let area_dir = out.join(dir_name(&result.area));
    for (c, outcomes) in &result.plans {
        let dir = area_dir.join(c.as_str());
        std::fs::create_dir_all(&dir)?;
        for o in outcomes {
            std::fs::write(dir.join(format!("topology_{}.json", o.topology)), to_json(o)?)?;
        }
    }
    std::fs::create_dir_all(&area_dir)?;
    std::fs::write(area_dir.join("comparison.json"), to_json(&result.report)?)?;
    std::fs::write(area_dir.join("comparison.csv"), comparison_csv(result))?;
    Ok(area_dir)
}
