use std::collections::{HashMap, HashSet};

use serde::Serialize;

use super::{BusKind, Grid, SwitchKind};

/// A referential-integrity or value fault in a grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Fault {
    pub element: String,
    pub rule: &'static str,
    pub detail: String,
}

impl Fault {
    fn new(element: &str, rule: &'static str, detail: impl Into<String>) -> Self {
        Fault { element: element.to_string(), rule, detail: detail.into() }
    }
}

impl std::fmt::Display for Fault {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} [{}]: {}", self.element, self.rule, self.detail)
    }
}

fn duplicates<'a>(ids: impl Iterator<Item = &'a str>, kind: &str, out: &mut Vec<Fault>) {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            out.push(Fault::new(id, "duplicate_id", format!("{kind} id appears more than once")));
        }
    }
}

/// Lists every violated data-model invariant. An empty list means the grid
/// is well formed.
pub fn validate_grid(grid: &Grid) -> Vec<Fault> {
    let mut faults = Vec::new();
    duplicates(grid.buses.iter().map(|b| b.id.as_str()), "bus", &mut faults);
    duplicates(grid.line_types.iter().map(|t| t.name.as_str()), "line type", &mut faults);
    duplicates(grid.lines.iter().map(|l| l.id.as_str()), "line", &mut faults);
    duplicates(grid.switches.iter().map(|s| s.id.as_str()), "switch", &mut faults);
    duplicates(grid.transformers.iter().map(|t| t.id.as_str()), "transformer", &mut faults);
    duplicates(grid.injections.iter().map(|i| i.id.as_str()), "injection", &mut faults);
    duplicates(grid.external_sources.iter().map(|s| s.id.as_str()), "external source", &mut faults);

    let bus_kind: HashMap<&str, BusKind> = grid.buses.iter().map(|b| (b.id.as_str(), b.kind)).collect();
    let types: HashSet<&str> = grid.line_types.iter().map(|t| t.name.as_str()).collect();

    for b in &grid.buses {
        if !(b.vn > 0.0) {
            faults.push(Fault::new(&b.id, "vn_positive", format!("vn = {}", b.vn)));
        }
    }
    for t in &grid.line_types {
        if !(t.r_per_km >= 0.0 && t.x_per_km >= 0.0) {
            faults.push(Fault::new(&t.name, "impedance_non_negative", "negative r or x"));
        }
        if !(t.i_max > 0.0) {
            faults.push(Fault::new(&t.name, "ampacity_positive", format!("i_max = {}", t.i_max)));
        }
    }

    let mut line_ends: HashMap<&str, (&str, &str)> = HashMap::new();
    for l in &grid.lines {
        line_ends.insert(l.id.as_str(), (l.from_bus.as_str(), l.to_bus.as_str()));
        if !(l.length > 0.0) {
            faults.push(Fault::new(&l.id, "length_positive", format!("length = {}", l.length)));
        }
        if l.from_bus == l.to_bus {
            faults.push(Fault::new(&l.id, "distinct_endpoints", "from_bus equals to_bus"));
        }
        for end in [&l.from_bus, &l.to_bus] {
            if !bus_kind.contains_key(end.as_str()) {
                faults.push(Fault::new(&l.id, "endpoint_exists", format!("unknown bus `{end}`")));
            }
        }
        if !types.contains(l.line_type.as_str()) {
            faults.push(Fault::new(&l.id, "line_type_exists", format!("unknown line type `{}`", l.line_type)));
        }
    }

    let mut terminals = HashSet::new();
    for s in &grid.switches {
        match line_ends.get(s.line.as_str()) {
            None => faults.push(Fault::new(&s.id, "switch_line_exists", format!("unknown line `{}`", s.line))),
            Some(&(a, b)) => {
                if s.bus != a && s.bus != b {
                    faults.push(Fault::new(
                        &s.id,
                        "switch_incident",
                        format!("bus `{}` is not an endpoint of line `{}`", s.bus, s.line),
                    ));
                } else if !terminals.insert((s.bus.as_str(), s.line.as_str())) {
                    faults.push(Fault::new(&s.id, "switch_terminal_unique", "two switches on one terminal"));
                }
            }
        }
        match bus_kind.get(s.bus.as_str()) {
            None => faults.push(Fault::new(&s.id, "switch_bus_exists", format!("unknown bus `{}`", s.bus))),
            Some(kind) => {
                if s.kind == SwitchKind::CircuitBreaker && !kind.is_busbar() {
                    faults.push(Fault::new(
                        &s.id,
                        "breaker_location",
                        "circuit breakers only at primary substations or switching stations",
                    ));
                }
            }
        }
    }

    for t in &grid.transformers {
        for b in [&t.hv_bus, &t.lv_bus] {
            if !bus_kind.contains_key(b.as_str()) {
                faults.push(Fault::new(&t.id, "transformer_bus_exists", format!("unknown bus `{b}`")));
            }
        }
        if !(t.sn > 0.0) {
            faults.push(Fault::new(&t.id, "rating_positive", format!("sn = {}", t.sn)));
        }
        for (name, v) in &t.setpoint_by_scenario {
            if !(0.9..=1.1).contains(v) {
                faults.push(Fault::new(&t.id, "setpoint_range", format!("{name}: {v} pu")));
            }
        }
    }

    for inj in &grid.injections {
        if !bus_kind.contains_key(inj.bus.as_str()) {
            faults.push(Fault::new(&inj.id, "injection_bus_exists", format!("unknown bus `{}`", inj.bus)));
        }
        if !(inj.sn >= 0.0) {
            faults.push(Fault::new(&inj.id, "power_non_negative", format!("sn = {}", inj.sn)));
        }
        let pf = inj.power_factor();
        if !(pf > 0.0 && pf <= 1.0) {
            faults.push(Fault::new(&inj.id, "power_factor_range", format!("p_factor = {pf}")));
        }
    }

    if grid.external_sources.is_empty() {
        faults.push(Fault::new("grid", "external_source_present", "no external source"));
    }
    for s in &grid.external_sources {
        match bus_kind.get(s.bus.as_str()) {
            None => faults.push(Fault::new(&s.id, "source_bus_exists", format!("unknown bus `{}`", s.bus))),
            Some(BusKind::PrimarySubstation) => {}
            Some(_) => {
                faults.push(Fault::new(&s.id, "source_at_primary", "external source must sit at a primary substation"))
            }
        }
    }
    faults
}
