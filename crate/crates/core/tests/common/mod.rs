//! Reference implementations the engine is checked against. They work from
//! the raw grid data and share no code with the solvers under test.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use gridforge::grid::{BusKind, Grid, InjectionCategory, Scenario};
use gridforge::planner::{Evaluation, Penalty};
use gridforge::reliability::ReliabilityParams;
use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

type C = Complex<f64>;

fn bus_pos(grid: &Grid) -> BTreeMap<&str, usize> {
    grid.buses.iter().enumerate().map(|(i, b)| (b.id.as_str(), i)).collect()
}

/// A line conducts when it is in service and every switch on it is closed.
pub fn line_closed(grid: &Grid, line: &str) -> bool {
    grid.line(line).is_some_and(|l| l.in_service) && grid.switches.iter().filter(|s| s.line == line).all(|s| s.closed)
}

/// The switch of `line` at `bus` is closed, or there is none.
pub fn terminal_closed(grid: &Grid, line: &str, bus: &str) -> bool {
    grid.switches.iter().filter(|s| s.line == line && s.bus == bus).all(|s| s.closed)
}

/// Buses held at a fixed voltage: transformer low-voltage sides at the
/// scenario setpoint, other external-source buses at their own magnitude.
pub fn slack_buses(grid: &Grid, scenario: &Scenario) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    let hv: BTreeSet<&str> = grid.transformers.iter().map(|t| t.hv_bus.as_str()).collect();
    for t in &grid.transformers {
        out.insert(t.lv_bus.clone(), t.setpoint_by_scenario[scenario.name.as_str()]);
    }
    for s in &grid.external_sources {
        if !hv.contains(s.bus.as_str()) {
            out.entry(s.bus.clone()).or_insert(s.vm_pu);
        }
    }
    out
}

/// Buses reachable from a slack bus over conducting lines.
pub fn energized(grid: &Grid, slack: &BTreeMap<String, f64>) -> BTreeSet<String> {
    let mut seen: BTreeSet<String> = slack.keys().cloned().collect();
    let mut q: VecDeque<String> = seen.iter().cloned().collect();
    while let Some(b) = q.pop_front() {
        for l in grid.lines.iter().filter(|l| line_closed(grid, &l.id)) {
            let o = if l.from_bus == b {
                &l.to_bus
            } else if l.to_bus == b {
                &l.from_bus
            } else {
                continue;
            };
            if seen.insert(o.clone()) {
                q.push_back(o.clone());
            }
        }
    }
    seen
}

/// Demand per bus in MW / Mvar, generation negative.
pub fn demand(grid: &Grid, scenario: &Scenario) -> BTreeMap<String, (f64, f64)> {
    let mut out: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    for inj in &grid.injections {
        let pf = inj.power_factor();
        let (s, sign) = match inj.category {
            InjectionCategory::Load => (inj.sn * scenario.scale_load, 1.0),
            InjectionCategory::Pv => (inj.sn * scenario.scale_pv, -1.0),
            InjectionCategory::Wind => (inj.sn * scenario.scale_wind, -1.0),
        };
        let e = out.entry(inj.bus.clone()).or_default();
        e.0 += sign * s * pf;
        e.1 += s * (1.0 - pf * pf).max(0.0).sqrt();
    }
    out
}

/// Current-injection fixed-point iteration on the bus admittance matrix:
/// V = Y_nn⁻¹ (conj(S / V) − Y_ns V_s). Returns (|V|, angle) per energized bus.
pub fn fixed_point_pf(grid: &Grid, scenario: &Scenario) -> BTreeMap<String, (f64, f64)> {
    let slack = slack_buses(grid, scenario);
    let on = energized(grid, &slack);
    let pos = bus_pos(grid);
    let free: Vec<&str> = on.iter().map(String::as_str).filter(|b| !slack.contains_key(*b)).collect();
    let fixed: Vec<&str> = on.iter().map(String::as_str).filter(|b| slack.contains_key(*b)).collect();
    let fi: BTreeMap<&str, usize> = free.iter().enumerate().map(|(i, b)| (*b, i)).collect();
    let si: BTreeMap<&str, usize> = fixed.iter().enumerate().map(|(i, b)| (*b, i)).collect();
    let (n, m) = (free.len(), fixed.len());
    let mut ynn = DMatrix::<C>::zeros(n, n);
    let mut yns = DMatrix::<C>::zeros(n, m);
    for l in grid.lines.iter().filter(|l| line_closed(grid, &l.id) && on.contains(&l.from_bus)) {
        let lt = grid.line_type(&l.line_type).unwrap();
        let vn = grid.buses[pos[l.from_bus.as_str()]].vn;
        let z = C::new(lt.r_per_km, lt.x_per_km) * l.length / (vn * vn);
        let y = C::new(1.0, 0.0) / z;
        for (a, b) in [(l.from_bus.as_str(), l.to_bus.as_str()), (l.to_bus.as_str(), l.from_bus.as_str())] {
            if let Some(&i) = fi.get(a) {
                ynn[(i, i)] += y;
                if let Some(&j) = fi.get(b) {
                    ynn[(i, j)] -= y;
                } else {
                    yns[(i, si[b])] -= y;
                }
            }
        }
    }
    let d = demand(grid, scenario);
    let s: Vec<C> = free.iter().map(|b| d.get(*b).map_or(C::new(0.0, 0.0), |&(p, q)| C::new(-p, -q))).collect();
    let vs = DVector::from_iterator(m, fixed.iter().map(|b| C::new(slack[*b], 0.0)));
    let lu = ynn.clone().lu();
    let base = -(&yns * &vs);
    let mut v = DVector::from_element(n, C::new(1.0, 0.0));
    for _ in 0..2000 {
        let i_inj = DVector::from_iterator(n, (0..n).map(|k| (s[k] / v[k]).conj()));
        let next = lu.solve(&(i_inj + &base)).expect("singular admittance matrix");
        let delta = (&next - &v).iter().map(|c| c.norm()).fold(0.0, f64::max);
        v = next;
        if delta < 1e-13 {
            break;
        }
    }
    let mut out = BTreeMap::new();
    for (b, vm) in &slack {
        if on.contains(b) {
            out.insert(b.clone(), (*vm, 0.0));
        }
    }
    for (k, b) in free.iter().enumerate() {
        out.insert(b.to_string(), (v[k].norm(), v[k].arg()));
    }
    out
}

/// Receiving-end voltage of a single impedance from a fixed source, from the
/// quadratic in |V|².
pub fn two_bus_closed_form(v0: f64, r: f64, x: f64, p: f64, q: f64) -> (f64, f64) {
    let a = v0 * v0 - 2.0 * (p * r + q * x);
    let v2 = (a + (a * a - 4.0 * (p * p + q * q) * (r * r + x * x)).sqrt()) / 2.0;
    let delta = -(x * p - r * q).atan2(v2 + p * r + q * x);
    (v2.sqrt(), delta)
}

/// Outage hours per station for one fault on every line, enumerated fault
/// by fault. Valid for grids where either every station is remote
/// controlled or none is.
pub fn brute_outages(grid: &Grid, params: &ReliabilityParams) -> BTreeMap<String, BTreeMap<String, f64>> {
    let automated = grid.switches.iter().filter(|s| !is_busbar_kind(grid, &s.bus)).all(|s| s.remote_controlled);
    let slack: BTreeSet<String> = grid
        .transformers
        .iter()
        .map(|t| t.lv_bus.clone())
        .chain(grid.external_sources.iter().map(|s| s.bus.clone()))
        .collect();
    let stations: Vec<&str> = grid.buses.iter().filter(|b| b.kind.is_station()).map(|b| b.id.as_str()).collect();
    let pre = reach(grid, &slack, |l| line_closed(grid, l), |_| true);
    let mut out = BTreeMap::new();
    for line in &grid.lines {
        let mut row: BTreeMap<String, f64> = stations.iter().map(|s| (s.to_string(), 0.0)).collect();
        let fed: Vec<&String> =
            [&line.from_bus, &line.to_bus].into_iter().filter(|b| terminal_closed(grid, &line.id, b)).collect();
        let live = line.in_service && fed.iter().any(|b| pre.contains(*b));
        if live {
            // Everything behind the nearest breakers on either side trips.
            let start: BTreeSet<String> = fed.into_iter().filter(|b| !is_busbar_kind(grid, b)).cloned().collect();
            let tripped = reach(grid, &start, |l| l != line.id && line_closed(grid, l), |b| !is_busbar_kind(grid, b));
            let backup = reach(grid, &slack, |l| l != line.id && grid.line(l).unwrap().in_service, |_| true);
            for s in &stations {
                if tripped.contains(*s) && pre.contains(*s) {
                    let t = if automated && backup.contains(*s) {
                        params.t_locate + params.t_remote
                    } else {
                        params.t_locate + params.t_onsite
                    };
                    row.insert(s.to_string(), t);
                }
            }
        }
        out.insert(line.id.clone(), row);
    }
    out
}

fn is_busbar_kind(grid: &Grid, bus: &str) -> bool {
    grid.bus(bus).is_some_and(|b| matches!(b.kind, BusKind::PrimarySubstation | BusKind::SwitchingStation))
}

/// Breadth-first reach over lines passing `line_ok`, entering only buses
/// passing `enter` (start buses are always kept).
fn reach(
    grid: &Grid,
    start: &BTreeSet<String>,
    line_ok: impl Fn(&str) -> bool,
    enter: impl Fn(&str) -> bool,
) -> BTreeSet<String> {
    let mut seen = start.clone();
    let mut q: VecDeque<String> = start.iter().cloned().collect();
    while let Some(b) = q.pop_front() {
        for l in &grid.lines {
            let o = if l.from_bus == b {
                &l.to_bus
            } else if l.to_bus == b {
                &l.from_bus
            } else {
                continue;
            };
            if line_ok(&l.id) && enter(o) && seen.insert(o.clone()) {
                q.push_back(o.clone());
            }
        }
    }
    seen
}

/// Failures per year of every line.
pub fn failure_rates(grid: &Grid, params: &ReliabilityParams) -> BTreeMap<String, f64> {
    grid.lines
        .iter()
        .map(|l| {
            let lt = grid.line_type(&l.line_type).unwrap();
            let rate = lt
                .insulation
                .as_ref()
                .and_then(|i| params.failure_rate.get(i))
                .or_else(|| {
                    params.failure_rate.get(if lt.construction == gridforge::grid::Construction::Cable {
                        "cable"
                    } else {
                        "overhead"
                    })
                })
                .copied()
                .unwrap_or(0.0);
            (l.id.clone(), if l.in_service { rate * l.length } else { 0.0 })
        })
        .collect()
}

/// Expected outage hours per station and ASIDI from [`brute_outages`].
pub fn brute_fmea(grid: &Grid, params: &ReliabilityParams) -> (BTreeMap<String, f64>, f64) {
    let outages = brute_outages(grid, params);
    let h = failure_rates(grid, params);
    let mut t: BTreeMap<String, f64> = BTreeMap::new();
    for (line, row) in &outages {
        for (s, hours) in row {
            *t.entry(s.clone()).or_default() += h[line] * hours;
        }
    }
    let mut p: BTreeMap<String, f64> = BTreeMap::new();
    for inj in grid.injections.iter().filter(|i| i.category == InjectionCategory::Load) {
        *p.entry(inj.bus.clone()).or_default() += inj.sn * inj.power_factor() * 1000.0;
    }
    let e: f64 = t.iter().map(|(s, v)| v * p.get(s).copied().unwrap_or(0.0)).sum();
    let asidi = e / p.values().sum::<f64>();
    (t, asidi)
}

/// Level payment that repays `c` over `m` whole years at `i` percent,
/// discounting each year's payment separately.
pub fn iterative_annuity(c: f64, i: f64, m: u32) -> f64 {
    let q = 1.0 + i / 100.0;
    let mut pv = 0.0;
    let mut f = 1.0;
    for _ in 0..m {
        f /= q;
        pv += f;
    }
    c / pv
}

/// Edges of every triangle whose circumcircle holds no other point.
pub fn empty_circle_edges(pts: &[(f64, f64)]) -> BTreeSet<(usize, usize)> {
    let n = pts.len();
    let mut edges = BTreeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (a, b, c) = (pts[i], pts[j], pts[k]);
                let d = 2.0 * (a.0 * (b.1 - c.1) + b.0 * (c.1 - a.1) + c.0 * (a.1 - b.1));
                if d.abs() < 1e-12 {
                    continue;
                }
                let sq = |p: (f64, f64)| p.0 * p.0 + p.1 * p.1;
                let ux = (sq(a) * (b.1 - c.1) + sq(b) * (c.1 - a.1) + sq(c) * (a.1 - b.1)) / d;
                let uy = (sq(a) * (c.0 - b.0) + sq(b) * (a.0 - c.0) + sq(c) * (b.0 - a.0)) / d;
                let r2 = (a.0 - ux).powi(2) + (a.1 - uy).powi(2);
                let empty = (0..n)
                    .filter(|&p| p != i && p != j && p != k)
                    .all(|p| (pts[p].0 - ux).powi(2) + (pts[p].1 - uy).powi(2) > r2 * (1.0 + 1e-12));
                if empty {
                    edges.extend([(i, j), (i, k), (j, k)]);
                }
            }
        }
    }
    edges
}

/// Cheapest subset under the penalized objective, lowest bit pattern on ties.
pub fn exhaustive_best(n: usize, objective: impl Fn(&[bool]) -> Evaluation, penalty: Penalty) -> (Vec<bool>, f64) {
    let mut best = (vec![false; n], f64::INFINITY);
    for mask in 0u32..(1 << n) {
        let x: Vec<bool> = (0..n).map(|b| mask >> b & 1 == 1).collect();
        let v = penalty.value(&objective(&x));
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}

/// Set-cover style problem: each requirement needs one of its items, some
/// item pairs conflict.
pub struct CoverProblem {
    pub costs: Vec<f64>,
    pub needs: Vec<Vec<usize>>,
    pub conflicts: Vec<(usize, usize)>,
}

impl CoverProblem {
    pub fn random(rng: &mut ChaCha8Rng) -> CoverProblem {
        let n = rng.gen_range(6..=14);
        let costs = (0..n).map(|_| rng.gen_range(100.0..1000.0f64).round()).collect();
        let needs = (0..rng.gen_range(2..6))
            .map(|_| {
                let mut v: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.3)).collect();
                if v.is_empty() {
                    v.push(rng.gen_range(0..n));
                }
                v
            })
            .collect();
        let conflicts = (0..rng.gen_range(0..4))
            .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n)))
            .filter(|(a, b)| a != b)
            .collect();
        CoverProblem { costs, needs, conflicts }
    }

    pub fn eval(&self, x: &[bool]) -> Evaluation {
        let cost = self.costs.iter().zip(x).filter(|(_, &a)| a).map(|(c, _)| c).sum();
        let unmet = self.needs.iter().filter(|r| !r.iter().any(|&i| x[i])).count();
        let clash = self.conflicts.iter().filter(|&&(a, b)| x[a] && x[b]).count();
        Evaluation { cost, violations: unmet + clash, magnitude: (unmet + clash) as f64 * 0.5 }
    }
}
