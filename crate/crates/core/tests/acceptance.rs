//! Acceptance run: one line per criterion, non-zero exit when any fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use common::CoverProblem;
use gridforge::economics::{annualize, Concept, CostModel};
use gridforge::exec::Exec;
use gridforge::fixtures;
use gridforge::grid::{BusKind, Grid, GridIndex, ScenarioName, SwitchState};
use gridforge::pipeline::{run_area, validate_plan, write_outputs, AreaResult, ConceptPlan};
use gridforge::planner::{delaunay_edges, ils, IlsParams, Measure, Penalty};
use gridforge::power_flow::{run_power_flow, PfModel};
use gridforge::principles::Principles;
use gridforge::reliability::{automate_for_reliability, automate_station, check_reliability, fmea, ReliabilityParams};
use gridforge::topology::{check_radiality, mark_stubs, resupply_sequence, RadialityMode, Stage, SwitchOp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn pf_gap(grid: &Grid, name: ScenarioName) -> Result<f64, String> {
    let sc = Principles::default().scenario(name);
    let r = run_power_flow(grid, &sc).map_err(|e| e.to_string())?;
    ensure(r.converged, || format!("{} did not converge", grid.meta.name))?;
    let oracle = common::fixed_point_pf(grid, &sc);
    Ok(oracle.iter().fold(0.0f64, |g, (bus, (vm, va))| {
        let v = r.v[bus];
        g.max((v.vm_pu - vm).abs()).max((v.va_rad - va).abs())
    }))
}

fn c1_power_flow() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for seed in 0..12u64 {
        let g = fixtures::random_radial(seed, 10 + seed as usize);
        ensure(g.buses.len() <= 30, || format!("seed {seed} has {} buses", g.buses.len()))?;
        for name in [ScenarioName::PeakLoad, ScenarioName::PeakGeneration] {
            worst = worst.max(pf_gap(&g, name)?);
        }
    }
    let mut worst2 = 0.0f64;
    for (len, s, pf) in [(1.0, 1.0, 0.97), (5.0, 3.0, 0.9), (0.3, 0.2, 1.0), (10.0, 2.0, 0.8)] {
        let g = fixtures::two_bus(len, s, pf);
        let r = run_power_flow(&g, &Principles::default().peak_load()).map_err(|e| e.to_string())?;
        let lt = g.line_type(fixtures::CABLE_150).unwrap();
        let (p, q) = (s * pf, s * (1.0 - pf * pf).sqrt());
        let (vm, va) = common::two_bus_closed_form(1.0, lt.r_per_km * len / 400.0, lt.x_per_km * len / 400.0, p, q);
        worst2 = worst2.max((r.v["B"].vm_pu - vm).abs()).max((r.v["B"].va_rad - va).abs());
    }
    let took = start.elapsed();
    ensure(worst <= 1e-6, || format!("fixed-point gap {worst:.2e} pu"))?;
    ensure(worst2 <= 1e-6, || format!("two-bus gap {worst2:.2e} pu"))?;
    ensure(took <= Duration::from_secs(5), || format!("took {took:.2?}"))?;
    Ok(format!("12 feeders gap {worst:.1e} pu, two-bus gap {worst2:.1e} pu in {took:.2?}"))
}

fn c2_jacobian() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pr = Principles::default();
    let mut worst = 0.0f64;
    for trial in 0..100u64 {
        let g = fixtures::random_radial(trial, 6 + (trial % 10) as usize);
        let idx = GridIndex::new(&g).map_err(|e| e.to_string())?;
        let model = PfModel::build(&idx, &SwitchState::of(&g), &pr.peak_load()).map_err(|e| e.to_string())?;
        let n = model.n_unknowns();
        let x: Vec<f64> =
            (0..n).map(|k| if k < n / 2 { rng.gen_range(-0.2..0.2) } else { rng.gen_range(0.85..1.15) }).collect();
        let jac = model.jacobian(&x);
        let scale = jac.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        let h = 1e-6;
        for c in 0..n {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[c] += h;
            xm[c] -= h;
            let (fp, fm) = (model.mismatch(&xp), model.mismatch(&xm));
            for r in 0..n {
                worst = worst.max((jac[(r, c)] - (fp[r] - fm[r]) / (2.0 * h)).abs() / scale);
            }
        }
    }
    ensure(worst <= 1e-6, || format!("relative error {worst:.2e}"))?;
    Ok(format!("100 states, worst relative error {worst:.1e}"))
}

fn rel_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300)
}

fn c3_fmea() -> Outcome {
    let params = ReliabilityParams::default();
    let mut grids = vec![
        fixtures::single_station(),
        fixtures::fig5_ring(),
        fixtures::fig1_open_ring(),
        fixtures::two_feeder_six_bus(),
        fixtures::fig1_switching_station_ring(),
        fixtures::ring_with_stub(),
        fixtures::station_replaceable(),
        fixtures::overhead_ring(1.5),
    ];
    grids.extend((0..6).map(|s| fixtures::random_radial(s, 8)));
    let automated: Vec<Grid> = grids
        .iter()
        .map(|g| {
            let mut h = g.clone();
            let ids: Vec<String> = h.buses_of_kind(BusKind::SecondarySubstation).map(|b| b.id.clone()).collect();
            ids.iter().for_each(|s| automate_station(&mut h, s));
            h
        })
        .collect();
    grids.extend(automated);
    for g in &grids {
        ensure(g.lines.len() <= 12, || format!("{} has {} lines", g.meta.name, g.lines.len()))?;
        let f = fmea(g, &params).map_err(|e| e.to_string())?;
        ensure(f.outage_matrix == common::brute_outages(g, &params), || {
            format!("{}: outage matrix differs", g.meta.name)
        })?;
        let (t, asidi) = common::brute_fmea(g, &params);
        ensure(t.iter().all(|(s, v)| rel_eq(f.t_out[s], *v)) && rel_eq(f.asidi, asidi), || {
            format!("{}: outage times differ", g.meta.name)
        })?;
    }
    let hand = ReliabilityParams {
        failure_rate: BTreeMap::from([("xlpe".into(), 0.1)]),
        t_locate: 1.75,
        t_onsite: 0.25,
        t_remote: 0.02,
        e_out_max: 150.0,
    };
    let f = fmea(&fixtures::single_station(), &hand).map_err(|e| e.to_string())?;
    let (t, e, a) = (f.t_out["S1"], f.e_out["S1"], f.asidi);
    ensure((t - 0.2).abs() < 1e-12 && (e - 20.0).abs() < 1e-9 && (a - 0.2).abs() < 1e-12, || {
        format!("hand case t={t} E={e} ASIDI={a}")
    })?;
    Ok(format!("{} grids match enumeration; hand case t=0.2 h/a, E=20 kWh/a, ASIDI=0.2 h/a", grids.len()))
}

fn c4_economics() -> Outcome {
    let one = annualize(1000.0, 10.0, 1.0).map_err(|e| e.to_string())?;
    ensure(one == 1100.0, || format!("annualize(1000, 10 %, 1) = {one}"))?;
    let mut worst = 0.0f64;
    for c in [1.0, 1000.0, 35_900.0, 2.5e6] {
        for i in [0.5, 1.0, 3.0, 5.0, 8.0, 12.5] {
            for m in [1u32, 2, 5, 10, 25, 40, 60] {
                let a = annualize(c, i, m as f64).map_err(|e| e.to_string())?;
                let o = common::iterative_annuity(c, i, m);
                worst = worst.max((a - o).abs() / o);
            }
        }
    }
    ensure(worst <= 1e-9, || format!("annuity relative error {worst:.2e}"))?;
    let cm = CostModel::default();
    let km = cm.switching_station / cm.cable;
    ensure((km - 5.128).abs() < 1e-3 && km > 5.0, || format!("station equals {km} km of cable"))?;
    Ok(format!("1100 exact, annuity error {worst:.1e}, station = {km:.3} km of cable"))
}

fn c5_ils() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let params = IlsParams::default();
    let mut hits = 0;
    for run in 0..100u64 {
        let p = CoverProblem::random(&mut rng);
        let n = p.costs.len();
        ensure(n <= 14, || format!("pool of {n}"))?;
        let penalty = Penalty::for_pool(p.costs.iter().sum(), 100.0);
        let f = |x: &[bool]| p.eval(x);
        let (best_x, best_v) = common::exhaustive_best(n, f, penalty);
        let r = ils(n, &f, penalty, &params, run, None, Exec::Sequential).map_err(|e| e.to_string())?;
        if (r.best.value - best_v).abs() < 1e-9 {
            hits += 1;
        }
        ensure(!p.eval(&best_x).feasible() || r.best.evaluation.feasible(), || {
            format!("run {run}: infeasible result although a feasible subset exists")
        })?;
    }
    let took = start.elapsed();
    ensure(hits >= 95, || format!("{hits}/100 optimal"))?;
    ensure(took <= Duration::from_secs(60), || format!("took {took:.2?}"))?;
    Ok(format!("{hits}/100 runs optimal, feasibility kept, {took:.2?}"))
}

fn c6_topology() -> Outcome {
    let strict = |g: &Grid| check_radiality(g, RadialityMode::Strict).map(|v| v.is_empty()).map_err(|e| e.to_string());
    let verdicts = [
        strict(&fixtures::fig1_open_ring())?,
        strict(&fixtures::fig1_closed_ring())?,
        strict(&fixtures::fig1_switching_station_ring())?,
    ];
    ensure(verdicts == [true, false, true], || format!("radiality verdicts {verdicts:?}"))?;
    let seq = resupply_sequence(&fixtures::fig5_ring(), "L2").map_err(|e| e.to_string())?;
    let mut stages: Vec<Stage> = seq.actions.iter().map(|a| a.stage).collect();
    stages.dedup();
    ensure(stages == [Stage::ProtectionTrip, Stage::FaultIsolation, Stage::Reclose, Stage::Resupply], || {
        format!("stages {stages:?}")
    })?;
    let ops: Vec<(SwitchOp, &str)> = seq.actions.iter().map(|a| (a.op, a.switch.as_str())).collect();
    let expected = [
        (SwitchOp::Open, "L1@P"),
        (SwitchOp::Open, "L2@S1"),
        (SwitchOp::Open, "L2@S2"),
        (SwitchOp::Close, "L1@P"),
        (SwitchOp::Close, "L4@S4"),
    ];
    ensure(ops == expected, || format!("actions {ops:?}"))?;
    ensure(seq.unsupplied.is_empty(), || format!("unsupplied {:?}", seq.unsupplied))?;
    Ok("verdicts pass/fail/pass; trip, isolate, reclose, resupply with all stations back".into())
}

fn c7_delaunay() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for set in 0..100 {
        let n = rng.gen_range(4..=25);
        let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen_range(0.0..5000.0), rng.gen_range(0.0..5000.0))).collect();
        let got: BTreeSet<(usize, usize)> = delaunay_edges(&pts).into_iter().collect();
        ensure(got == common::empty_circle_edges(&pts), || format!("point set {set} differs"))?;
    }
    let lattice: Vec<(f64, f64)> = (0..16).map(|k| ((k % 4) as f64 * 100.0, (k / 4) as f64 * 100.0)).collect();
    let runs: BTreeSet<Vec<(usize, usize)>> = (0..5).map(|_| delaunay_edges(&lattice)).collect();
    ensure(runs.len() == 1, || "cocircular lattice gives varying edges".into())?;
    let line: Vec<(f64, f64)> = [3.0, 0.0, 2.0, 1.0].iter().map(|&x| (x, 2.0 * x)).collect();
    ensure(delaunay_edges(&line) == [(0, 2), (1, 3), (2, 3)], || "collinear points are not chained".into())?;
    Ok("100 random sets agree; lattice and collinear sets deterministic".into())
}

fn reference(r: &AreaResult, c: Concept) -> Option<&ConceptPlan> {
    let k = r.report.concepts.get(&c)?.reference_topology?;
    r.plans[&c].iter().find(|o| o.topology == k)?.plan.as_ref()
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn written(r: &AreaResult) -> BTreeMap<String, Vec<u8>> {
    let tmp = tempfile::tempdir().unwrap();
    write_outputs(r, tmp.path()).unwrap();
    files(tmp.path())
}

/// Voltages of the fixed-point oracle inside the normal band.
fn oracle_voltages_ok(g: &Grid, pr: &Principles) -> Result<(), String> {
    for sc in pr.worst_cases() {
        for (bus, (vm, _)) in common::fixed_point_pf(g, &sc) {
            ensure(vm >= sc.v_min - 1e-6 && vm <= sc.v_max + 1e-6, || format!("{bus} at {vm:.4} pu in {}", sc.name))?;
        }
    }
    Ok(())
}

fn c8_end_to_end() -> Outcome {
    let g = fixtures::example_area();
    let stations = g.buses_of_kind(BusKind::SecondarySubstation).count();
    let mut pr = Principles::default();
    pr.planner_params.n_topologies = 5;
    let start = Instant::now();
    let r = run_area(&g, &pr).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    let mut marked = g.clone();
    mark_stubs(&mut marked).map_err(|e| e.to_string())?;
    let base = fmea(&marked, &pr.reliability_params).map_err(|e| e.to_string())?;
    let mut costs = Vec::new();
    for c in Concept::ALL {
        let plan = reference(&r, c).ok_or_else(|| format!("no feasible {c} plan"))?;
        let (v, _) = validate_plan(&plan.grid, c, &pr, &base).map_err(|e| e.to_string())?;
        ensure(v.is_empty(), || format!("{c} reference fails re-validation: {v:?}"))?;
        oracle_voltages_ok(&plan.grid, &pr).map_err(|e| format!("{c}: {e}"))?;
        let slack = common::slack_buses(&plan.grid, &pr.peak_load());
        let on = common::energized(&plan.grid, &slack);
        let dark: Vec<&str> = plan
            .grid
            .buses
            .iter()
            .filter(|b| b.kind.is_station() && !on.contains(&b.id))
            .map(|b| b.id.as_str())
            .collect();
        ensure(dark.is_empty(), || format!("{c}: oracle finds {dark:?} unsupplied"))?;
        costs.push(format!("{c} {:.0}", plan.cost.total));
    }
    let first = written(&r);
    let again = written(&run_area(&g, &pr).map_err(|e| e.to_string())?);
    pr.planner_params.exec = Exec::Sequential;
    let sequential = written(&run_area(&g, &pr).map_err(|e| e.to_string())?);
    ensure(first == again, || "repeated run differs".into())?;
    ensure(first == sequential, || "sequential run differs".into())?;
    ensure(took <= Duration::from_secs(60), || format!("took {took:.2?}"))?;
    Ok(format!(
        "{stations} stations, 3 feasible reference plans ({}), {} files byte-identical, {took:.2?}",
        costs.join(", "),
        first.len()
    ))
}

fn c9_tradeoffs() -> Outcome {
    let mut pr = Principles::default();
    pr.planner_params.n_topologies = 5;
    let r = run_area(&fixtures::station_replaceable(), &pr).map_err(|e| e.to_string())?;
    let radial = reference(&r, Concept::Radial).ok_or("no radial plan")?;
    let km: f64 = radial
        .measures
        .iter()
        .filter_map(|m| if let Measure::AddTrail { length, .. } = m { Some(*length) } else { None })
        .sum();
    ensure(km < 5.13, || format!("{km:.2} km of new cable"))?;
    ensure(r.report.winner == Some(Concept::Radial), || format!("winner {:?}", r.report.winner))?;

    let g = fixtures::ring_tradeoff(5.0);
    let r = run_area(&g, &pr).map_err(|e| e.to_string())?;
    let delta =
        |r: &AreaResult| r.report.deltas.get(&Concept::ClosedRing).and_then(|d| d.get(&Concept::Radial)).copied();
    let d = delta(&r).ok_or("closed ring or radial infeasible")?;
    ensure(d < 0.0, || format!("closed-ring delta {d}"))?;
    let closed = reference(&r, Concept::ClosedRing).ok_or("no closed-ring plan")?;
    let links = closed.measures.iter().filter(|m| matches!(m, Measure::AutomateStation { .. })).count().max(1);
    let mut dear = pr.clone();
    dear.cost_model.communication_link += -d / links as f64 + 1000.0;
    let d2 = delta(&run_area(&g, &dear).map_err(|e| e.to_string())?).ok_or("closed ring or radial infeasible")?;
    ensure(d2 >= 0.0, || format!("delta stays {d2} with links at {}", dear.cost_model.communication_link))?;
    Ok(format!(
        "radial wins with {km:.2} km of trail; ring delta {d:.0} flips to {d2:.0} at {:.0} per link",
        dear.cost_model.communication_link
    ))
}

fn c10_reliability() -> Outcome {
    let p = ReliabilityParams::default();
    let base = fmea(&fixtures::overhead_ring(1.5), &p).map_err(|e| e.to_string())?;
    let g = fixtures::overhead_ring(1.8);
    let before = check_reliability("ring", &fmea(&g, &p).map_err(|e| e.to_string())?, &p, &base);
    ensure(!before.is_empty(), || "fixture does not violate".into())?;
    let a = automate_for_reliability(&g, &p, &base).map_err(|e| e.to_string())?;
    let f = fmea(&a.grid, &p).map_err(|e| e.to_string())?;
    ensure(f.asidi <= base.asidi + 1e-9, || format!("ASIDI {} above {}", f.asidi, base.asidi))?;
    let worst = f.e_out.values().fold(0.0f64, |m, e| m.max(*e));
    ensure(worst <= p.e_out_max, || format!("station outage energy {worst:.1} kWh/a"))?;
    Ok(format!(
        "{} violations repaired with {} automated stations; ASIDI {:.4} <= {:.4} h/a, max {worst:.1} kWh/a",
        before.len(),
        a.stations.len(),
        f.asidi,
        base.asidi
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("power flow vs oracle", c1_power_flow),
        ("jacobian", c2_jacobian),
        ("fmea enumeration", c3_fmea),
        ("economics", c4_economics),
        ("ils optimality", c5_ils),
        ("topology validators", c6_topology),
        ("delaunay", c7_delaunay),
        ("end to end", c8_end_to_end),
        ("trade-offs", c9_tradeoffs),
        ("reliability", c10_reliability),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", k + 1);
            }
        }
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
