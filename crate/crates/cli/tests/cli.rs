use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gridforge::fixtures;
use gridforge::grid::{save_grid, Grid};

fn gridforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridforge")).args(args).env_remove("GRIDFORGE_SEED").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write(dir: &Path, g: &Grid) -> PathBuf {
    let p = dir.join(format!("{}.json", g.meta.name));
    save_grid(g, &p).unwrap();
    p
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn validate_reports_through_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let open = write(dir.path(), &fixtures::fig1_open_ring());
    let closed = write(dir.path(), &fixtures::fig1_closed_ring());
    let o = gridforge(&["validate", open.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(json(&o)["violations"], 0);
    let o = gridforge(&["validate", closed.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(json(&o)["radiality"].as_array().is_some_and(|v| !v.is_empty()));
    assert_eq!(code(&gridforge(&["validate", closed.to_str().unwrap(), "--meshed"])), 0);
}

#[test]
fn bad_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&gridforge(&["validate", "/nonexistent.json"])), 2);
    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "{\"buses\": 3}").unwrap();
    let o = gridforge(&["fmea", junk.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("$.buses"));
    assert_eq!(code(&gridforge(&["frobnicate"])), 2);
    let g = write(dir.path(), &fixtures::fig5_ring());
    assert_eq!(code(&gridforge(&["plan", g.to_str().unwrap(), "--concept", "pentagon"])), 2);
}

#[test]
fn power_flow_and_fmea_print_json() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), &fixtures::single_station());
    let o = gridforge(&["pf", g.to_str().unwrap(), "--scenario", "peak_generation"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["converged"], true);
    let o = gridforge(&["fmea", g.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(json(&o)["asidi"].as_f64().unwrap() > 0.0);
}

#[test]
fn dismantle_writes_the_reduced_grid() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), &fixtures::station_replaceable());
    let out = dir.path().join("reduced.json");
    let o = gridforge(&["dismantle", g.to_str().unwrap(), "--remove-station", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let reduced = gridforge::grid::load_grid(&out).unwrap();
    assert!(reduced.bus("W").is_none());
    assert!(!json(&o)["candidate_trails"].as_array().unwrap().is_empty());
}

#[test]
fn compare_writes_reports_and_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), &fixtures::station_replaceable());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let o = gridforge(&["compare", g.to_str().unwrap(), "--out", a.to_str().unwrap(), "--topologies", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o)["winner"], "radial");
    let o2 =
        gridforge(&["compare", g.to_str().unwrap(), "--out", b.to_str().unwrap(), "--topologies", "2", "--sequential"]);
    assert_eq!(o.stdout, o2.stdout);
    for f in ["comparison.json", "comparison.csv", "radial/topology_0.json", "closed_ring/topology_1.json"] {
        let (x, y) = (a.join("station_replaceable").join(f), b.join("station_replaceable").join(f));
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap(), "{f}");
    }
}

#[test]
fn plan_needs_a_switching_station() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), &fixtures::fig5_ring());
    let o = gridforge(&["plan", g.to_str().unwrap(), "--concept", "radial", "--topologies", "1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn seed_variable_reaches_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), &fixtures::station_replaceable());
    let out = dir.path().join("o");
    let o = Command::new(env!("CARGO_BIN_EXE_gridforge"))
        .args(["compare", g.to_str().unwrap(), "--out", out.to_str().unwrap(), "--topologies", "1"])
        .env("GRIDFORGE_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["seed"], 99);
}
