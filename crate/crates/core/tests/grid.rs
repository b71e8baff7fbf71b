use gridforge::fixtures;
use gridforge::grid::{grid_from_json, grid_to_json, load_grid, save_grid, validate_grid, Grid, GridError};

fn named() -> Vec<Grid> {
    vec![
        fixtures::example_area(),
        fixtures::fig1_open_ring(),
        fixtures::fig1_closed_ring(),
        fixtures::fig1_switching_station_ring(),
        fixtures::fig5_ring(),
        fixtures::ring_with_stub(),
        fixtures::two_feeder_six_bus(),
        fixtures::station_replaceable(),
        fixtures::ring_tradeoff(5.0),
        fixtures::overhead_ring(1.5),
        fixtures::single_station(),
    ]
}

#[test]
fn fixtures_are_valid_and_survive_a_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for g in named() {
        assert!(validate_grid(&g).is_empty(), "{}: {:?}", g.meta.name, validate_grid(&g));
        let path = dir.path().join(format!("{}.json", g.meta.name));
        save_grid(&g, &path).unwrap();
        assert_eq!(load_grid(&path).unwrap(), g);
    }
}

#[test]
fn dangling_line_is_one_fault() {
    let mut g = fixtures::fig5_ring();
    let mut extra = g.lines[2].clone();
    extra.id = "LX".into();
    extra.to_bus = "ghost".into();
    g.lines.push(extra);
    let f = validate_grid(&g);
    assert_eq!(f.len(), 1, "{f:?}");
    assert_eq!(f[0].element, "LX");
}

#[test]
fn switch_on_foreign_line_is_one_fault() {
    let mut g = fixtures::fig5_ring();
    let far =
        g.lines.iter().find(|l| l.from_bus != g.switches[0].bus && l.to_bus != g.switches[0].bus).unwrap().id.clone();
    g.switches[0].line = far;
    let f = validate_grid(&g);
    assert_eq!(f.len(), 1, "{f:?}");
    assert_eq!(f[0].element, g.switches[0].id);
}

#[test]
fn breaker_outside_busbar_is_rejected() {
    let mut g = fixtures::fig5_ring();
    let s = g.switches.iter_mut().find(|s| s.bus.starts_with('S')).unwrap();
    s.kind = gridforge::grid::SwitchKind::CircuitBreaker;
    let id = s.id.clone();
    assert!(validate_grid(&g).iter().any(|f| f.element == id));
}

#[test]
fn negative_length_names_its_path() {
    let g = fixtures::fig5_ring();
    let mut v: serde_json::Value = serde_json::from_str(&grid_to_json(&g)).unwrap();
    v["lines"][3]["length"] = serde_json::json!(-0.5);
    match grid_from_json(&v.to_string()) {
        Err(GridError::Schema { path, .. }) => assert_eq!(path, "$.lines[3].length"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn missing_file_is_an_io_error() {
    assert!(matches!(load_grid("/nonexistent/grid.json"), Err(GridError::Io { .. })));
}
