mod common;

use gridforge::economics::{annualize, concept_overhead, plan_cost, Concept, CostModel};
use gridforge::fixtures;
use gridforge::planner::Measure;

#[test]
fn annuity_matches_discounted_payments() {
    for c in [1.0, 1000.0, 35_900.0, 2.5e6] {
        for i in [0.5, 1.0, 3.0, 5.0, 8.0, 12.5] {
            for m in [1u32, 2, 5, 10, 25, 40, 60] {
                let a = annualize(c, i, m as f64).unwrap();
                let o = common::iterative_annuity(c, i, m);
                assert!((a - o).abs() <= 1e-9 * o, "c={c} i={i} m={m}: {a} vs {o}");
            }
        }
    }
    assert_eq!(annualize(1000.0, 10.0, 1.0).unwrap(), 1100.0);
}

#[test]
fn annuity_grows_with_rate_and_amount() {
    let mut prev = annualize(1000.0, 0.1, 20.0).unwrap();
    for k in 1..50 {
        let a = annualize(1000.0, 0.1 + k as f64 * 0.5, 20.0).unwrap();
        assert!(a > prev);
        prev = a;
    }
    assert!(annualize(2000.0, 5.0, 20.0).unwrap() > annualize(1999.0, 5.0, 20.0).unwrap());
    let a = annualize(1000.0, 1e-6, 30.0).unwrap();
    assert!((a * 30.0 - 1000.0).abs() < 1e-3);
}

#[test]
fn station_costs_over_five_km_of_cable() {
    let cm = CostModel::default();
    let km = cm.switching_station / cm.cable;
    assert!((km - 5.128).abs() < 1e-3);
    assert!(km > 5.0);
}

#[test]
fn plan_cost_is_additive() {
    let g = fixtures::example_area();
    let cm = CostModel::default();
    let a = vec![
        Measure::ReplaceLine { line: "LF2".into(), new_type: fixtures::CABLE_240.into() },
        Measure::AutomateStation { bus: "D3".into() },
    ];
    let b = vec![
        Measure::AddTrail {
            from_station: "D3".into(),
            to_station: "F1".into(),
            line_type: fixtures::CABLE_300.into(),
            length: 2.0,
        },
        Measure::RenewSwitchingStation { bus: "W".into() },
        Measure::SetSectioningPoint { switch: "LA4@A4".into(), open: false },
    ];
    let both: Vec<Measure> = a.iter().chain(&b).cloned().collect();
    let ca = plan_cost(&g, &a, &cm, Concept::Radial).unwrap();
    let cb = plan_cost(&g, &b, &cm, Concept::Radial).unwrap();
    let cab = plan_cost(&g, &both, &cm, Concept::Radial).unwrap();
    assert!((ca.total + cb.total - cab.total).abs() < 1e-9);
    assert!((cab.total - (1.2 * 7000.0 + 1200.0 + 14_000.0 + 35_900.0)).abs() < 1e-9);
    let sum = cab.cable
        + cab.switching_station
        + cab.communication
        + cab.impedance_protection
        + cab.directional_indicators
        + cab.investments;
    assert!((sum - cab.total).abs() < 1e-9);
}

#[test]
fn closed_ring_overhead_per_feeder_and_station() {
    let g = fixtures::fig5_ring();
    let cm = CostModel::default();
    assert_eq!(concept_overhead(&g, Concept::Radial, &cm).total, 0.0);
    assert_eq!(concept_overhead(&g, Concept::SwitchingStation, &cm).total, 0.0);
    assert_eq!(concept_overhead(&g, Concept::ClosedRing, &cm).total, 2.0 * 400.0 + 6.0 * 30.0);
}

#[test]
fn unknown_element_is_rejected() {
    let g = fixtures::fig5_ring();
    let m = [Measure::AutomateStation { bus: "nowhere".into() }];
    assert!(plan_cost(&g, &m, &CostModel::default(), Concept::Radial).is_err());
}
