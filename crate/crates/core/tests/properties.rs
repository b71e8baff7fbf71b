use gridforge::economics::annualize;
use gridforge::exec::Exec;
use gridforge::fixtures;
use gridforge::grid::{apply_scenario, grid_from_json, grid_to_json, validate_grid};
use gridforge::planner::{ils, Evaluation, IlsParams, Penalty};
use gridforge::power_flow::run_power_flow;
use gridforge::principles::Principles;
use gridforge::reliability::{fmea, ReliabilityParams};
use gridforge::topology::{check_radiality, find_feeders, RadialityMode};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn json_round_trip_is_lossless(seed in 0u64..10_000, n in 2usize..30) {
        let g = fixtures::random_radial(seed, n);
        let text = grid_to_json(&g);
        let back = grid_from_json(&text).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(grid_to_json(&back), text);
    }

    #[test]
    fn scenario_demand_is_linear_in_rating(seed in 0u64..10_000, n in 2usize..20, k in 0.1f64..5.0) {
        let g = fixtures::random_radial(seed, n);
        let mut h = g.clone();
        h.injections.iter_mut().for_each(|i| i.sn *= k);
        for sc in Principles::default().worst_cases() {
            let (a, b) = (apply_scenario(&g, &sc).unwrap(), apply_scenario(&h, &sc).unwrap());
            for (bus, p) in &a.demand {
                let q = b.demand[bus];
                prop_assert!((q.p_mw - k * p.p_mw).abs() <= 1e-12 * (1.0 + p.p_mw.abs() * k));
                prop_assert!((q.q_mvar - k * p.q_mvar).abs() <= 1e-12 * (1.0 + p.q_mvar.abs() * k));
            }
            prop_assert_eq!(&a.transformer_setpoints, &b.transformer_setpoints);
        }
    }

    #[test]
    fn validation_is_pure(seed in 0u64..10_000, n in 2usize..20, cut in 0usize..40) {
        let mut g = fixtures::random_radial(seed, n);
        let k = cut % g.lines.len();
        g.lines[k].length = -1.0;
        let before = g.clone();
        let a = validate_grid(&g);
        prop_assert_eq!(&a, &validate_grid(&g));
        prop_assert_eq!(&g, &before);
        prop_assert!(a.iter().any(|f| f.element == g.lines[k].id));
    }

    #[test]
    fn power_balances_at_convergence(seed in 0u64..10_000, n in 2usize..30) {
        let g = fixtures::random_radial(seed, n);
        for sc in Principles::default().worst_cases() {
            let r = run_power_flow(&g, &sc).unwrap();
            prop_assert!(r.converged);
            let d = apply_scenario(&g, &sc).unwrap();
            let p: f64 = d.demand.values().map(|b| b.p_mw).sum();
            let q: f64 = d.demand.values().map(|b| b.q_mvar).sum();
            prop_assert!((r.p_slack - p - r.p_losses).abs() < 1e-6);
            prop_assert!((r.q_slack - q - r.q_losses).abs() < 1e-6);
            prop_assert!(r.v.values().all(|v| v.vm_pu > 0.0));
        }
    }

    #[test]
    fn outage_times_scale_with_time_constants(seed in 0u64..10_000, n in 2usize..16, k in 0.2f64..4.0) {
        let g = fixtures::random_radial(seed, n);
        let p = ReliabilityParams::default();
        let q = ReliabilityParams { t_locate: p.t_locate * k, t_onsite: p.t_onsite * k, t_remote: p.t_remote * k, ..p.clone() };
        let (a, b) = (fmea(&g, &p).unwrap(), fmea(&g, &q).unwrap());
        for (s, t) in &a.t_out {
            prop_assert!((b.t_out[s] - k * t).abs() <= 1e-12 * (k * t).max(1e-300));
        }
        prop_assert!((b.asidi - k * a.asidi).abs() <= 1e-12 * (k * a.asidi).max(1e-300));
    }

    #[test]
    fn radial_fixtures_have_one_breaker_per_feeder(seed in 0u64..10_000, n in 2usize..30) {
        let g = fixtures::random_radial(seed, n);
        prop_assert!(check_radiality(&g, RadialityMode::Strict).unwrap().is_empty());
        let feeders = find_feeders(&g).unwrap();
        prop_assert!(!feeders.is_empty());
        let roots: std::collections::BTreeSet<&String> = feeders.iter().map(|f| &f.root_line).collect();
        prop_assert_eq!(roots.len(), feeders.len());
    }

    #[test]
    fn annuity_is_monotone(c in 1.0f64..1e6, i in 0.01f64..20.0, m in 1u32..80, bump in 1e-3f64..1.0) {
        let a = annualize(c, i, m as f64).unwrap();
        prop_assert!(annualize(c, i + bump, m as f64).unwrap() > a);
        prop_assert!(annualize(c * (1.0 + bump), i, m as f64).unwrap() > a);
        prop_assert!(a >= c / m as f64);
    }

    #[test]
    fn ils_trace_never_worsens(costs in prop::collection::vec(1.0f64..500.0, 3..12), need in 0usize..64, seed in 0u64..1000) {
        let n = costs.len();
        let f = |x: &[bool]| {
            let cost = costs.iter().zip(x).filter(|(_, &a)| a).map(|(c, _)| c).sum();
            let missing = (0..n.min(6)).filter(|b| need >> b & 1 == 1 && !x[*b]).count();
            Evaluation { cost, violations: missing, magnitude: missing as f64 }
        };
        let penalty = Penalty::for_pool(costs.iter().sum(), 100.0);
        let params = IlsParams { max_evaluations: 300, ..Default::default() };
        let r = ils(n, &f, penalty, &params, seed, None, Exec::Sequential).unwrap();
        prop_assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(r.evaluations <= 300);
        prop_assert!(r.best.evaluation.feasible());
    }
}
