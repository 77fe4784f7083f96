use super::*;
use crate::grid::{BranchId, Fuel};
use crate::testutil::{bus, gen, line, network, two_bus_congested};

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-6
}

#[test]
fn single_bus_economic_dispatch() {
    let n = network(vec![bus(1)], vec![], vec![gen(1, 1, Fuel::Coal, 100.0, 20.0)]);
    let p = build_problem(&n, vec![vec![80.0]], full_availability(&n, 1), Default::default(), None)
        .unwrap();
    assert_eq!(p.num_balance_rows(), 1);
    assert_eq!(p.lp().num_rows(), 1);
    let s = solve(&p).unwrap();
    assert!(s.is_optimal());
    assert!(close(s.dispatch[0][0], 80.0));
    assert!(close(s.objective, 1600.0));
    assert!(close(lmps(&s).unwrap()[0][0], 20.0));
}

#[test]
fn two_bus_congestion_prices() {
    let n = two_bus_congested();
    let demand = vec![vec![0.0], vec![80.0]];
    let p = build_problem(&n, demand, full_availability(&n, 1), Default::default(), None).unwrap();
    let s = solve(&p).unwrap();
    assert!(close(s.flows[0][0], 50.0));
    assert!(close(s.dispatch[0][0], 50.0));
    assert!(close(s.dispatch[1][0], 30.0));
    assert!(close(s.lmp[0][0], 10.0), "{:?}", s.lmp);
    assert!(close(s.lmp[1][0], 30.0), "{:?}", s.lmp);
    assert!(close(s.mu[0][0], 20.0), "{:?}", s.mu);
    assert!(close(average_congestion([&s], BranchId(1)), 20.0));
}

#[test]
fn triangle_splits_by_superposition() {
    let n = network(
        vec![bus(1), bus(2), bus(3)],
        vec![
            line(1, 1, 2, 0.1, 500.0),
            line(2, 1, 3, 0.1, 500.0),
            line(3, 3, 2, 0.1, 500.0),
        ],
        vec![gen(1, 1, Fuel::Coal, 200.0, 10.0)],
    );
    let demand = vec![vec![0.0], vec![90.0], vec![0.0]];
    let p = build_problem(&n, demand, full_availability(&n, 1), Default::default(), None).unwrap();
    let s = solve(&p).unwrap();
    assert!(close(s.flows[0][0], 60.0));
    assert!(close(s.flows[1][0], 30.0));
    assert!(close(s.flows[2][0], 30.0));
    for b in 0..3 {
        assert!(close(s.lmp[b][0], 10.0));
    }
    assert!(s.mu.iter().flatten().all(|m| *m == 0.0));
    // angle difference times susceptance reproduces each flow
    for (l, br) in n.branches.iter().enumerate() {
        let i = (br.from.0 - 1) as usize;
        let j = (br.to.0 - 1) as usize;
        let f = (s.angles[i][0] - s.angles[j][0]) / br.reactance * n.base_mva;
        assert!(close(f, s.flows[l][0]));
    }
}

#[test]
fn ramp_couples_first_hour_to_initial_dispatch() {
    let mut g1 = gen(1, 1, Fuel::Coal, 100.0, 10.0);
    g1.ramp_limit = 10.0;
    let n = network(vec![bus(1)], vec![], vec![g1, gen(2, 1, Fuel::NaturalGas, 200.0, 50.0)]);
    let solve_for = |d0: f64| {
        let p = build_problem(
            &n,
            vec![vec![d0, d0]],
            full_availability(&n, 2),
            Default::default(),
            Some(vec![50.0, 0.0]),
        )
        .unwrap();
        solve(&p).unwrap()
    };
    let high = solve_for(150.0);
    assert!(close(high.dispatch[0][0], 60.0));
    assert!(close(high.dispatch[0][1], 70.0));
    // the cheap unit would rather sit at 0 but cannot drop below 40
    let mut cheap_last = n.clone();
    cheap_last.generators[0].cost_curve = crate::grid::CostCurve::flat(0.0, 100.0, 90.0);
    let p = build_problem(
        &cheap_last,
        vec![vec![100.0, 100.0]],
        full_availability(&cheap_last, 2),
        Default::default(),
        Some(vec![50.0, 0.0]),
    )
    .unwrap();
    let s = solve(&p).unwrap();
    assert!(close(s.dispatch[0][0], 40.0));
    assert!(close(s.dispatch[0][1], 30.0));
}

#[test]
fn shortage_sheds_at_shed_price() {
    let n = network(vec![bus(1)], vec![], vec![gen(1, 1, Fuel::Coal, 100.0, 20.0)]);
    let p = build_problem(&n, vec![vec![130.0]], full_availability(&n, 1), Default::default(), None)
        .unwrap();
    let s = solve(&p).unwrap();
    assert!(close(s.total_shed(), 30.0));
    assert!(close(s.lmp[0][0], 10_000.0));

    let strict = MpdcopfOptions {
        load_shed_cost: None,
        ..Default::default()
    };
    let p = build_problem(&n, vec![vec![130.0]], full_availability(&n, 1), strict, None).unwrap();
    let s = solve(&p).unwrap();
    match &s.status {
        DispatchStatus::Infeasible { hint } => {
            assert!(hint.contains(&RowRef::Balance {
                bus: crate::grid::BusId(1),
                hour: 0
            }))
        }
        other => panic!("expected infeasible, got {other:?}"),
    }
    assert!(matches!(lmps(&s), Err(OpfError::NotOptimal)));
}

#[test]
fn soft_limits_price_violations() {
    let n = network(
        vec![bus(1), bus(2)],
        vec![line(1, 1, 2, 0.1, 50.0)],
        vec![gen(1, 1, Fuel::Coal, 100.0, 10.0)],
    );
    let opts = MpdcopfOptions {
        soft_limits: true,
        ..Default::default()
    };
    let p = build_problem(&n, vec![vec![0.0], vec![80.0]], full_availability(&n, 1), opts, None)
        .unwrap();
    assert_eq!(p.violation_costs(), vec![(BranchId(1), 0, 2_000.0)]);
    let s = solve(&p).unwrap();
    assert!(close(s.flows[0][0], 80.0));
    assert!(close(s.violations[0][0], 30.0));
    assert!(close(s.total_shed(), 0.0));
}

#[test]
fn must_run_floor_and_no_load() {
    let mut nuke = gen(1, 1, Fuel::Nuclear, 100.0, 5.0);
    nuke.p_min = 60.0;
    nuke.cost_curve = crate::grid::CostCurve::flat(60.0, 100.0, 5.0);
    nuke.no_load_cost = 100.0;
    let n = network(vec![bus(1)], vec![], vec![nuke, gen(2, 1, Fuel::Coal, 100.0, 20.0)]);
    let p = build_problem(&n, vec![vec![30.0, 30.0]], full_availability(&n, 2), Default::default(), None)
        .unwrap();
    let s = solve(&p).unwrap();
    // 60 MW floor exceeds demand; the surplus has nowhere to go
    assert!(!s.is_optimal());

    let p = build_problem(&n, vec![vec![150.0]], full_availability(&n, 1), Default::default(), None)
        .unwrap();
    let s = solve(&p).unwrap();
    assert!(close(s.dispatch[0][0], 100.0));
    assert!(close(s.dispatch[1][0], 50.0));
    // floor energy carries no segment cost: 40·5 + 50·20 + no-load 100
    assert!(close(s.objective, 200.0 + 1000.0 + 100.0));
}

#[test]
fn dimension_mismatch_is_reported() {
    let n = two_bus_congested();
    let err = build_problem(&n, vec![vec![1.0]], full_availability(&n, 1), Default::default(), None)
        .unwrap_err();
    assert!(matches!(err, OpfError::DimensionMismatch { .. }));
}

#[test]
fn solution_csv_lists_every_entity() {
    let n = two_bus_congested();
    let p = build_problem(
        &n,
        vec![vec![0.0], vec![80.0]],
        full_availability(&n, 1),
        Default::default(),
        None,
    )
    .unwrap();
    let s = solve(&p).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("solution_0.csv");
    write_solution_csv(&s, &path).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "entity,hour,value,dual");
    assert!(lines.contains(&"branch:1,0,50,20"));
    assert_eq!(lines.len(), 1 + 2 + 2 + 1);
}
