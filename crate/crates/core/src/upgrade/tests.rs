use chrono::{TimeZone, Utc};

use super::*;
use crate::grid::{Fuel, GenId};
use crate::harness::plan_windows;
use crate::testutil::{bus, gen, line, network};
use crate::timeseries::{HourlyProfile, Unit};

fn flat(v: f64, hours: usize) -> HourlyProfile {
    let start = Utc.with_ymd_and_hms(2016, 1, 1, 0, 0, 0).unwrap();
    HourlyProfile::new(start, vec![v; hours], Unit::Mw).unwrap()
}

fn demand(entries: &[(u32, f64)], hours: usize) -> Profiles {
    Profiles {
        demand: entries.iter().map(|&(b, d)| (BusId(b), flat(d, hours))).collect(),
        availability: BTreeMap::new(),
    }
}

fn no_load_bus(id: u32) -> crate::grid::Bus {
    let mut b = bus(id);
    b.demand_participation = false;
    b
}

/// Cheap supply at bus 1, 350 MW of demand at bus 3 behind a 200 MW line.
fn gap_case() -> (Network, Profiles) {
    let n = network(
        vec![no_load_bus(1), no_load_bus(2), bus(3)],
        vec![line(1, 1, 2, 0.1, 1000.0), line(2, 2, 3, 0.1, 200.0)],
        vec![gen(1, 1, Fuel::Coal, 600.0, 10.0), gen(2, 3, Fuel::NaturalGas, 500.0, 60.0)],
    );
    (n, demand(&[(3, 350.0)], 4))
}

#[test]
fn steps_the_gap_in_whole_increments() {
    let (n, profiles) = gap_case();
    let plan = plan_windows(4, 2).unwrap();
    let scenario = Scenario {
        profiles: &profiles,
        plan: &plan,
        options: HarnessOptions::default(),
    };
    let out = step_upgrade(&n, &scenario, &UpgradePolicy::default()).unwrap();
    assert_eq!(out.records.len(), 1);
    let r = &out.records[0];
    assert_eq!((r.branch, r.old_capacity, r.new_capacity, r.iterations), (BranchId(2), 200.0, 400.0, 2));
    assert!((r.trigger - 50.0).abs() < 1e-6);
    assert_eq!(out.network.branch(BranchId(2)).unwrap().capacity, 400.0);
    assert_eq!(out.network.branch(BranchId(1)).unwrap().capacity, 1000.0);
    assert_eq!(out.objectives.len(), 3);
    assert!(out.objectives.windows(2).all(|w| w[1] <= w[0] + 1e-6));

    let capped = UpgradePolicy {
        max_iterations: 1,
        ..Default::default()
    };
    match step_upgrade(&n, &scenario, &capped) {
        Err(UpgradeError::IterationCapExceeded(partial)) => {
            assert_eq!(partial.records.len(), 1);
            assert_eq!(partial.records[0].iterations, 1);
        }
        other => panic!("expected cap error, got {other:?}"),
    }
}

#[test]
fn satisfied_network_is_left_alone() {
    let (mut n, profiles) = gap_case();
    n.branches[1].capacity = 1000.0;
    let plan = plan_windows(4, 2).unwrap();
    let scenario = Scenario {
        profiles: &profiles,
        plan: &plan,
        options: HarnessOptions::default(),
    };
    let out = step_upgrade(&n, &scenario, &UpgradePolicy::default()).unwrap();
    assert!(out.records.is_empty());
    assert_eq!(out.network, n);
}

#[test]
fn ranking_is_by_average_price() {
    let n = network(
        vec![no_load_bus(1), bus(2), bus(3)],
        vec![line(1, 1, 2, 0.1, 50.0), line(2, 1, 3, 0.1, 50.0)],
        vec![
            gen(1, 1, Fuel::Coal, 500.0, 10.0),
            gen(2, 2, Fuel::NaturalGas, 500.0, 40.0),
            gen(3, 3, Fuel::NaturalGas, 500.0, 50.0),
        ],
    );
    let profiles = demand(&[(2, 100.0), (3, 100.0)], 2);
    let plan = plan_windows(2, 2).unwrap();
    let log = run_rolling_horizon(&n, &profiles, &plan, &HarnessOptions::default()).unwrap();
    let ranked = find_congested(&log, &UpgradePolicy::default()).unwrap();
    assert_eq!(ranked.len(), 2);
    assert_eq!(ranked[0].0, BranchId(2));
    assert!((ranked[0].1 - 40.0).abs() < 1e-6);
    assert!((ranked[1].1 - 30.0).abs() < 1e-6);
    let strict = UpgradePolicy {
        shadow_price_threshold: 35.0,
        ..Default::default()
    };
    assert_eq!(find_congested(&log, &strict).unwrap().len(), 1);
}

#[test]
fn lmp_floor_target_lifts_stranded_wind() {
    let n = network(
        vec![no_load_bus(1), bus(2)],
        vec![line(1, 1, 2, 0.1, 100.0)],
        vec![gen(1, 1, Fuel::Wind, 300.0, 0.0), gen(2, 2, Fuel::NaturalGas, 500.0, 30.0)],
    );
    let mut profiles = demand(&[(2, 200.0)], 2);
    profiles.availability.insert(GenId(1), flat(150.0, 2));
    let plan = plan_windows(2, 2).unwrap();
    let scenario = Scenario {
        profiles: &profiles,
        plan: &plan,
        options: HarnessOptions::default(),
    };
    let policy = UpgradePolicy {
        target: UpgradeTarget::LmpFloor(5.0),
        ..Default::default()
    };
    let out = step_upgrade(&n, &scenario, &policy).unwrap();
    assert_eq!(out.records.len(), 1);
    assert_eq!(out.records[0].iterations, 1);
}

#[test]
fn soft_sizing_closes_the_gap() {
    let n = network(
        vec![no_load_bus(1), bus(2)],
        vec![line(1, 1, 2, 0.1, 50.0)],
        vec![gen(1, 1, Fuel::Coal, 200.0, 10.0)],
    );
    let profiles = demand(&[(2, 80.0)], 2);
    let plan = plan_windows(2, 2).unwrap();
    let scenario = Scenario {
        profiles: &profiles,
        plan: &plan,
        options: HarnessOptions::default(),
    };
    let req = size_upgrades_soft(&n, &scenario, 2_000.0).unwrap();
    assert_eq!(req.len(), 1);
    assert_eq!(req[0].0, BranchId(1));
    assert!((req[0].1 - 30.0).abs() < 1e-6);

    let (fixed, records) = apply_upgrades(&n, &req);
    assert_eq!(records[0].old_capacity, 50.0);
    let log = run_rolling_horizon(&fixed, &profiles, &plan, &HarnessOptions::default()).unwrap();
    assert!(log.total_shed() < 1e-6);
    assert!(size_upgrades_soft(&fixed, &scenario, 2_000.0).unwrap().is_empty());
}

#[test]
fn records_file_layout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("upgrades.csv");
    let rec = UpgradeRecord {
        branch: BranchId(4),
        old_capacity: 200.0,
        new_capacity: 400.0,
        iterations: 2,
        trigger: 50.0,
    };
    write_upgrades(&[rec], &path).unwrap();
    assert_eq!(
        std::fs::read_to_string(path).unwrap(),
        "branch,old_mw,new_mw,trigger,iterations\n4,200,400,50,2\n"
    );
}
