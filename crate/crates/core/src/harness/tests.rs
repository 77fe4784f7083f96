use chrono::{TimeZone, Utc};

use super::*;
use crate::grid::Fuel;
use crate::testutil::{bus, gen, line, network};
use crate::timeseries::Unit;

fn profile(values: Vec<f64>) -> HourlyProfile {
    let start = Utc.with_ymd_and_hms(2016, 1, 1, 0, 0, 0).unwrap();
    HourlyProfile::new(start, values, Unit::Mw).unwrap()
}

#[test]
fn window_plans() {
    let p = plan_windows(8784, 144).unwrap();
    assert_eq!(p.len(), 61);
    assert!(p.windows.iter().all(|w| w.len() == 144));
    let p = plan_windows(300, 144).unwrap();
    let lens: Vec<usize> = p.windows.iter().map(|w| w.len()).collect();
    assert_eq!(lens, vec![144, 144, 12]);
    assert_eq!(plan_windows(50, 50).unwrap().len(), 1);
    assert!(matches!(plan_windows(10, 1), Err(HarnessError::BadWindowLength { .. })));
    assert!(matches!(plan_windows(10, 11), Err(HarnessError::BadWindowLength { .. })));
    assert_eq!(plan_windows(300, 144).unwrap().truncated(2).total_hours, 288);
}

fn seam_case() -> (Network, Profiles) {
    let mut slow = gen(1, 1, Fuel::Coal, 200.0, 10.0);
    slow.ramp_limit = 15.0;
    let mut mid = gen(2, 2, Fuel::NaturalGas, 150.0, 25.0);
    mid.ramp_limit = 40.0;
    let n = network(
        vec![bus(1), bus(2)],
        vec![line(1, 1, 2, 0.05, 400.0)],
        vec![slow, mid, gen(3, 2, Fuel::FuelOil, 300.0, 90.0)],
    );
    // demand steps up at each window boundary and eases off inside windows,
    // so the slow unit's ramp binds across every seam
    let d: Vec<f64> = (0..30)
        .map(|t| 100.0 + 50.0 * (t / 10) as f64 - 3.0 * (t % 10) as f64)
        .collect();
    let profiles = Profiles {
        demand: [(BusId(1), profile(d.iter().map(|x| x * 0.3).collect())), (BusId(2), profile(d))]
            .into_iter()
            .collect(),
        availability: BTreeMap::new(),
    };
    (n, profiles)
}

#[test]
fn seams_respect_ramp_limits() {
    let (n, profiles) = seam_case();
    let plan = plan_windows(30, 10).unwrap();
    let log = run_rolling_horizon(&n, &profiles, &plan, &HarnessOptions::default()).unwrap();
    assert_eq!(log.windows.len(), 3);
    assert!(log.retries.is_empty());
    assert_eq!(log.hours(), 30);
    for pair in log.windows.windows(2) {
        let (a, b) = (&pair[0].solution, &pair[1].solution);
        for (g, gen) in n.generators.iter().enumerate() {
            let jump = (b.dispatch[g][0] - a.dispatch[g][9]).abs();
            assert!(jump <= gen.ramp_limit + 1e-6, "gen {} jumps {jump}", gen.id);
        }
        assert!((b.dispatch[0][0] - a.dispatch[0][9] - 15.0).abs() < 1e-6);
    }
}

#[test]
fn overload_needs_two_reductions() {
    let n = network(vec![bus(1)], vec![], vec![gen(1, 1, Fuel::Coal, 100.0, 20.0)]);
    let profiles = Profiles {
        demand: [(BusId(1), profile(vec![108.0; 4]))].into_iter().collect(),
        availability: BTreeMap::new(),
    };
    let mut opts = HarnessOptions::default();
    opts.opf.load_shed_cost = None;
    let plan = plan_windows(4, 2).unwrap();
    let log = run_rolling_horizon(&n, &profiles, &plan, &opts).unwrap();
    for w in &log.windows {
        assert_eq!(w.retries, 2);
        assert_eq!(w.demand_scale, 0.95 * 0.95);
    }
    assert_eq!(log.retries.len(), 4);
    assert_eq!(log.retries[1].demand_scale, 0.95);

    opts.retry_cap = 0;
    assert!(matches!(
        run_rolling_horizon(&n, &profiles, &plan, &opts),
        Err(HarnessError::RetryCapExceeded { window: 0, retries: 0, .. })
    ));
}

#[test]
fn missing_profiles_are_named() {
    let n = network(
        vec![bus(1)],
        vec![],
        vec![gen(1, 1, Fuel::Coal, 100.0, 20.0), gen(7, 1, Fuel::Wind, 50.0, 0.0)],
    );
    let plan = plan_windows(4, 2).unwrap();
    let only_demand = Profiles {
        demand: [(BusId(1), profile(vec![10.0; 4]))].into_iter().collect(),
        availability: BTreeMap::new(),
    };
    let err = run_rolling_horizon(&n, &only_demand, &plan, &HarnessOptions::default()).unwrap_err();
    assert!(err.to_string().contains("gen 7"), "{err}");

    let short = Profiles {
        demand: [(BusId(1), profile(vec![10.0; 3]))].into_iter().collect(),
        availability: [(crate::grid::GenId(7), profile(vec![1.0; 4]))].into_iter().collect(),
    };
    assert!(matches!(
        run_rolling_horizon(&n, &short, &plan, &HarnessOptions::default()),
        Err(HarnessError::ProfileTooShort { .. })
    ));
}

#[test]
fn log_files_are_reproducible() {
    let (n, profiles) = seam_case();
    let plan = plan_windows(30, 10).unwrap();
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let log = run_rolling_horizon(&n, &profiles, &plan, &HarnessOptions::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_log(&log, &n, dir.path()).unwrap();
        let mut files = Vec::new();
        for name in ["log_windows.csv", "log_hours.csv", "energy_by_state_fuel.csv"] {
            files.push(std::fs::read(dir.path().join(name)).unwrap());
        }
        outputs.push(files);
    }
    assert_eq!(outputs[0], outputs[1]);
    let hours = String::from_utf8(outputs[0][1].clone()).unwrap();
    assert_eq!(hours.lines().count(), 1 + 30 * (3 + 2 + 2 + 1 + 1));
}

