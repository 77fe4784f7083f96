mod common;

use std::collections::BTreeMap;

use gridsynth::calibration::{
    calibrate_fuel_costs, group_average_price, match_spur_capacity, scale_generators_to_targets,
    CalibrationTarget,
};
use gridsynth::grid::{BranchId, BusId, CostCurve, Fuel};
use gridsynth::harness::{plan_windows, run_rolling_horizon, HarnessOptions};
use gridsynth::mpdcopf::{build_problem, full_availability, solve, MpdcopfOptions};
use gridsynth::report::{aggregate_generation, compare, revise_costs, GenerationTable, RevisionRule};
use gridsynth::timeseries::{
    disaggregate_demand, hydro_profile, impute_missing_demand, interpolate_anomalies, wind_power,
    Calendar, GappyProfile, HourlyProfile, PowerCurve, Unit,
};
use gridsynth::upgrade::apply_upgrades;
use proptest::prelude::*;

use common::{bus, demand_only, gen, line, network, profile, start};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn disaggregation_conserves_zone_total(
        zone in prop::collection::vec(0.0..5000.0f64, 1..100),
        weights in prop::collection::vec(0.0..10.0f64, 1..10),
    ) {
        prop_assume!(weights.iter().sum::<f64>() > 0.0);
        let buses: Vec<(BusId, f64)> = weights.iter().enumerate().map(|(i, w)| (BusId(i as u32), *w)).collect();
        let split = disaggregate_demand(&profile(zone.clone()), &buses).unwrap();
        for (t, z) in zone.iter().enumerate() {
            let total: f64 = split.values().map(|p| p.values[t]).sum();
            prop_assert!((total - z).abs() <= 1e-9 * z.max(1.0));
        }
    }

    #[test]
    fn imputation_keeps_observed_hours(
        values in prop::collection::vec(100.0..900.0f64, 24 * 21),
        holes in prop::collection::btree_set(0..24 * 21usize, 0..30),
    ) {
        let gappy: Vec<Option<f64>> = values
            .iter()
            .enumerate()
            .map(|(i, v)| (!holes.contains(&i)).then_some(*v))
            .collect();
        let p = GappyProfile::new(start(), gappy, Unit::Mw).unwrap();
        let (filled, n) = impute_missing_demand(&p, &Calendar::utc(start(), values.len())).unwrap();
        prop_assert_eq!(n, holes.len());
        for (i, v) in values.iter().enumerate() {
            if !holes.contains(&i) {
                prop_assert_eq!(filled.values[i], *v);
            }
        }
    }

    #[test]
    fn interpolation_keeps_unflagged_hours(
        values in prop::collection::vec(-50.0..50.0f64, 3..200),
        flags in prop::collection::btree_set(0..200usize, 0..20),
    ) {
        let flagged: Vec<usize> = flags.into_iter().filter(|i| *i < values.len()).collect();
        prop_assume!(flagged.len() < values.len());
        let out = interpolate_anomalies(&profile(values.clone()), &flagged).unwrap();
        for (i, v) in values.iter().enumerate() {
            if !flagged.contains(&i) {
                prop_assert_eq!(out.values[i], *v);
            }
        }
    }

    #[test]
    fn power_curve_rises_to_rated(a in 0.0..30.0f64, b in 0.0..30.0f64, angle in 0.0..6.3f64) {
        let curve = PowerCurve::iec_class2();
        let (cut_in, rated) = (3.0, 14.0);
        let (lo, hi) = (a.min(b).clamp(cut_in, rated), a.max(b).clamp(cut_in, rated));
        prop_assert!(curve.fraction(lo) <= curve.fraction(hi));
        let p = wind_power(a * angle.cos(), a * angle.sin(), &curve, 150.0);
        prop_assert!((p - 150.0 * curve.fraction(a)).abs() < 1e-9 * 150.0);
        prop_assert!((0.0..=150.0).contains(&p));
        // continuity away from the cut-out speed
        if (a - 25.0).abs() > 1e-3 {
            prop_assert!((curve.fraction(a) - curve.fraction(a + 1e-7)).abs() < 1e-4);
        }
    }

    #[test]
    fn hydro_keeps_monthly_energy(
        shape in prop::collection::vec(0.0..3.0f64, 48),
        e1 in 0.0..4000.0f64,
        e2 in 0.0..4000.0f64,
        flat in any::<bool>(),
    ) {
        use chrono::TimeZone;
        let t0 = chrono::Utc.with_ymd_and_hms(2016, 1, 31, 0, 0, 0).unwrap();
        let shape = HourlyProfile::new(t0, shape, Unit::Mw).unwrap();
        let energy: BTreeMap<u32, f64> = [(1, e1), (2, e2)].into_iter().collect();
        let p_max = 200.0;
        let h = hydro_profile(&shape, &energy, p_max, flat).unwrap();
        for (m, range) in [(1u32, 0..24), (2, 24..48)] {
            let sum: f64 = h.profile.values[range].iter().sum();
            prop_assert!((sum - energy[&m]).abs() <= 1e-9 * energy[&m].max(1.0));
        }
        prop_assert!(h.profile.values.iter().all(|v| *v <= p_max * (1.0 + 1e-12)));
    }
}

fn random_dispatch_case(
    caps: &[f64],
    loads: &[f64],
) -> gridsynth::grid::Network {
    network(
        vec![bus(1), bus(2), bus(3)],
        vec![
            line(1, 1, 2, 0.1, caps[0]),
            line(2, 2, 3, 0.15, caps[1]),
            line(3, 1, 3, 0.2, caps[2]),
        ],
        vec![
            gen(1, 1, Fuel::Coal, 300.0, 12.0 + loads[0] / 100.0),
            gen(2, 2, Fuel::NaturalGas, 150.0, 35.0),
            gen(3, 3, Fuel::FuelOil, 80.0, 70.0),
        ],
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn dispatch_balances_and_binds(
        caps in prop::collection::vec(5.0..200.0f64, 3),
        loads in prop::collection::vec(0.0..150.0f64, 6),
        soft in any::<bool>(),
    ) {
        let net = random_dispatch_case(&caps, &loads);
        let demand = vec![vec![0.0, 0.0], loads[0..2].to_vec(), loads[2..4].to_vec()];
        let opts = MpdcopfOptions { soft_limits: soft, ..Default::default() };
        let problem = build_problem(&net, demand.clone(), full_availability(&net, 2), opts, None).unwrap();
        let sol = solve(&problem).unwrap();
        prop_assert!(sol.is_optimal());
        for t in 0..2 {
            let gen: f64 = sol.dispatch.iter().map(|r| r[t]).sum();
            let load: f64 = demand.iter().map(|r| r[t]).sum();
            let shed: f64 = sol.shed.iter().map(|r| r[t]).sum();
            prop_assert!((gen - (load - shed)).abs() <= 1e-6);
            if !soft {
                for (l, br) in net.branches.iter().enumerate() {
                    prop_assert!(sol.flows[l][t].abs() <= br.capacity + 1e-6);
                    if sol.mu[l][t] > 1e-6 {
                        prop_assert!((sol.flows[l][t].abs() - br.capacity).abs() <= 1e-6);
                    }
                }
            }
        }
    }

    #[test]
    fn more_capacity_never_costs_more(
        caps in prop::collection::vec(5.0..200.0f64, 3),
        loads in prop::collection::vec(0.0..150.0f64, 4),
        which in 0..3usize,
        extra in 0.0..100.0f64,
    ) {
        let demand = vec![vec![0.0], vec![loads[0]], vec![loads[1]]];
        let objective = |caps: &[f64]| {
            let net = random_dispatch_case(caps, &loads);
            let p = build_problem(&net, demand.clone(), full_availability(&net, 1), MpdcopfOptions::default(), None).unwrap();
            let s = solve(&p).unwrap();
            (s.objective, s.mu.iter().map(|r| r[0]).collect::<Vec<f64>>())
        };
        let (base, mu) = objective(&caps);
        let mut raised = caps.clone();
        raised[which] += extra;
        let (after, _) = objective(&raised);
        prop_assert!(after <= base + 1e-6 * base.abs().max(1.0));
        if mu[which] <= 1e-9 {
            prop_assert!((after - base).abs() <= 1e-6 * base.abs().max(1.0));
        }
    }

    #[test]
    fn aggregation_matches_hourly_dispatch(loads in prop::collection::vec(10.0..150.0f64, 8)) {
        let net = random_dispatch_case(&[500.0, 500.0, 500.0], &loads);
        let profiles = demand_only(vec![(2, loads[..4].to_vec()), (3, loads[4..].to_vec()), (1, vec![0.0; 4])]);
        let plan = plan_windows(4, 2).unwrap();
        let log = run_rolling_horizon(&net, &profiles, &plan, &HarnessOptions::default()).unwrap();
        let table = aggregate_generation(&log, &net);
        let total_mwh: f64 = log.solutions().flat_map(|s| s.dispatch.iter().flatten()).sum();
        let total_twh: f64 = table.0.values().sum();
        prop_assert!((total_twh * 1e6 - total_mwh).abs() <= 1e-9 * total_mwh);
        let hours: Vec<usize> = log.windows.iter().flat_map(|w| w.hours.clone()).collect();
        prop_assert_eq!(hours, (0..4).collect::<Vec<_>>());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn calibration_keeps_unit_ratios(
        units in prop::collection::vec((1.0..500.0f64, 0.0..0.5f64, 0.1..1.0f64, 1.0..60.0f64), 1..8),
        target_cap in 1.0..3000.0f64,
        target_price in 1.0..90.0f64,
    ) {
        let gens = units
            .iter()
            .enumerate()
            .map(|(i, &(p_max, frac, ramp, mc))| {
                let mut g = gen(i as u32 + 1, 1, Fuel::NaturalGas, p_max, mc);
                g.p_min = p_max * frac;
                g.ramp_limit = p_max * ramp;
                g.no_load_cost = mc * 2.0;
                g.cost_curve = CostCurve::new(vec![g.p_min, (g.p_min + p_max) / 2.0, p_max], vec![mc, mc * 1.3]).unwrap();
                g
            })
            .collect();
        let net = network(vec![bus(1)], vec![], gens);
        let targets = vec![CalibrationTarget {
            state: "AZ".into(),
            fuel: Fuel::NaturalGas,
            interconnection: None,
            target_capacity: target_cap,
            target_avg_price: target_price,
        }];
        let (scaled, _) = scale_generators_to_targets(&net, &targets).unwrap();
        let (priced, _) = calibrate_fuel_costs(&scaled, &targets).unwrap();
        let cap: f64 = priced.generators.iter().map(|g| g.p_max).sum();
        prop_assert!((cap - target_cap).abs() <= 1e-9 * target_cap);
        let refs: Vec<&_> = priced.generators.iter().collect();
        let price = group_average_price(&refs).unwrap();
        prop_assert!((price - target_price).abs() <= 1e-9 * target_price);
        for (a, b) in net.generators.iter().zip(&priced.generators) {
            for (x, y) in [(a.p_min, b.p_min), (a.ramp_limit, b.ramp_limit), (a.no_load_cost, b.no_load_cost)] {
                prop_assert!((y / b.p_max - x / a.p_max).abs() <= 1e-12 * (x / a.p_max).max(1e-300));
            }
            prop_assert!(b.cost_curve.is_convex());
        }
        let (again, _) = scale_generators_to_targets(&priced, &targets).unwrap();
        let (again, _) = calibrate_fuel_costs(&again, &targets).unwrap();
        for (a, b) in priced.generators.iter().zip(&again.generators) {
            prop_assert!((a.p_max - b.p_max).abs() <= 1e-9 * a.p_max);
            for (x, y) in a.cost_curve.marginal_costs.iter().zip(&b.cost_curve.marginal_costs) {
                prop_assert!((x - y).abs() <= 1e-9 * x.abs());
            }
        }
    }

    #[test]
    fn spur_matching_never_lowers_capacity(
        spur_cap in 0.0..400.0f64,
        p_max in 1.0..400.0f64,
        mesh_cap in 0.0..400.0f64,
    ) {
        let mut b3 = bus(3);
        b3.demand_participation = false;
        let mut spur = line(2, 2, 3, 0.1, spur_cap);
        spur.is_spur = true;
        let net = network(
            vec![bus(1), bus(2), b3],
            vec![line(1, 1, 2, 0.1, mesh_cap), spur],
            vec![gen(1, 3, Fuel::Wind, p_max, 0.0)],
        );
        let out = match_spur_capacity(&net).unwrap();
        for (a, b) in net.branches.iter().zip(&out.branches) {
            prop_assert!(b.capacity >= a.capacity);
        }
        prop_assert!(out.branches[1].capacity >= p_max);
    }

    #[test]
    fn revision_is_bounded_and_fixes_matches(
        entries in prop::collection::vec((0..4usize, 0.0..100.0f64, 0.0..100.0f64), 0..12),
        cap in 0.01..0.5f64,
        beta in 0.0..10.0f64,
    ) {
        let states = ["AZ", "NM", "CA", "NV"];
        let mut sim = BTreeMap::new();
        let mut hist = BTreeMap::new();
        for (s, a, b) in &entries {
            sim.insert((states[*s].to_string(), Fuel::Coal), *a);
            hist.insert((states[*s].to_string(), Fuel::Coal), *b);
        }
        let (sim, hist) = (GenerationTable(sim), GenerationTable(hist));
        let net = network(vec![bus(1)], vec![], vec![gen(1, 1, Fuel::Coal, 100.0, 20.0)]);
        let rule = RevisionRule { cap, beta };
        let (_, m) = revise_costs(&net, &compare(&sim, &hist), rule).unwrap();
        prop_assert!(m.values().all(|v| *v >= 1.0 - cap && *v <= 1.0 + cap));
        let (same, m) = revise_costs(&net, &compare(&sim, &sim), rule).unwrap();
        prop_assert!(m.values().all(|v| *v == 1.0));
        prop_assert_eq!(same, net);
        let (ab, ba) = (compare(&sim, &hist), compare(&hist, &sim));
        prop_assert_eq!(ab.euclidean, ba.euclidean);
        prop_assert_eq!(ab.sum_abs, ba.sum_abs);
    }

    #[test]
    fn upgrades_only_raise_the_reported_branches(
        caps in prop::collection::vec(0.0..500.0f64, 4),
        reqs in prop::collection::btree_map(1..5u32, 0.0..300.0f64, 0..4),
    ) {
        let net = network(
            (1..=5).map(bus).collect(),
            caps.iter().enumerate().map(|(i, c)| line(i as u32 + 1, i as u32 + 1, i as u32 + 2, 0.1, *c)).collect(),
            vec![],
        );
        let reqs: Vec<(BranchId, f64)> = reqs.into_iter().map(|(b, v)| (BranchId(b), v)).collect();
        let (out, records) = apply_upgrades(&net, &reqs);
        let reported: Vec<BranchId> = records.iter().map(|r| r.branch).collect();
        for (a, b) in net.branches.iter().zip(&out.branches) {
            prop_assert!(b.capacity >= a.capacity);
            if b.capacity != a.capacity {
                prop_assert!(reported.contains(&a.id));
            }
        }
        prop_assert_eq!(reported.len(), reqs.len());
    }
}
