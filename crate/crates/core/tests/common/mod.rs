#![allow(dead_code)]

use std::collections::BTreeMap;

use chrono::{DateTime, TimeZone, Utc};
use gridsynth::grid::{
    Branch, BranchId, BranchKind, Bus, BusId, CostCurve, Fuel, GenId, Generator, Network, Zone,
    ZoneId,
};
use gridsynth::harness::Profiles;
use gridsynth::timeseries::{HourlyProfile, Unit};

pub fn bus(id: u32) -> Bus {
    Bus {
        id: BusId(id),
        zone: ZoneId(1),
        state: "AZ".into(),
        base_kv: 230.0,
        population_weight: 1.0,
        demand_participation: true,
    }
}

pub fn line(id: u32, from: u32, to: u32, reactance: f64, capacity: f64) -> Branch {
    Branch {
        id: BranchId(id),
        from: BusId(from),
        to: BusId(to),
        reactance,
        capacity,
        kind: BranchKind::Line,
        is_spur: false,
    }
}

pub fn gen(id: u32, bus: u32, fuel: Fuel, p_max: f64, cost: f64) -> Generator {
    Generator {
        id: GenId(id),
        bus: BusId(bus),
        fuel,
        state: "AZ".into(),
        p_min: 0.0,
        p_max,
        ramp_limit: p_max,
        cost_curve: CostCurve::flat(0.0, p_max, cost),
        no_load_cost: 0.0,
        co2_rate: 0.0,
        heat_rate: None,
    }
}

pub fn network(buses: Vec<Bus>, branches: Vec<Branch>, generators: Vec<Generator>) -> Network {
    let zone = Zone {
        id: ZoneId(1),
        name: "desert".into(),
        interconnection: "western".into(),
    };
    Network {
        base_mva: 100.0,
        buses,
        branches,
        dc_lines: Vec::new(),
        generators,
        zones: [(ZoneId(1), zone)].into_iter().collect(),
    }
}

pub fn start() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2016, 1, 4, 0, 0, 0).unwrap()
}

pub fn profile(values: Vec<f64>) -> HourlyProfile {
    HourlyProfile::new(start(), values, Unit::Mw).unwrap()
}

pub fn demand_only(entries: Vec<(u32, Vec<f64>)>) -> Profiles {
    Profiles {
        demand: entries.into_iter().map(|(b, d)| (BusId(b), profile(d))).collect(),
        availability: BTreeMap::new(),
    }
}
