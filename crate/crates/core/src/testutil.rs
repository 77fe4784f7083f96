//! Small hand-built networks shared by unit tests.

use std::collections::BTreeMap;

use crate::grid::{
    Branch, BranchId, BranchKind, Bus, BusId, CostCurve, Fuel, Generator, GenId, Network, Zone,
    ZoneId, DEFAULT_BASE_MVA,
};

pub fn bus(id: u32) -> Bus {
    Bus {
        id: BusId(id),
        zone: ZoneId(1),
        state: "TX".into(),
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
        state: "TX".into(),
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
    let mut zones = BTreeMap::new();
    zones.insert(
        ZoneId(1),
        Zone {
            id: ZoneId(1),
            name: "north".into(),
            interconnection: "texas".into(),
        },
    );
    Network {
        base_mva: DEFAULT_BASE_MVA,
        buses,
        branches,
        dc_lines: Vec::new(),
        generators,
        zones,
    }
}

/// Cheap unit at bus 1, expensive unit and 80 MW of demand at bus 2,
/// joined by one 50 MW line.
pub fn two_bus_congested() -> Network {
    network(
        vec![bus(1), bus(2)],
        vec![line(1, 1, 2, 0.1, 50.0)],
        vec![
            gen(1, 1, Fuel::Coal, 100.0, 10.0),
            gen(2, 2, Fuel::NaturalGas, 100.0, 30.0),
        ],
    )
}
