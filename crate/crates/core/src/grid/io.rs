//! Case directory reader and writer.
//!
//! A case is five CSV files: `bus.csv`, `branch.csv`, `dcline.csv`,
//! `gen.csv` and `zone.csv`. Generator cost and heat-rate curves are stored
//! as a JSON object in the `curve_json` column.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    validate_network, Branch, Bus, CostCurve, DcLine, Generator, Network, NetworkError, PwlCurve,
    Zone, DEFAULT_BASE_MVA,
};
use crate::table::{write_err, writer, Table, TableError};

const BUS_COLUMNS: &[&str] = &[
    "id",
    "zone_id",
    "state",
    "base_kv",
    "population_weight",
    "demand_participation",
];
const BRANCH_COLUMNS: &[&str] = &[
    "id",
    "from",
    "to",
    "reactance_pu",
    "capacity_mw",
    "kind",
    "is_spur",
];
const DCLINE_COLUMNS: &[&str] = &["id", "from", "to", "capacity_mw"];
const GEN_COLUMNS: &[&str] = &[
    "id",
    "bus",
    "fuel",
    "state",
    "p_min_mw",
    "p_max_mw",
    "ramp_mw_per_h",
    "no_load_cost",
    "curve_json",
    "co2_rate",
];
const ZONE_COLUMNS: &[&str] = &["zone_id", "name", "interconnection"];

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveJson {
    breakpoints: Vec<f64>,
    marginal_costs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    heat_rate: Option<Vec<(f64, f64)>>,
}

/// Reads and validates a case directory.
pub fn load_network(dir: &Path) -> Result<Network, NetworkError> {
    let zones = read_zones(&dir.join("zone.csv"))?;
    let buses = read_buses(&dir.join("bus.csv"))?;
    let branches = read_branches(&dir.join("branch.csv"))?;
    let dc_lines = read_dc_lines(&dir.join("dcline.csv"))?;
    let generators = read_generators(&dir.join("gen.csv"))?;

    let bus_ids: HashSet<_> = buses.iter().map(|b| b.id).collect();
    let dangling = |kind: &str, id: u32, bus: super::BusId| {
        (!bus_ids.contains(&bus))
            .then(|| NetworkError::Integrity(format!("{kind} {id} → bus {bus}")))
    };
    for br in &branches {
        for end in [br.from, br.to] {
            if let Some(e) = dangling("branch", br.id.0, end) {
                return Err(e);
            }
        }
    }
    for dc in &dc_lines {
        for end in [dc.from, dc.to] {
            if let Some(e) = dangling("dcline", dc.id.0, end) {
                return Err(e);
            }
        }
    }
    for g in &generators {
        if let Some(e) = dangling("gen", g.id.0, g.bus) {
            return Err(e);
        }
    }

    let network = Network {
        base_mva: DEFAULT_BASE_MVA,
        buses,
        branches,
        dc_lines,
        generators,
        zones,
    };
    let violations = validate_network(&network);
    if !violations.is_empty() {
        return Err(NetworkError::Invalid(violations));
    }
    Ok(network)
}

fn read_zones(path: &Path) -> Result<BTreeMap<super::ZoneId, Zone>, TableError> {
    let table = Table::read(path, ZONE_COLUMNS, &[])?;
    let mut zones = BTreeMap::new();
    for row in table.rows() {
        let zone = Zone {
            id: row.get("zone_id")?,
            name: row.get("name")?,
            interconnection: row.get("interconnection")?,
        };
        if zones.insert(zone.id, zone).is_some() {
            return Err(row.error("zone_id", "duplicate zone id"));
        }
    }
    Ok(zones)
}

fn read_buses(path: &Path) -> Result<Vec<Bus>, TableError> {
    let table = Table::read(path, BUS_COLUMNS, &[])?;
    table
        .rows()
        .map(|row| {
            Ok(Bus {
                id: row.get("id")?,
                zone: row.get("zone_id")?,
                state: row.get("state")?,
                base_kv: row.get("base_kv")?,
                population_weight: row.get("population_weight")?,
                demand_participation: row.get_bool("demand_participation")?,
            })
        })
        .collect()
}

fn read_branches(path: &Path) -> Result<Vec<Branch>, TableError> {
    let table = Table::read(path, BRANCH_COLUMNS, &[])?;
    table
        .rows()
        .map(|row| {
            Ok(Branch {
                id: row.get("id")?,
                from: row.get("from")?,
                to: row.get("to")?,
                reactance: row.get("reactance_pu")?,
                capacity: row.get("capacity_mw")?,
                kind: row.get("kind")?,
                is_spur: row.get_bool("is_spur")?,
            })
        })
        .collect()
}

fn read_dc_lines(path: &Path) -> Result<Vec<DcLine>, TableError> {
    let table = Table::read(path, DCLINE_COLUMNS, &[])?;
    table
        .rows()
        .map(|row| {
            Ok(DcLine {
                id: row.get("id")?,
                from: row.get("from")?,
                to: row.get("to")?,
                capacity: row.get("capacity_mw")?,
            })
        })
        .collect()
}

fn read_generators(path: &Path) -> Result<Vec<Generator>, TableError> {
    let table = Table::read(path, GEN_COLUMNS, &[])?;
    table
        .rows()
        .map(|row| {
            let raw: String = row.get("curve_json")?;
            let curves: CurveJson =
                serde_json::from_str(&raw).map_err(|e| row.error("curve_json", e))?;
            let cost_curve = CostCurve::new(curves.breakpoints, curves.marginal_costs)
                .map_err(|e| row.error("curve_json", e))?;
            let heat_rate = curves
                .heat_rate
                .map(PwlCurve::new)
                .transpose()
                .map_err(|e| row.error("curve_json", format!("heat_rate: {e}")))?;
            Ok(Generator {
                id: row.get("id")?,
                bus: row.get("bus")?,
                fuel: row.get("fuel")?,
                state: row.get("state")?,
                p_min: row.get("p_min_mw")?,
                p_max: row.get("p_max_mw")?,
                ramp_limit: row.get("ramp_mw_per_h")?,
                cost_curve,
                no_load_cost: row.get("no_load_cost")?,
                co2_rate: row.get("co2_rate")?,
                heat_rate,
            })
        })
        .collect()
}

/// Writes `network` using the same schema [`load_network`] reads.
pub fn write_network(network: &Network, dir: &Path) -> Result<(), TableError> {
    std::fs::create_dir_all(dir).map_err(|source| TableError::Io {
        path: dir.to_path_buf(),
        source,
    })?;

    let path = dir.join("zone.csv");
    let mut w = writer(&path)?;
    w.write_record(ZONE_COLUMNS).map_err(|e| write_err(&path, e))?;
    for z in network.zones.values() {
        w.write_record([z.id.to_string(), z.name.clone(), z.interconnection.clone()])
            .map_err(|e| write_err(&path, e))?;
    }
    w.flush().map_err(|e| write_err(&path, e.into()))?;

    let path = dir.join("bus.csv");
    let mut w = writer(&path)?;
    w.write_record(BUS_COLUMNS).map_err(|e| write_err(&path, e))?;
    for b in &network.buses {
        w.write_record([
            b.id.to_string(),
            b.zone.to_string(),
            b.state.clone(),
            b.base_kv.to_string(),
            b.population_weight.to_string(),
            b.demand_participation.to_string(),
        ])
        .map_err(|e| write_err(&path, e))?;
    }
    w.flush().map_err(|e| write_err(&path, e.into()))?;

    let path = dir.join("branch.csv");
    let mut w = writer(&path)?;
    w.write_record(BRANCH_COLUMNS)
        .map_err(|e| write_err(&path, e))?;
    for br in &network.branches {
        w.write_record([
            br.id.to_string(),
            br.from.to_string(),
            br.to.to_string(),
            br.reactance.to_string(),
            br.capacity.to_string(),
            br.kind.as_str().to_string(),
            br.is_spur.to_string(),
        ])
        .map_err(|e| write_err(&path, e))?;
    }
    w.flush().map_err(|e| write_err(&path, e.into()))?;

    let path = dir.join("dcline.csv");
    let mut w = writer(&path)?;
    w.write_record(DCLINE_COLUMNS)
        .map_err(|e| write_err(&path, e))?;
    for dc in &network.dc_lines {
        w.write_record([
            dc.id.to_string(),
            dc.from.to_string(),
            dc.to.to_string(),
            dc.capacity.to_string(),
        ])
        .map_err(|e| write_err(&path, e))?;
    }
    w.flush().map_err(|e| write_err(&path, e.into()))?;

    let path = dir.join("gen.csv");
    let mut w = writer(&path)?;
    w.write_record(GEN_COLUMNS).map_err(|e| write_err(&path, e))?;
    for g in &network.generators {
        let curve = CurveJson {
            breakpoints: g.cost_curve.breakpoints.clone(),
            marginal_costs: g.cost_curve.marginal_costs.clone(),
            heat_rate: g.heat_rate.as_ref().map(|h| h.points.clone()),
        };
        let curve = serde_json::to_string(&curve).expect("curve serializes");
        w.write_record([
            g.id.to_string(),
            g.bus.to_string(),
            g.fuel.as_str().to_string(),
            g.state.clone(),
            g.p_min.to_string(),
            g.p_max.to_string(),
            g.ramp_limit.to_string(),
            g.no_load_cost.to_string(),
            curve,
            g.co2_rate.to_string(),
        ])
        .map_err(|e| write_err(&path, e))?;
    }
    w.flush().map_err(|e| write_err(&path, e.into()))?;
    Ok(())
}
