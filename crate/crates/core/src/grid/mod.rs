//! Static network data model: buses, AC branches, HVDC lines, generators
//! with piecewise-linear cost and heat-rate curves, and the zone table.

mod curve;
mod io;
mod validate;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use curve::{CostCurve, CurveError, EmissionsCurve, PwlCurve};
pub use io::{load_network, write_network};
pub use validate::{connected_components, validate_network, Entity, Violation};

use crate::table::TableError;

/// Per-unit power base used when a case does not specify one.
pub const DEFAULT_BASE_MVA: f64 = 100.0;

macro_rules! id_type {
    ($name:ident, $label:literal) => {
        #[derive(
            Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }

        impl FromStr for $name {
            type Err = std::num::ParseIntError;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                s.parse().map($name)
            }
        }

        impl $name {
            pub const LABEL: &'static str = $label;
        }
    };
}

id_type!(BusId, "bus");
id_type!(BranchId, "branch");
id_type!(DcLineId, "dcline");
id_type!(GenId, "gen");
id_type!(ZoneId, "zone");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fuel {
    Coal,
    NaturalGas,
    FuelOil,
    Nuclear,
    Hydro,
    Wind,
    Solar,
    Geothermal,
    Other,
}

impl Fuel {
    pub const ALL: [Fuel; 9] = [
        Fuel::Coal,
        Fuel::NaturalGas,
        Fuel::FuelOil,
        Fuel::Nuclear,
        Fuel::Hydro,
        Fuel::Wind,
        Fuel::Solar,
        Fuel::Geothermal,
        Fuel::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Fuel::Coal => "coal",
            Fuel::NaturalGas => "natural_gas",
            Fuel::FuelOil => "fuel_oil",
            Fuel::Nuclear => "nuclear",
            Fuel::Hydro => "hydro",
            Fuel::Wind => "wind",
            Fuel::Solar => "solar",
            Fuel::Geothermal => "geothermal",
            Fuel::Other => "other",
        }
    }

    /// Output is bounded hour by hour by an exogenous availability profile.
    pub fn is_profiled(self) -> bool {
        matches!(self, Fuel::Hydro | Fuel::Wind | Fuel::Solar)
    }

    /// Variable renewables whose bus prices drive the congestion upgrade loop.
    pub fn is_variable_renewable(self) -> bool {
        matches!(self, Fuel::Wind | Fuel::Solar)
    }

    /// Units dispatched at or above `p_min` in every hour.
    pub fn is_must_run(self) -> bool {
        matches!(self, Fuel::Nuclear | Fuel::Geothermal)
    }
}

impl fmt::Display for Fuel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Fuel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Fuel::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| format!("unknown fuel `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchKind {
    Line,
    Transformer,
    TransformerWinding,
}

impl BranchKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BranchKind::Line => "line",
            BranchKind::Transformer => "transformer",
            BranchKind::TransformerWinding => "transformer_winding",
        }
    }
}

impl FromStr for BranchKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "line" => Ok(BranchKind::Line),
            "transformer" => Ok(BranchKind::Transformer),
            "transformer_winding" => Ok(BranchKind::TransformerWinding),
            _ => Err(format!("unknown branch kind `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: BusId,
    pub zone: ZoneId,
    pub state: String,
    pub base_kv: f64,
    /// Population proxy used to split zonal demand across buses.
    pub population_weight: f64,
    pub demand_participation: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub id: BranchId,
    pub from: BusId,
    pub to: BusId,
    /// Series reactance in per unit on the network base.
    pub reactance: f64,
    pub capacity: f64,
    pub kind: BranchKind,
    /// Radial tie between a generator cluster and the meshed grid.
    pub is_spur: bool,
}

/// Lossless controllable transfer between two buses.
#[derive(Debug, Clone, PartialEq)]
pub struct DcLine {
    pub id: DcLineId,
    pub from: BusId,
    pub to: BusId,
    pub capacity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub id: GenId,
    pub bus: BusId,
    pub fuel: Fuel,
    pub state: String,
    pub p_min: f64,
    pub p_max: f64,
    /// Maximum change in output between consecutive hours, MW/h.
    pub ramp_limit: f64,
    pub cost_curve: CostCurve,
    /// Currency per hour while online.
    pub no_load_cost: f64,
    /// Tons of CO2 per MMBtu of fuel burned.
    pub co2_rate: f64,
    /// Fuel input in MMBtu/h as a function of output in MW.
    pub heat_rate: Option<PwlCurve>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Zone {
    pub id: ZoneId,
    pub name: String,
    pub interconnection: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub dc_lines: Vec<DcLine>,
    pub generators: Vec<Generator>,
    pub zones: BTreeMap<ZoneId, Zone>,
}

impl Network {
    pub fn bus_index(&self) -> HashMap<BusId, usize> {
        self.buses.iter().enumerate().map(|(i, b)| (b.id, i)).collect()
    }

    pub fn bus(&self, id: BusId) -> Option<&Bus> {
        self.buses.iter().find(|b| b.id == id)
    }

    pub fn branch(&self, id: BranchId) -> Option<&Branch> {
        self.branches.iter().find(|b| b.id == id)
    }

    pub fn branch_mut(&mut self, id: BranchId) -> Option<&mut Branch> {
        self.branches.iter_mut().find(|b| b.id == id)
    }

    pub fn generator(&self, id: GenId) -> Option<&Generator> {
        self.generators.iter().find(|g| g.id == id)
    }

    /// Interconnection a bus belongs to through its zone.
    pub fn interconnection_of(&self, bus: BusId) -> Option<&str> {
        let zone = self.bus(bus)?.zone;
        self.zones.get(&zone).map(|z| z.interconnection.as_str())
    }

    /// Sorted, de-duplicated interconnection names from the zone table.
    pub fn interconnections(&self) -> Vec<String> {
        let mut names: Vec<String> = self
            .zones
            .values()
            .map(|z| z.interconnection.clone())
            .collect();
        names.sort();
        names.dedup();
        names
    }

    /// Lowest bus id of every interconnection; its angle is pinned to zero.
    pub fn reference_buses(&self) -> BTreeMap<String, BusId> {
        let mut refs: BTreeMap<String, BusId> = BTreeMap::new();
        for bus in &self.buses {
            if let Some(ic) = self.zones.get(&bus.zone).map(|z| &z.interconnection) {
                refs.entry(ic.clone())
                    .and_modify(|r| *r = (*r).min(bus.id))
                    .or_insert(bus.id);
            }
        }
        refs
    }
}

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error("network failed validation: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error, PartialEq)]
#[error("unknown interconnection `{0}`")]
pub struct UnknownInterconnection(pub String);
