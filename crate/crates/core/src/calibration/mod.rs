//! Static data adjustments: fleet capacity scaling to state totals, cost
//! calibration to average energy prices, emissions curves, geothermal
//! ratings and spur-line capacities.

mod spur;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use thiserror::Error;

use crate::grid::{CostCurve, EmissionsCurve, Fuel, Generator, Network, PwlCurve};
use crate::table::{Table, TableError};
use crate::timeseries::HourlyProfile;

pub use spur::match_spur_capacity;

/// Capacity and price target of one (state, fuel) group, optionally
/// restricted to the part of the state inside one interconnection.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationTarget {
    pub state: String,
    pub fuel: Fuel,
    pub interconnection: Option<String>,
    pub target_capacity: f64,
    pub target_avg_price: f64,
}

impl CalibrationTarget {
    fn label(&self) -> String {
        match &self.interconnection {
            Some(ic) => format!("{}/{}/{}", self.state, ic, self.fuel),
            None => format!("{}/{}", self.state, self.fuel),
        }
    }

    fn matches(&self, network: &Network, g: &Generator) -> bool {
        g.state == self.state
            && g.fuel == self.fuel
            && self
                .interconnection
                .as_deref()
                .is_none_or(|ic| network.interconnection_of(g.bus) == Some(ic))
    }

    fn members(&self, network: &Network) -> Vec<usize> {
        (0..network.generators.len())
            .filter(|&i| self.matches(network, &network.generators[i]))
            .collect()
    }
}

/// Factor applied to one group by a calibration step.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupFactor {
    pub group: String,
    pub generators: usize,
    /// `None` when the group's curves were replaced rather than scaled.
    pub factor: Option<f64>,
}

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("no generators for target {0}")]
    NoGeneratorsForTarget(String),
    #[error("group {0} has zero capacity but a positive target")]
    ZeroGroupCapacity(String),
    #[error("group {0} has a negative average price")]
    NegativeCurrentPrice(String),
    #[error("target {0} appears more than once")]
    DuplicateTarget(String),
    #[error("invalid target {0}: values must be finite and ≥ 0")]
    InvalidTarget(String),
    #[error("heat-rate curve covers [{lo}, {hi}] MW but the unit runs on [{p_min}, {p_max}] MW")]
    DomainMismatch {
        lo: f64,
        hi: f64,
        p_min: f64,
        p_max: f64,
    },
    #[error("CO2 rate must be finite and ≥ 0")]
    NegativeRate,
    #[error("generation profile is empty")]
    EmptyProfile,
    #[error("generation profile has a negative value at hour {0}")]
    NegativeGeneration(usize),
    #[error("branch {0} is flagged as a spur but does not isolate a generator-only subnetwork")]
    SpurTopologyError(crate::grid::BranchId),
    #[error(transparent)]
    Table(#[from] TableError),
}

fn check_targets(targets: &[CalibrationTarget]) -> Result<(), CalibrationError> {
    let mut seen = BTreeSet::new();
    for t in targets {
        if !seen.insert(t.label()) {
            return Err(CalibrationError::DuplicateTarget(t.label()));
        }
        let values = [t.target_capacity, t.target_avg_price];
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(CalibrationError::InvalidTarget(t.label()));
        }
    }
    Ok(())
}

/// Multiplies each targeted group's ratings by `target / current capacity`.
///
/// `p_min`, ramp limit, no-load cost, cost breakpoints and the heat-rate
/// curve (both axes) follow the same factor, so per-unit quantities and
/// marginal costs are unchanged.
pub fn scale_generators_to_targets(
    network: &Network,
    targets: &[CalibrationTarget],
) -> Result<(Network, Vec<GroupFactor>), CalibrationError> {
    check_targets(targets)?;
    let mut out = network.clone();
    let mut factors = Vec::new();
    for t in targets {
        let members = t.members(network);
        if members.is_empty() {
            if t.target_capacity > 0.0 {
                return Err(CalibrationError::NoGeneratorsForTarget(t.label()));
            }
            continue;
        }
        let current: f64 = members.iter().map(|&i| network.generators[i].p_max).sum();
        if current <= 0.0 {
            if t.target_capacity > 0.0 {
                return Err(CalibrationError::ZeroGroupCapacity(t.label()));
            }
            continue;
        }
        let f = t.target_capacity / current;
        for &i in &members {
            scale_generator(&mut out.generators[i], f);
        }
        factors.push(GroupFactor {
            group: t.label(),
            generators: members.len(),
            factor: Some(f),
        });
    }
    Ok((out, factors))
}

fn scale_generator(g: &mut Generator, f: f64) {
    g.p_min *= f;
    g.p_max *= f;
    g.ramp_limit *= f;
    g.no_load_cost *= f;
    if f > 0.0 {
        g.cost_curve.scale_breakpoints(f);
        if let Some(h) = &mut g.heat_rate {
            h.scale_x(f);
            h.scale_y(f);
        }
    } else {
        g.cost_curve = CostCurve::flat(0.0, 0.0, 0.0);
        g.heat_rate = None;
    }
}

/// Capacity-weighted mean of the generators' average marginal costs.
pub fn group_average_price(generators: &[&Generator]) -> Option<f64> {
    let cap: f64 = generators.iter().map(|g| g.p_max).sum();
    if cap <= 0.0 {
        return None;
    }
    let weighted: f64 = generators
        .iter()
        .map(|g| g.p_max * g.cost_curve.mean_marginal_cost())
        .sum();
    Some(weighted / cap)
}

/// Scales every marginal cost of each targeted group so the group's
/// capacity-weighted average price hits the target. A group priced at
/// exactly zero gets flat curves at the target price instead.
pub fn calibrate_fuel_costs(
    network: &Network,
    targets: &[CalibrationTarget],
) -> Result<(Network, Vec<GroupFactor>), CalibrationError> {
    check_targets(targets)?;
    let mut out = network.clone();
    let mut factors = Vec::new();
    for t in targets {
        let members = t.members(network);
        if members.is_empty() {
            if t.target_capacity > 0.0 {
                return Err(CalibrationError::NoGeneratorsForTarget(t.label()));
            }
            continue;
        }
        let gens: Vec<&Generator> = members.iter().map(|&i| &network.generators[i]).collect();
        let current = group_average_price(&gens)
            .ok_or_else(|| CalibrationError::ZeroGroupCapacity(t.label()))?;
        let g = if current == 0.0 {
            if t.target_avg_price == 0.0 {
                continue;
            }
            for &i in &members {
                let gen = &mut out.generators[i];
                gen.cost_curve =
                    CostCurve::flat(gen.cost_curve.start(), gen.cost_curve.end(), t.target_avg_price);
            }
            log::info!("{}: zero-priced curves replaced at {}", t.label(), t.target_avg_price);
            None
        } else if current < 0.0 {
            return Err(CalibrationError::NegativeCurrentPrice(t.label()));
        } else {
            let g = t.target_avg_price / current;
            for &i in &members {
                out.generators[i].cost_curve.scale_costs(g);
            }
            Some(g)
        };
        factors.push(GroupFactor {
            group: t.label(),
            generators: members.len(),
            factor: g,
        });
    }
    Ok((out, factors))
}

/// CO2 output curve `co2_rate × heat_rate(p)` on the heat-rate breakpoints.
pub fn derive_emissions_curve(
    g: &Generator,
    heat_rate_curve: &PwlCurve,
    co2_rate: f64,
) -> Result<EmissionsCurve, CalibrationError> {
    if !(co2_rate >= 0.0) || !co2_rate.is_finite() {
        return Err(CalibrationError::NegativeRate);
    }
    let (lo, hi) = heat_rate_curve.domain();
    if lo > g.p_min || hi < g.p_max {
        return Err(CalibrationError::DomainMismatch {
            lo,
            hi,
            p_min: g.p_min,
            p_max: g.p_max,
        });
    }
    let mut emissions = heat_rate_curve.clone();
    emissions.scale_y(co2_rate);
    Ok(EmissionsCurve {
        co2_rate,
        heat_rate_curve: heat_rate_curve.clone(),
        emissions,
    })
}

/// Geothermal ratings from a year of output: `p_max` is the mean and
/// `p_min` is 95% of it.
pub fn set_geothermal_ratings(
    annual_generation: &HourlyProfile,
) -> Result<(f64, f64), CalibrationError> {
    if annual_generation.values.is_empty() {
        return Err(CalibrationError::EmptyProfile);
    }
    if let Some(i) = annual_generation.values.iter().position(|v| *v < 0.0) {
        return Err(CalibrationError::NegativeGeneration(i));
    }
    let p_max = annual_generation.mean();
    Ok((p_max, 0.95 * p_max))
}

/// `targets.csv`: state, fuel, interconnection (optional column or empty
/// cell), target_capacity_mw, target_avg_price.
pub fn read_targets(path: &Path) -> Result<Vec<CalibrationTarget>, CalibrationError> {
    let table = Table::read(
        path,
        &["state", "fuel", "target_capacity_mw", "target_avg_price"],
        &["interconnection"],
    )?;
    let mut out = Vec::with_capacity(table.len());
    for row in table.rows() {
        out.push(CalibrationTarget {
            state: row.get("state")?,
            fuel: row.get("fuel")?,
            interconnection: row.get_opt("interconnection")?,
            target_capacity: row.get("target_capacity_mw")?,
            target_avg_price: row.get("target_avg_price")?,
        });
    }
    check_targets(&out)?;
    Ok(out)
}

/// Current capacity and average price of every (state, fuel) group present
/// in the network.
pub fn group_summary(network: &Network) -> BTreeMap<(String, Fuel), (f64, f64)> {
    let mut groups: BTreeMap<(String, Fuel), Vec<&Generator>> = BTreeMap::new();
    for g in &network.generators {
        groups.entry((g.state.clone(), g.fuel)).or_default().push(g);
    }
    groups
        .into_iter()
        .map(|(k, gens)| {
            let cap = gens.iter().map(|g| g.p_max).sum();
            (k, (cap, group_average_price(&gens).unwrap_or(0.0)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{bus, gen, network};
    use crate::timeseries::Unit;
    use chrono::{TimeZone, Utc};

    fn target(fuel: Fuel, cap: f64, price: f64) -> CalibrationTarget {
        CalibrationTarget {
            state: "TX".into(),
            fuel,
            interconnection: None,
            target_capacity: cap,
            target_avg_price: price,
        }
    }

    #[test]
    fn doubling_a_group() {
        let mut a = gen(1, 1, Fuel::Coal, 60.0, 20.0);
        a.p_min = 10.0;
        a.ramp_limit = 30.0;
        a.no_load_cost = 5.0;
        a.cost_curve = CostCurve::flat(10.0, 60.0, 20.0);
        let n = network(
            vec![bus(1)],
            vec![],
            vec![a, gen(2, 1, Fuel::Coal, 40.0, 25.0), gen(3, 1, Fuel::Wind, 9.0, 0.0)],
        );
        let (out, f) = scale_generators_to_targets(&n, &[target(Fuel::Coal, 200.0, 0.0)]).unwrap();
        assert_eq!(f[0].factor, Some(2.0));
        let g = &out.generators[0];
        assert_eq!((g.p_min, g.p_max, g.ramp_limit, g.no_load_cost), (20.0, 120.0, 60.0, 10.0));
        assert_eq!(g.cost_curve.breakpoints, vec![20.0, 120.0]);
        assert_eq!(g.cost_curve.marginal_costs, vec![20.0]);
        assert_eq!(out.generators[1].p_max, 80.0);
        assert_eq!(out.generators[2], n.generators[2]);

        let (same, _) = scale_generators_to_targets(&n, &[target(Fuel::Coal, 100.0, 0.0)]).unwrap();
        assert_eq!(same, n);
    }

    #[test]
    fn scaling_errors() {
        let n = network(vec![bus(1)], vec![], vec![gen(1, 1, Fuel::Coal, 0.0, 20.0)]);
        assert!(matches!(
            scale_generators_to_targets(&n, &[target(Fuel::Solar, 10.0, 0.0)]),
            Err(CalibrationError::NoGeneratorsForTarget(_))
        ));
        assert!(matches!(
            scale_generators_to_targets(&n, &[target(Fuel::Coal, 10.0, 0.0)]),
            Err(CalibrationError::ZeroGroupCapacity(_))
        ));
        let dup = [target(Fuel::Coal, 1.0, 0.0), target(Fuel::Coal, 2.0, 0.0)];
        assert!(matches!(
            scale_generators_to_targets(&n, &dup),
            Err(CalibrationError::DuplicateTarget(_))
        ));
    }

    #[test]
    fn price_calibration_examples() {
        let n = network(vec![bus(1)], vec![], vec![gen(1, 1, Fuel::Coal, 100.0, 20.0)]);
        let (out, _) = calibrate_fuel_costs(&n, &[target(Fuel::Coal, 100.0, 30.0)]).unwrap();
        assert_eq!(out.generators[0].cost_curve.marginal_costs, vec![30.0]);

        let n = network(
            vec![bus(1)],
            vec![],
            vec![gen(1, 1, Fuel::Coal, 100.0, 20.0), gen(2, 1, Fuel::Coal, 300.0, 40.0)],
        );
        let (out, f) = calibrate_fuel_costs(&n, &[target(Fuel::Coal, 400.0, 17.5)]).unwrap();
        assert_eq!(f[0].factor, Some(0.5));
        assert_eq!(out.generators[0].cost_curve.marginal_costs, vec![10.0]);
        assert_eq!(out.generators[1].cost_curve.marginal_costs, vec![20.0]);

        let (same, _) = calibrate_fuel_costs(&n, &[target(Fuel::Coal, 400.0, 35.0)]).unwrap();
        assert_eq!(same, n);
    }

    #[test]
    fn zero_priced_group_gets_flat_curves() {
        let n = network(vec![bus(1)], vec![], vec![gen(1, 1, Fuel::FuelOil, 50.0, 0.0)]);
        let (out, _) = calibrate_fuel_costs(&n, &[target(Fuel::FuelOil, 50.0, 80.0)]).unwrap();
        assert_eq!(out.generators[0].cost_curve, CostCurve::flat(0.0, 50.0, 80.0));
    }

    #[test]
    fn emissions_keep_breakpoints() {
        let mut g = gen(1, 1, Fuel::Coal, 100.0, 20.0);
        g.p_min = 20.0;
        let hr = PwlCurve::new(vec![(20.0, 250.0), (60.0, 620.0), (100.0, 1000.0)]).unwrap();
        let e = derive_emissions_curve(&g, &hr, 0.05929).unwrap();
        let xs: Vec<f64> = e.emissions.points.iter().map(|p| p.0).collect();
        assert_eq!(xs, vec![20.0, 60.0, 100.0]);
        assert!((e.eval(100.0) - 59.29).abs() < 1e-9);
        let zero = derive_emissions_curve(&g, &hr, 0.0).unwrap();
        assert!(zero.emissions.points.iter().all(|p| p.1 == 0.0));
        let short = PwlCurve::new(vec![(30.0, 1.0), (100.0, 2.0)]).unwrap();
        assert!(matches!(
            derive_emissions_curve(&g, &short, 0.1),
            Err(CalibrationError::DomainMismatch { .. })
        ));
    }

    #[test]
    fn geothermal_examples() {
        let start = Utc.with_ymd_and_hms(2016, 1, 1, 0, 0, 0).unwrap();
        let p = |v: Vec<f64>| HourlyProfile::new(start, v, Unit::Mw).unwrap();
        assert_eq!(set_geothermal_ratings(&p(vec![50.0; 10])).unwrap(), (50.0, 47.5));
        assert_eq!(set_geothermal_ratings(&p(vec![0.0; 3])).unwrap(), (0.0, 0.0));
        assert_eq!(set_geothermal_ratings(&p(vec![40.0, 60.0])).unwrap(), (50.0, 47.5));
    }
}
