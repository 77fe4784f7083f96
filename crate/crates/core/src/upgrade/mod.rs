//! Congestion-driven capacity upgrades: stepping the most congested branch
//! until prices look reasonable, or sizing every branch at once from the
//! limit violations of a soft-constrained run.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use thiserror::Error;

use crate::grid::{BranchId, BusId, Network};
use crate::harness::{run_rolling_horizon, HarnessError, HarnessOptions, Profiles, SimulationLog, WindowPlan};
use crate::mpdcopf::average_congestion;
use crate::table::{write_err, writer, TableError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpgradeTarget {
    /// Stop once nothing is shed and no branch averages above the threshold.
    EliminateShed,
    /// Stop once nothing is shed and every bus with wind or solar averages
    /// at least this price.
    LmpFloor(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpgradePolicy {
    pub shadow_price_threshold: f64,
    pub step_size: f64,
    /// Capacity steps allowed before giving up.
    pub max_iterations: u32,
    pub target: UpgradeTarget,
}

impl Default for UpgradePolicy {
    fn default() -> Self {
        UpgradePolicy {
            shadow_price_threshold: 25.0,
            step_size: 100.0,
            max_iterations: 50,
            target: UpgradeTarget::EliminateShed,
        }
    }
}

impl UpgradePolicy {
    fn check(&self) -> Result<(), UpgradeError> {
        if !(self.step_size > 0.0) || !self.step_size.is_finite() {
            return Err(UpgradeError::BadPolicy("step size must be > 0".into()));
        }
        if !(self.shadow_price_threshold >= 0.0) {
            return Err(UpgradeError::BadPolicy("threshold must be ≥ 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpgradeRecord {
    pub branch: BranchId,
    pub old_capacity: f64,
    pub new_capacity: f64,
    pub iterations: u32,
    /// Average shadow price when first stepped, or the sized violation in MW.
    pub trigger: f64,
}

/// What a simulation of the network is run against.
#[derive(Debug, Clone, Copy)]
pub struct Scenario<'a> {
    pub profiles: &'a Profiles,
    pub plan: &'a WindowPlan,
    pub options: HarnessOptions,
}

impl Scenario<'_> {
    fn simulate(&self, network: &Network) -> Result<SimulationLog, HarnessError> {
        run_rolling_horizon(network, self.profiles, self.plan, &self.options)
    }
}

#[derive(Debug, Clone)]
pub struct UpgradeOutcome {
    pub network: Network,
    pub records: Vec<UpgradeRecord>,
    /// Total objective of each simulation, one per iteration plus the last.
    pub objectives: Vec<f64>,
}

#[derive(Debug, Error)]
pub enum UpgradeError {
    #[error("invalid upgrade policy: {0}")]
    BadPolicy(String),
    #[error("simulation log has no solved windows")]
    EmptyLog,
    #[error("upgrade target not met after {} steps", .0.records.iter().map(|r| r.iterations).sum::<u32>())]
    IterationCapExceeded(Box<UpgradeOutcome>),
    #[error("upgrade target not met and no branch is congested")]
    Stalled(Box<UpgradeOutcome>),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Table(#[from] TableError),
}

/// Average shadow price of every branch over the log, highest first, ties
/// broken by lower branch id.
fn ranked_congestion(log: &SimulationLog) -> Result<Vec<(BranchId, f64)>, UpgradeError> {
    let first = log.windows.first().ok_or(UpgradeError::EmptyLog)?;
    let mut ranked: Vec<(BranchId, f64)> = first
        .solution
        .branch_ids
        .iter()
        .map(|&b| (b, average_congestion(log.solutions(), b)))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(ranked)
}

/// Branches whose time-average shadow price exceeds the policy threshold.
pub fn find_congested(
    log: &SimulationLog,
    policy: &UpgradePolicy,
) -> Result<Vec<(BranchId, f64)>, UpgradeError> {
    let mut ranked = ranked_congestion(log)?;
    ranked.retain(|(_, mu)| *mu > policy.shadow_price_threshold);
    Ok(ranked)
}

/// Time-average LMP of every bus hosting wind or solar.
pub fn renewable_bus_prices(log: &SimulationLog, network: &Network) -> BTreeMap<BusId, f64> {
    let buses: BTreeSet<BusId> = network
        .generators
        .iter()
        .filter(|g| g.fuel.is_variable_renewable())
        .map(|g| g.bus)
        .collect();
    let hours = log.hours().max(1) as f64;
    buses
        .into_iter()
        .map(|b| {
            let total: f64 = log
                .solutions()
                .filter_map(|s| {
                    let i = s.bus_ids.iter().position(|x| *x == b)?;
                    Some(s.lmp[i].iter().sum::<f64>())
                })
                .sum();
            (b, total / hours)
        })
        .collect()
}

const SHED_TOL: f64 = 1e-6;

fn target_met(
    log: &SimulationLog,
    network: &Network,
    congested: &[(BranchId, f64)],
    policy: &UpgradePolicy,
) -> bool {
    if log.total_shed() > SHED_TOL {
        return false;
    }
    match policy.target {
        UpgradeTarget::EliminateShed => congested.is_empty(),
        UpgradeTarget::LmpFloor(floor) => renewable_bus_prices(log, network)
            .values()
            .all(|p| *p >= floor),
    }
}

/// Repeatedly simulates and adds `step_size` MW to the single most
/// congested branch until the policy target holds.
pub fn step_upgrade(
    network: &Network,
    scenario: &Scenario<'_>,
    policy: &UpgradePolicy,
) -> Result<UpgradeOutcome, UpgradeError> {
    policy.check()?;
    let mut outcome = UpgradeOutcome {
        network: network.clone(),
        records: Vec::new(),
        objectives: Vec::new(),
    };
    let mut steps = 0u32;
    loop {
        let log = scenario.simulate(&outcome.network)?;
        outcome.objectives.push(log.total_objective());
        let congested = find_congested(&log, policy)?;
        if target_met(&log, &outcome.network, &congested, policy) {
            return Ok(outcome);
        }
        if steps >= policy.max_iterations {
            return Err(UpgradeError::IterationCapExceeded(Box::new(outcome)));
        }
        let pick = match congested.first() {
            Some(top) => Some(*top),
            None => ranked_congestion(&log)?.into_iter().find(|(_, mu)| *mu > 0.0),
        };
        let Some((branch, mu)) = pick else {
            return Err(UpgradeError::Stalled(Box::new(outcome)));
        };
        let br = outcome
            .network
            .branch_mut(branch)
            .expect("ranked branch exists in the network");
        let old = br.capacity;
        br.capacity += policy.step_size;
        let new = br.capacity;
        log::info!("step {}: branch {branch} at avg μ {mu:.3}, {old} → {new} MW", steps + 1);
        match outcome.records.iter_mut().find(|r| r.branch == branch) {
            Some(r) => {
                r.new_capacity = new;
                r.iterations += 1;
            }
            None => outcome.records.push(UpgradeRecord {
                branch,
                old_capacity: old,
                new_capacity: new,
                iterations: 1,
                trigger: mu,
            }),
        }
        steps += 1;
    }
}

/// Largest hourly limit violation of each branch in a soft-limit run of the
/// scenario; only branches that needed extra capacity are returned.
pub fn size_upgrades_soft(
    network: &Network,
    scenario: &Scenario<'_>,
    penalty: f64,
) -> Result<Vec<(BranchId, f64)>, UpgradeError> {
    let mut soft = *scenario;
    soft.options.opf.soft_limits = true;
    soft.options.opf.penalty = penalty;
    let log = soft.simulate(network)?;
    let mut worst: BTreeMap<BranchId, f64> = BTreeMap::new();
    for s in log.solutions() {
        for (l, id) in s.branch_ids.iter().enumerate() {
            let m = s.violations[l].iter().fold(0.0f64, |a, v| a.max(*v));
            let e = worst.entry(*id).or_default();
            *e = e.max(m);
        }
    }
    Ok(worst.into_iter().filter(|(_, v)| *v > 0.0).collect())
}

/// Adds each requirement to its branch's capacity.
pub fn apply_upgrades(
    network: &Network,
    requirements: &[(BranchId, f64)],
) -> (Network, Vec<UpgradeRecord>) {
    let mut out = network.clone();
    let mut records = Vec::with_capacity(requirements.len());
    for &(branch, extra) in requirements {
        if let Some(br) = out.branch_mut(branch) {
            let old = br.capacity;
            br.capacity += extra.max(0.0);
            records.push(UpgradeRecord {
                branch,
                old_capacity: old,
                new_capacity: br.capacity,
                iterations: 1,
                trigger: extra,
            });
        }
    }
    (out, records)
}

/// `upgrades.csv`: branch, old_mw, new_mw, trigger, iterations.
pub fn write_upgrades(records: &[UpgradeRecord], path: &Path) -> Result<(), TableError> {
    let mut w = writer(path)?;
    let err = |e| write_err(path, e);
    w.write_record(["branch", "old_mw", "new_mw", "trigger", "iterations"])
        .map_err(err)?;
    for r in records {
        w.write_record([
            r.branch.to_string(),
            r.old_capacity.to_string(),
            r.new_capacity.to_string(),
            r.trigger.to_string(),
            r.iterations.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| err(e.into()))
}

#[cfg(test)]
mod tests;
