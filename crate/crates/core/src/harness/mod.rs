//! Rolling-horizon simulation of a year as consecutive dispatch windows.
//!
//! Each window starts from the final-hour dispatch of the one before it.
//! A window that cannot be dispatched is re-solved with all demand in it
//! scaled down by 5% per attempt.

mod output;

use std::collections::BTreeMap;
use std::ops::Range;

use chrono::{DateTime, Utc};
use thiserror::Error;

use crate::grid::{BusId, Fuel, GenId, Network};
use crate::mpdcopf::{self, DispatchStatus, MpdcopfOptions, MpdcopfSolution, OpfError};
use crate::table::TableError;
use crate::timeseries::HourlyProfile;

pub use output::{write_log, write_solutions};

/// Hours in a leap year, the default simulated horizon.
pub const LEAP_YEAR_HOURS: usize = 8784;
pub const DEFAULT_WINDOW_HOURS: usize = 144;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowPlan {
    pub window_hours: usize,
    pub total_hours: usize,
    pub windows: Vec<Range<usize>>,
}

impl WindowPlan {
    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    /// Keeps only the first `k` windows.
    pub fn truncated(mut self, k: usize) -> Self {
        self.windows.truncate(k);
        self.total_hours = self.windows.last().map_or(0, |w| w.end);
        self
    }
}

/// Contiguous windows of `window_hours` covering `[0, total_hours)`; the
/// last one may be shorter.
pub fn plan_windows(total_hours: usize, window_hours: usize) -> Result<WindowPlan, HarnessError> {
    if window_hours < 2 || total_hours < window_hours {
        return Err(HarnessError::BadWindowLength {
            total_hours,
            window_hours,
        });
    }
    let windows = (0..total_hours)
        .step_by(window_hours)
        .map(|s| s..(s + window_hours).min(total_hours))
        .collect();
    Ok(WindowPlan {
        window_hours,
        total_hours,
        windows,
    })
}

/// Bus demand and generator availability series sharing one time axis.
/// Buses without demand participation and units whose fuel is not
/// weather-driven may be omitted.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Profiles {
    pub demand: BTreeMap<BusId, HourlyProfile>,
    pub availability: BTreeMap<GenId, HourlyProfile>,
}

impl Profiles {
    fn start(&self) -> Option<DateTime<Utc>> {
        self.demand
            .values()
            .chain(self.availability.values())
            .map(|p| p.start)
            .next()
    }

    /// Demand `[bus][hour]` and availability `[gen][hour]` for the whole plan.
    fn matrices(
        &self,
        network: &Network,
        hours: usize,
    ) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>), HarnessError> {
        let start = self.start();
        let take = |entity: String, p: &HourlyProfile| {
            if Some(p.start) != start {
                return Err(HarnessError::Misaligned(entity));
            }
            if p.len() < hours {
                return Err(HarnessError::ProfileTooShort {
                    entity,
                    have: p.len(),
                    need: hours,
                });
            }
            Ok(p.values[..hours].to_vec())
        };
        let mut demand = Vec::with_capacity(network.buses.len());
        for b in &network.buses {
            demand.push(match self.demand.get(&b.id) {
                Some(p) => take(format!("bus {}", b.id), p)?,
                None if b.demand_participation => {
                    return Err(HarnessError::MissingProfile(format!("demand of bus {}", b.id)))
                }
                None => vec![0.0; hours],
            });
        }
        let mut availability = Vec::with_capacity(network.generators.len());
        for g in &network.generators {
            availability.push(match self.availability.get(&g.id) {
                Some(p) => take(format!("gen {}", g.id), p)?,
                None if g.fuel.is_profiled() => {
                    return Err(HarnessError::MissingProfile(format!(
                        "{} availability of gen {}",
                        g.fuel, g.id
                    )))
                }
                None => vec![g.p_max; hours],
            });
        }
        Ok((demand, availability))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarnessOptions {
    pub opf: MpdcopfOptions,
    /// Attempts allowed after the first failed solve of a window.
    pub retry_cap: u32,
    /// Demand multiplier applied per retry.
    pub demand_reduction: f64,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        HarnessOptions {
            opf: MpdcopfOptions::default(),
            retry_cap: 20,
            demand_reduction: 0.95,
        }
    }
}

#[derive(Debug, Clone)]
pub struct WindowLog {
    pub index: usize,
    pub hours: Range<usize>,
    /// `demand_reduction` raised to `retries`, by repeated multiplication.
    pub demand_scale: f64,
    pub retries: u32,
    pub solution: MpdcopfSolution,
}

impl WindowLog {
    pub fn objective(&self) -> f64 {
        self.solution.objective
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetryEvent {
    pub window: usize,
    pub attempt: u32,
    /// Scale of the attempt that failed.
    pub demand_scale: f64,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct SimulationLog {
    pub start: DateTime<Utc>,
    pub windows: Vec<WindowLog>,
    pub retries: Vec<RetryEvent>,
    /// Dispatched energy in MWh by (state, fuel).
    pub energy: BTreeMap<(String, Fuel), f64>,
}

impl SimulationLog {
    pub fn hours(&self) -> usize {
        self.windows.iter().map(|w| w.hours.len()).sum()
    }

    pub fn solutions(&self) -> impl Iterator<Item = &MpdcopfSolution> {
        self.windows.iter().map(|w| &w.solution)
    }

    pub fn total_shed(&self) -> f64 {
        self.solutions().map(MpdcopfSolution::total_shed).sum()
    }

    pub fn total_objective(&self) -> f64 {
        self.windows.iter().map(WindowLog::objective).sum()
    }
}

/// Solves the plan's windows in order, coupling each to its predecessor's
/// final dispatch and retrying infeasible windows at reduced demand.
pub fn run_rolling_horizon(
    network: &Network,
    profiles: &Profiles,
    plan: &WindowPlan,
    options: &HarnessOptions,
) -> Result<SimulationLog, HarnessError> {
    let start = profiles
        .start()
        .ok_or_else(|| HarnessError::MissingProfile("any demand profile".into()))?;
    let (demand, availability) = profiles.matrices(network, plan.total_hours)?;
    let slice = |m: &[Vec<f64>], r: &Range<usize>, scale: f64| -> Vec<Vec<f64>> {
        m.iter()
            .map(|row| row[r.clone()].iter().map(|v| v * scale).collect())
            .collect()
    };

    let mut log = SimulationLog {
        start,
        windows: Vec::with_capacity(plan.len()),
        retries: Vec::new(),
        energy: BTreeMap::new(),
    };
    let mut initial: Option<Vec<f64>> = None;
    for (k, range) in plan.windows.iter().enumerate() {
        let avail = slice(&availability, range, 1.0);
        let mut scale = 1.0;
        let mut retries = 0u32;
        let solution = loop {
            let problem = mpdcopf::build_problem(
                network,
                slice(&demand, range, scale),
                avail.clone(),
                options.opf,
                initial.clone(),
            )?;
            let solution = mpdcopf::solve(&problem)?;
            let hint = match &solution.status {
                DispatchStatus::Optimal => break solution,
                DispatchStatus::Infeasible { hint } => hint
                    .iter()
                    .take(3)
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join("; "),
            };
            if retries >= options.retry_cap {
                return Err(HarnessError::RetryCapExceeded {
                    window: k,
                    retries,
                    hint,
                });
            }
            retries += 1;
            log::warn!("window {k} infeasible at demand scale {scale}: {hint}");
            log.retries.push(RetryEvent {
                window: k,
                attempt: retries,
                demand_scale: scale,
                reason: hint,
            });
            scale *= options.demand_reduction;
        };
        for (g, gen) in network.generators.iter().enumerate() {
            let mwh: f64 = solution.dispatch[g].iter().sum();
            *log.energy.entry((gen.state.clone(), gen.fuel)).or_default() += mwh;
        }
        initial = Some(solution.final_dispatch());
        log.windows.push(WindowLog {
            index: k,
            hours: range.clone(),
            demand_scale: scale,
            retries,
            solution,
        });
    }
    Ok(log)
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("window of {window_hours} h does not fit a horizon of {total_hours} h (need 2 ≤ W ≤ total)")]
    BadWindowLength {
        total_hours: usize,
        window_hours: usize,
    },
    #[error("missing profile: {0}")]
    MissingProfile(String),
    #[error("profile of {entity} has {have} hours, the plan needs {need}")]
    ProfileTooShort {
        entity: String,
        have: usize,
        need: usize,
    },
    #[error("profile of {0} does not start with the others")]
    Misaligned(String),
    #[error("window {window} still infeasible after {retries} demand reductions ({hint})")]
    RetryCapExceeded {
        window: usize,
        retries: u32,
        hint: String,
    },
    #[error(transparent)]
    Opf(#[from] OpfError),
    #[error(transparent)]
    Table(#[from] TableError),
}

#[cfg(test)]
mod tests;
