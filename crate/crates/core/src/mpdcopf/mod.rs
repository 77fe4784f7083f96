//! Multi-period DC optimal power flow as a linear program.
//!
//! Per hour the model carries generator cost segments, bus angles, AC
//! branch flows, HVDC transfers and optional load shed. Branch flows are
//! bounded variables tied to angle differences by a definition row, so the
//! branch shadow price is the reduced cost of the flow at its limit and the
//! bus price is the dual of the bus balance row. Consecutive hours are
//! linked by ramp rows, and hour zero optionally by ramp rows against an
//! initial dispatch.

mod build;
mod solution;
#[cfg(test)]
mod tests;

use thiserror::Error;

use crate::grid::{BranchId, BusId, DcLineId, GenId};
use crate::lp::{LinearProgram, LpError, RowId, VarId};

pub use build::{build_problem, full_availability};
pub use solution::{average_congestion, lmps, solve, solve_with, write_solution_csv};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpdcopfOptions {
    /// Branch limits may be exceeded at `penalty` per MWh.
    pub soft_limits: bool,
    pub penalty: f64,
    /// Price of unserved demand; `None` forbids shedding.
    pub load_shed_cost: Option<f64>,
}

impl Default for MpdcopfOptions {
    fn default() -> Self {
        MpdcopfOptions {
            soft_limits: false,
            penalty: 2_000.0,
            load_shed_cost: Some(10_000.0),
        }
    }
}

/// Which constraint a row of the LP encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowRef {
    Balance { bus: BusId, hour: usize },
    FlowDefinition { branch: BranchId, hour: usize },
    Ramp { gen: GenId, hour: usize },
}

impl std::fmt::Display for RowRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RowRef::Balance { bus, hour } => write!(f, "power balance at bus {bus}, hour {hour}"),
            RowRef::FlowDefinition { branch, hour } => {
                write!(f, "flow definition of branch {branch}, hour {hour}")
            }
            RowRef::Ramp { gen, hour } => write!(f, "ramp limit of gen {gen}, hour {hour}"),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct GenHour {
    pub floor: f64,
    pub segments: Vec<VarId>,
}

#[derive(Debug, Clone)]
pub(crate) struct FlowVars {
    pub flow: VarId,
    pub over: Option<(VarId, VarId)>,
}

/// Index from model quantities to LP variables and rows.
#[derive(Debug, Clone)]
pub(crate) struct VarMap {
    pub gen: Vec<Vec<GenHour>>,
    pub theta: Vec<Vec<VarId>>,
    pub flow: Vec<Vec<FlowVars>>,
    pub dc: Vec<Vec<VarId>>,
    pub shed: Vec<Vec<Option<VarId>>>,
    pub balance: Vec<Vec<RowId>>,
    pub row_refs: Vec<RowRef>,
}

/// A built multi-period dispatch problem. Matrices are indexed
/// `[entity][hour]` following the network's collection order.
#[derive(Debug, Clone)]
pub struct MpdcopfProblem {
    pub hours: usize,
    pub options: MpdcopfOptions,
    pub bus_ids: Vec<BusId>,
    pub gen_ids: Vec<GenId>,
    pub branch_ids: Vec<BranchId>,
    pub dc_line_ids: Vec<DcLineId>,
    pub branch_capacity: Vec<f64>,
    pub demand: Vec<Vec<f64>>,
    pub availability: Vec<Vec<f64>>,
    pub initial_dispatch: Option<Vec<f64>>,
    pub(crate) lp: LinearProgram,
    pub(crate) map: VarMap,
}

impl MpdcopfProblem {
    pub fn lp(&self) -> &LinearProgram {
        &self.lp
    }

    pub fn num_balance_rows(&self) -> usize {
        self.map.balance.iter().map(Vec::len).sum()
    }

    pub fn row_ref(&self, row: RowId) -> RowRef {
        self.map.row_refs[row.0]
    }

    /// Violation variables attached to each branch in soft mode, with their cost.
    pub fn violation_costs(&self) -> Vec<(BranchId, usize, f64)> {
        let mut out = Vec::new();
        for (l, hours) in self.map.flow.iter().enumerate() {
            for (t, fv) in hours.iter().enumerate() {
                if let Some((up, down)) = fv.over {
                    debug_assert_eq!(self.lp.costs[up.0], self.lp.costs[down.0]);
                    out.push((self.branch_ids[l], t, self.lp.costs[up.0]));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DispatchStatus {
    Optimal,
    /// Constraints left unsatisfied when phase one stopped.
    Infeasible { hint: Vec<RowRef> },
}

#[derive(Debug, Clone)]
pub struct MpdcopfSolution {
    pub status: DispatchStatus,
    pub objective: f64,
    pub bus_ids: Vec<BusId>,
    pub gen_ids: Vec<GenId>,
    pub branch_ids: Vec<BranchId>,
    pub dc_line_ids: Vec<DcLineId>,
    pub dispatch: Vec<Vec<f64>>,
    pub angles: Vec<Vec<f64>>,
    pub flows: Vec<Vec<f64>>,
    pub dc_flows: Vec<Vec<f64>>,
    pub shed: Vec<Vec<f64>>,
    pub violations: Vec<Vec<f64>>,
    /// Bus balance duals (LMPs), currency/MWh.
    pub lmp: Vec<Vec<f64>>,
    /// Branch limit shadow prices, currency/MWh, never negative.
    pub mu: Vec<Vec<f64>>,
    pub iterations: usize,
}

impl MpdcopfSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == DispatchStatus::Optimal
    }

    pub fn hours(&self) -> usize {
        self.dispatch
            .first()
            .or(self.lmp.first())
            .map(Vec::len)
            .unwrap_or(0)
    }

    pub fn total_shed(&self) -> f64 {
        self.shed.iter().flatten().sum()
    }

    /// Dispatch of every generator in the last hour, the coupling state for
    /// the next window.
    pub fn final_dispatch(&self) -> Vec<f64> {
        self.dispatch
            .iter()
            .map(|row| row.last().copied().unwrap_or(0.0))
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum OpfError {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("gen {0} has a non-convex or malformed cost curve")]
    UnboundedCost(GenId),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("solution is not optimal")]
    NotOptimal,
    #[error(transparent)]
    Lp(#[from] LpError),
}
