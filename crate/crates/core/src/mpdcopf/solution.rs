use std::path::Path;

use super::{DispatchStatus, MpdcopfProblem, MpdcopfSolution, OpfError};
use crate::grid::BranchId;
use crate::lp::{LpSolver, LpStatus, RevisedSimplex};
use crate::table::{write_err, writer, TableError};

/// Flows within this distance of the limit count as binding.
const BINDING_TOL: f64 = 1e-7;

pub fn solve(problem: &MpdcopfProblem) -> Result<MpdcopfSolution, OpfError> {
    solve_with(problem, &RevisedSimplex::default())
}

pub fn solve_with(
    problem: &MpdcopfProblem,
    solver: &dyn LpSolver,
) -> Result<MpdcopfSolution, OpfError> {
    let lp_sol = solver.solve(&problem.lp)?;
    let map = &problem.map;
    let x = &lp_sol.x;
    let status = match &lp_sol.status {
        LpStatus::Optimal => DispatchStatus::Optimal,
        LpStatus::Infeasible { rows } => {
            let mut hint: Vec<_> = rows.iter().map(|r| map.row_refs[r.0]).collect();
            hint.dedup();
            DispatchStatus::Infeasible { hint }
        }
        LpStatus::Unbounded => {
            return Err(OpfError::Lp(crate::lp::LpError::NumericalFailure(
                "dispatch LP reported unbounded".into(),
            )))
        }
    };
    let optimal = status == DispatchStatus::Optimal;

    let dispatch = map
        .gen
        .iter()
        .map(|hours| {
            hours
                .iter()
                .map(|gh| gh.floor + gh.segments.iter().map(|v| x[v.0]).sum::<f64>())
                .collect()
        })
        .collect();
    let angles = map
        .theta
        .iter()
        .map(|hours| hours.iter().map(|v| x[v.0]).collect())
        .collect();
    let mut flows = Vec::with_capacity(map.flow.len());
    let mut violations = Vec::with_capacity(map.flow.len());
    let mut mu = Vec::with_capacity(map.flow.len());
    for (l, hours) in map.flow.iter().enumerate() {
        let cap = problem.branch_capacity[l];
        let mut f_row = Vec::with_capacity(hours.len());
        let mut v_row = Vec::with_capacity(hours.len());
        let mut mu_row = Vec::with_capacity(hours.len());
        for fv in hours {
            let base = x[fv.flow.0];
            let (up, down) = fv.over.map(|(u, d)| (x[u.0], x[d.0])).unwrap_or((0.0, 0.0));
            f_row.push(base + up - down);
            v_row.push(up + down);
            let shadow = if !optimal {
                0.0
            } else {
                let d = lp_sol.reduced_costs[fv.flow.0];
                let tol = BINDING_TOL * cap.max(1.0);
                if base >= cap - tol {
                    (-d).max(0.0)
                } else if base <= -cap + tol {
                    d.max(0.0)
                } else {
                    0.0
                }
            };
            mu_row.push(shadow);
        }
        flows.push(f_row);
        violations.push(v_row);
        mu.push(mu_row);
    }
    let dc_flows = map
        .dc
        .iter()
        .map(|hours| hours.iter().map(|v| x[v.0]).collect())
        .collect();
    let shed = map
        .shed
        .iter()
        .map(|hours| {
            hours
                .iter()
                .map(|v| v.map(|v| x[v.0]).unwrap_or(0.0))
                .collect()
        })
        .collect();
    let lmp = map
        .balance
        .iter()
        .map(|hours| {
            hours
                .iter()
                .map(|r| if optimal { lp_sol.row_duals[r.0] } else { 0.0 })
                .collect()
        })
        .collect();

    Ok(MpdcopfSolution {
        status,
        objective: lp_sol.objective,
        bus_ids: problem.bus_ids.clone(),
        gen_ids: problem.gen_ids.clone(),
        branch_ids: problem.branch_ids.clone(),
        dc_line_ids: problem.dc_line_ids.clone(),
        dispatch,
        angles,
        flows,
        dc_flows,
        shed,
        violations,
        lmp,
        mu,
        iterations: lp_sol.iterations,
    })
}

/// Bus × hour price matrix of an optimal solution.
pub fn lmps(solution: &MpdcopfSolution) -> Result<&[Vec<f64>], OpfError> {
    if solution.is_optimal() {
        Ok(&solution.lmp)
    } else {
        Err(OpfError::NotOptimal)
    }
}

/// Time-average shadow price of `branch` over every hour of the given
/// solutions. Non-optimal solutions contribute no hours.
pub fn average_congestion<'a>(
    solutions: impl IntoIterator<Item = &'a MpdcopfSolution>,
    branch: BranchId,
) -> f64 {
    let mut total = 0.0;
    let mut hours = 0usize;
    for sol in solutions.into_iter().filter(|s| s.is_optimal()) {
        if let Some(l) = sol.branch_ids.iter().position(|&b| b == branch) {
            total += sol.mu[l].iter().sum::<f64>();
        }
        hours += sol.hours();
    }
    if hours == 0 {
        0.0
    } else {
        total / hours as f64
    }
}

/// Writes `entity,hour,value,dual` rows: dispatch per generator, angle and
/// LMP per bus, flow and shadow price per branch, HVDC transfer, shed and
/// limit violations.
pub fn write_solution_csv(solution: &MpdcopfSolution, path: &Path) -> Result<(), TableError> {
    let mut w = writer(path)?;
    w.write_record(["entity", "hour", "value", "dual"])
        .map_err(|e| write_err(path, e))?;
    let mut row = |entity: String, hour: usize, value: f64, dual: Option<f64>| {
        w.write_record([
            entity,
            hour.to_string(),
            value.to_string(),
            dual.map(|d| d.to_string()).unwrap_or_default(),
        ])
        .map_err(|e| write_err(path, e))
    };
    for (g, id) in solution.gen_ids.iter().enumerate() {
        for (t, v) in solution.dispatch[g].iter().enumerate() {
            row(format!("gen:{id}"), t, *v, None)?;
        }
    }
    for (b, id) in solution.bus_ids.iter().enumerate() {
        for t in 0..solution.angles[b].len() {
            row(
                format!("bus:{id}"),
                t,
                solution.angles[b][t],
                Some(solution.lmp[b][t]),
            )?;
        }
    }
    for (l, id) in solution.branch_ids.iter().enumerate() {
        for t in 0..solution.flows[l].len() {
            row(
                format!("branch:{id}"),
                t,
                solution.flows[l][t],
                Some(solution.mu[l][t]),
            )?;
        }
    }
    for (d, id) in solution.dc_line_ids.iter().enumerate() {
        for (t, v) in solution.dc_flows[d].iter().enumerate() {
            row(format!("dcline:{id}"), t, *v, None)?;
        }
    }
    for (b, id) in solution.bus_ids.iter().enumerate() {
        for (t, v) in solution.shed[b].iter().enumerate() {
            if *v != 0.0 {
                row(format!("shed:{id}"), t, *v, None)?;
            }
        }
    }
    for (l, id) in solution.branch_ids.iter().enumerate() {
        for (t, v) in solution.violations[l].iter().enumerate() {
            if *v != 0.0 {
                row(format!("violation:{id}"), t, *v, None)?;
            }
        }
    }
    w.flush().map_err(|e| write_err(path, e.into()))
}
