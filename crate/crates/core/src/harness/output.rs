use std::path::Path;

use super::SimulationLog;
use crate::grid::Network;
use crate::mpdcopf::write_solution_csv;
use crate::report::{aggregate_generation, write_generation_table};
use crate::table::{write_err, writer, TableError};
use crate::timeseries::io::format_timestamp;

/// Writes `log_windows.csv`, `log_retries.csv`, `log_hours.csv` and
/// `energy_by_state_fuel.csv` into `dir`.
pub fn write_log(log: &SimulationLog, network: &Network, dir: &Path) -> Result<(), TableError> {
    let path = dir.join("log_windows.csv");
    let mut w = writer(&path)?;
    let err = |e| write_err(&path, e);
    w.write_record([
        "window",
        "start_hour",
        "hours",
        "status",
        "demand_scale",
        "retries",
        "objective",
        "shed_mwh",
    ])
    .map_err(err)?;
    for win in &log.windows {
        w.write_record([
            win.index.to_string(),
            win.hours.start.to_string(),
            win.hours.len().to_string(),
            "optimal".to_string(),
            win.demand_scale.to_string(),
            win.retries.to_string(),
            win.objective().to_string(),
            win.solution.total_shed().to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| err(e.into()))?;

    let path = dir.join("log_retries.csv");
    let mut w = writer(&path)?;
    let err = |e| write_err(&path, e);
    w.write_record(["window", "attempt", "demand_scale", "reason"])
        .map_err(err)?;
    for r in &log.retries {
        w.write_record([
            r.window.to_string(),
            r.attempt.to_string(),
            r.demand_scale.to_string(),
            r.reason.clone(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| err(e.into()))?;

    let path = dir.join("log_hours.csv");
    let mut w = writer(&path)?;
    let err = |e| write_err(&path, e);
    w.write_record(["hour", "timestamp_utc", "kind", "entity", "value"])
        .map_err(err)?;
    for win in &log.windows {
        let s = &win.solution;
        for (t, hour) in win.hours.clone().enumerate() {
            let stamp = format_timestamp(log.start + chrono::Duration::hours(hour as i64));
            let hour = hour.to_string();
            let mut put = |kind: &str, entity: String, value: f64| {
                w.write_record([hour.as_str(), &stamp, kind, &entity, &value.to_string()])
            };
            for (g, id) in s.gen_ids.iter().enumerate() {
                put("dispatch", id.to_string(), s.dispatch[g][t]).map_err(err)?;
            }
            for (b, id) in s.bus_ids.iter().enumerate() {
                put("lmp", id.to_string(), s.lmp[b][t]).map_err(err)?;
            }
            for (b, id) in s.bus_ids.iter().enumerate() {
                put("shed", id.to_string(), s.shed[b][t]).map_err(err)?;
            }
            for (l, id) in s.branch_ids.iter().enumerate() {
                put("flow", id.to_string(), s.flows[l][t]).map_err(err)?;
            }
            for (l, id) in s.branch_ids.iter().enumerate() {
                put("mu", id.to_string(), s.mu[l][t]).map_err(err)?;
            }
        }
    }
    w.flush().map_err(|e| err(e.into()))?;

    let table = aggregate_generation(log, network);
    write_generation_table(&table, &dir.join("energy_by_state_fuel.csv"))
}

/// Writes one `solution_<window>.csv` per window into `dir`.
pub fn write_solutions(log: &SimulationLog, dir: &Path) -> Result<(), TableError> {
    for win in &log.windows {
        write_solution_csv(&win.solution, &dir.join(format!("solution_{}.csv", win.index)))?;
    }
    Ok(())
}
