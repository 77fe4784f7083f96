//! Generation totals by state and fuel, comparison against historical
//! energy, bounded cost revision and report files.

mod svg;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use thiserror::Error;

use crate::grid::{Fuel, Network};
use crate::harness::SimulationLog;
use crate::table::{write_err, writer, Table, TableError};

pub use svg::render_comparison_svg;

/// Energy in TWh keyed by (state, fuel).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GenerationTable(pub BTreeMap<(String, Fuel), f64>);

impl GenerationTable {
    pub fn get(&self, state: &str, fuel: Fuel) -> f64 {
        self.0.get(&(state.to_string(), fuel)).copied().unwrap_or(0.0)
    }

    pub fn state_totals(&self) -> BTreeMap<String, f64> {
        let mut out: BTreeMap<String, f64> = BTreeMap::new();
        for ((state, _), v) in &self.0 {
            *out.entry(state.clone()).or_default() += v;
        }
        out
    }
}

/// Dispatched energy of every generator group over the logged hours, in TWh.
pub fn aggregate_generation(log: &SimulationLog, network: &Network) -> GenerationTable {
    let mut table: BTreeMap<(String, Fuel), f64> = network
        .generators
        .iter()
        .map(|g| ((g.state.clone(), g.fuel), 0.0))
        .collect();
    for sol in log.solutions() {
        for (g, id) in sol.gen_ids.iter().enumerate() {
            let Some(gen) = network.generator(*id) else {
                continue;
            };
            let mwh: f64 = sol.dispatch[g].iter().sum();
            *table.entry((gen.state.clone(), gen.fuel)).or_default() += mwh / 1e6;
        }
    }
    GenerationTable(table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub state: String,
    pub fuel: Fuel,
    pub simulated: f64,
    pub historical: f64,
    /// Simulated minus historical, TWh.
    pub error: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ComparisonResult {
    pub rows: Vec<ComparisonRow>,
    pub euclidean: f64,
    pub sum_abs: f64,
}

/// Per-key errors over the union of both tables; a key missing on one side
/// counts as zero there.
pub fn compare(sim: &GenerationTable, hist: &GenerationTable) -> ComparisonResult {
    let keys: BTreeSet<&(String, Fuel)> = sim.0.keys().chain(hist.0.keys()).collect();
    let mut rows = Vec::with_capacity(keys.len());
    for key in keys {
        let s = sim.0.get(key).copied();
        let h = hist.0.get(key).copied();
        if s.is_none() || h.is_none() {
            log::warn!(
                "{}/{} has no {} value; treating it as 0",
                key.0,
                key.1,
                if s.is_none() { "simulated" } else { "historical" }
            );
        }
        let (s, h) = (s.unwrap_or(0.0), h.unwrap_or(0.0));
        rows.push(ComparisonRow {
            state: key.0.clone(),
            fuel: key.1,
            simulated: s,
            historical: h,
            error: s - h,
        });
    }
    let euclidean = rows.iter().map(|r| r.error * r.error).sum::<f64>().sqrt();
    let sum_abs = rows.iter().map(|r| r.error.abs()).sum();
    ComparisonResult {
        rows,
        euclidean,
        sum_abs,
    }
}

/// Proportional-clamp rule: `clamp(1 + β·(sim − hist)/hist, 1 − cap, 1 + cap)`.
/// Over-generating groups get dearer, under-generating ones cheaper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevisionRule {
    pub cap: f64,
    pub beta: f64,
}

impl Default for RevisionRule {
    fn default() -> Self {
        RevisionRule {
            cap: 0.05,
            beta: 1.0,
        }
    }
}

impl RevisionRule {
    pub fn multiplier(&self, simulated: f64, historical: f64) -> f64 {
        if simulated == historical {
            return 1.0;
        }
        let rel = if historical == 0.0 {
            f64::INFINITY.copysign(simulated - historical)
        } else {
            (simulated - historical) / historical.abs()
        };
        (1.0 + self.beta * rel).clamp(1.0 - self.cap, 1.0 + self.cap)
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("revision cap {0} must lie in (0, 1)")]
    BadCap(f64),
    #[error("revision gain {0} must be finite and ≥ 0")]
    BadBeta(f64),
    #[error(transparent)]
    Table(#[from] TableError),
}

/// Scales the marginal costs of each compared group by its multiplier.
/// Returns the revised network and the multiplier of every group.
pub fn revise_costs(
    network: &Network,
    cmp: &ComparisonResult,
    rule: RevisionRule,
) -> Result<(Network, BTreeMap<(String, Fuel), f64>), ReportError> {
    if !(rule.cap > 0.0 && rule.cap < 1.0) {
        return Err(ReportError::BadCap(rule.cap));
    }
    if !(rule.beta >= 0.0) || !rule.beta.is_finite() {
        return Err(ReportError::BadBeta(rule.beta));
    }
    let multipliers: BTreeMap<(String, Fuel), f64> = cmp
        .rows
        .iter()
        .map(|r| {
            (
                (r.state.clone(), r.fuel),
                rule.multiplier(r.simulated, r.historical),
            )
        })
        .collect();
    let mut out = network.clone();
    for g in &mut out.generators {
        if let Some(m) = multipliers.get(&(g.state.clone(), g.fuel)) {
            if *m != 1.0 {
                g.cost_curve.scale_costs(*m);
            }
        }
    }
    Ok((out, multipliers))
}

/// Writes `comparison.csv` and `comparison.svg` into `dir`.
pub fn emit_report(cmp: &ComparisonResult, dir: &Path) -> Result<(), ReportError> {
    let path = dir.join("comparison.csv");
    let mut w = writer(&path)?;
    let err = |e| write_err(&path, e);
    w.write_record(["state", "fuel", "simulated_twh", "historical_twh", "error_twh"])
        .map_err(err)?;
    for r in &cmp.rows {
        w.write_record([
            r.state.clone(),
            r.fuel.to_string(),
            r.simulated.to_string(),
            r.historical.to_string(),
            r.error.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| err(e.into()))?;
    let svg_path = dir.join("comparison.svg");
    std::fs::write(&svg_path, render_comparison_svg(cmp)).map_err(|source| TableError::Io {
        path: svg_path.clone(),
        source,
    })?;
    Ok(())
}

/// Reads a `state,fuel,twh` table (`historical.csv`,
/// `energy_by_state_fuel.csv`).
pub fn read_generation_table(path: &Path) -> Result<GenerationTable, TableError> {
    let table = Table::read(path, &["state", "fuel", "twh"], &[])?;
    let mut out = BTreeMap::new();
    for row in table.rows() {
        let state: String = row.get("state")?;
        let fuel: Fuel = row.get("fuel")?;
        let twh: f64 = row.get("twh")?;
        if !(twh >= 0.0) || !twh.is_finite() {
            return Err(row.error("twh", "energy must be finite and ≥ 0"));
        }
        if out.insert((state.clone(), fuel), twh).is_some() {
            return Err(row.error("fuel", format!("duplicate entry {state}/{fuel}")));
        }
    }
    Ok(GenerationTable(out))
}

pub fn write_generation_table(table: &GenerationTable, path: &Path) -> Result<(), TableError> {
    let mut w = writer(path)?;
    let err = |e| write_err(path, e);
    w.write_record(["state", "fuel", "twh"]).map_err(err)?;
    for ((state, fuel), v) in &table.0 {
        w.write_record([state.clone(), fuel.to_string(), v.to_string()])
            .map_err(err)?;
    }
    w.flush().map_err(|e| err(e.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{bus, gen, network};

    fn table(entries: &[(&str, Fuel, f64)]) -> GenerationTable {
        GenerationTable(
            entries
                .iter()
                .map(|(s, f, v)| ((s.to_string(), *f), *v))
                .collect(),
        )
    }

    #[test]
    fn three_four_five() {
        let sim = table(&[("TX", Fuel::Coal, 13.0), ("TX", Fuel::Wind, 4.0)]);
        let hist = table(&[("TX", Fuel::Coal, 10.0), ("TX", Fuel::Wind, 8.0)]);
        let c = compare(&sim, &hist);
        assert_eq!(c.euclidean, 5.0);
        assert_eq!(c.sum_abs, 7.0);
        let swapped = compare(&hist, &sim);
        assert_eq!((swapped.euclidean, swapped.sum_abs), (5.0, 7.0));
        let same = compare(&sim, &sim);
        assert_eq!((same.euclidean, same.sum_abs), (0.0, 0.0));
    }

    #[test]
    fn missing_keys_count_as_zero() {
        let c = compare(&table(&[("CA", Fuel::Solar, 2.0)]), &table(&[]));
        assert_eq!(c.rows.len(), 1);
        assert_eq!(c.rows[0].historical, 0.0);
        assert_eq!(c.sum_abs, 2.0);
    }

    #[test]
    fn revision_multipliers() {
        let r = RevisionRule::default();
        assert_eq!(r.multiplier(10.0, 10.0), 1.0);
        assert_eq!(r.multiplier(15.0, 10.0), 1.05);
        assert!((r.multiplier(98.0, 100.0) - 0.98).abs() < 1e-12);
        assert_eq!(r.multiplier(1.0, 0.0), 1.05);
        assert_eq!(r.multiplier(0.0, 10.0), 0.95);
    }

    #[test]
    fn revision_scales_group_costs() {
        let n = network(vec![bus(1)], vec![], vec![gen(1, 1, Fuel::Coal, 100.0, 20.0)]);
        let cmp = compare(&table(&[("TX", Fuel::Coal, 15.0)]), &table(&[("TX", Fuel::Coal, 10.0)]));
        let (out, m) = revise_costs(&n, &cmp, RevisionRule::default()).unwrap();
        assert_eq!(m[&("TX".to_string(), Fuel::Coal)], 1.05);
        assert_eq!(out.generators[0].cost_curve.marginal_costs, vec![21.0]);
        let rule = RevisionRule {
            cap: 1.0,
            beta: 1.0,
        };
        assert!(matches!(revise_costs(&n, &cmp, rule), Err(ReportError::BadCap(_))));
    }

    #[test]
    fn tables_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let t = table(&[("TX", Fuel::Coal, 0.1 + 0.2), ("AZ", Fuel::Solar, 1e-7)]);
        let path = dir.path().join("historical.csv");
        write_generation_table(&t, &path).unwrap();
        assert_eq!(read_generation_table(&path).unwrap(), t);
    }

    #[test]
    fn empty_report_has_header_only() {
        let dir = tempfile::tempdir().unwrap();
        emit_report(&ComparisonResult::default(), dir.path()).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("comparison.csv")).unwrap();
        assert_eq!(csv, "state,fuel,simulated_twh,historical_twh,error_twh\n");
        let svg = std::fs::read_to_string(dir.path().join("comparison.svg")).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }
}
