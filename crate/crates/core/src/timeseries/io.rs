//! CSV schemas for raw series inputs and synthesized profiles.
//!
//! Timestamps are written as `2016-01-01T00:00:00Z`; RFC 3339 with any
//! offset and naive `YYYY-MM-DD HH:MM[:SS]` (taken as UTC) are accepted.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, Duration, NaiveDateTime, Utc};

use super::{GappyProfile, HourlyProfile, PowerCurve, ProfileError, TrackingMix, Unit, WindSample};
use crate::grid::{GenId, ZoneId};
use crate::table::{write_err, writer, Row, Table, TableError};

pub fn parse_timestamp(s: &str) -> Result<DateTime<Utc>, String> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Ok(t.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%d %H:%M:%S", "%Y-%m-%d %H:%M", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%dT%H:%M"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(t.and_utc());
        }
    }
    Err(format!("`{s}` is not a timestamp"))
}

pub fn format_timestamp(t: DateTime<Utc>) -> String {
    t.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

fn timestamp(row: &Row<'_>, column: &str) -> Result<DateTime<Utc>, TableError> {
    let raw = row.raw(column).unwrap_or("");
    parse_timestamp(raw).map_err(|e| row.error(column, e))
}

/// Orders each key's rows by time and checks they form a gapless hourly
/// series.
fn assemble<K: Ord + Clone + std::fmt::Display, V>(
    file: &str,
    rows: Vec<(K, DateTime<Utc>, V)>,
) -> Result<BTreeMap<K, (DateTime<Utc>, Vec<V>)>, ProfileError> {
    let mut grouped: BTreeMap<K, Vec<(DateTime<Utc>, V)>> = BTreeMap::new();
    for (k, t, v) in rows {
        grouped.entry(k).or_default().push((t, v));
    }
    let mut out = BTreeMap::new();
    for (k, mut series) in grouped {
        series.sort_by_key(|(t, _)| *t);
        let start = series[0].0;
        for (i, (t, _)) in series.iter().enumerate() {
            if *t != start + Duration::hours(i as i64) {
                return Err(ProfileError::Misaligned(format!(
                    "{file}: series {k} is not gapless hourly at {}",
                    format_timestamp(*t)
                )));
            }
        }
        out.insert(k, (start, series.into_iter().map(|(_, v)| v).collect()));
    }
    Ok(out)
}

/// `demand_zone.csv`: zone_id, timestamp_utc, mw (empty = missing).
pub fn read_demand_zone(path: &Path) -> Result<BTreeMap<ZoneId, GappyProfile>, ProfileError> {
    let table = Table::read(path, &["zone_id", "timestamp_utc", "mw"], &[])?;
    let mut rows = Vec::with_capacity(table.len());
    for row in table.rows() {
        rows.push((
            row.get::<ZoneId>("zone_id")?,
            timestamp(&row, "timestamp_utc")?,
            row.get_opt::<f64>("mw")?,
        ));
    }
    assemble("demand_zone.csv", rows)?
        .into_iter()
        .map(|(k, (start, values))| Ok((k, GappyProfile::new(start, values, Unit::Mw)?)))
        .collect()
}

/// `wind_uv.csv`: location, timestamp_utc, u, v (empty = missing).
pub fn read_wind_uv(path: &Path) -> Result<Vec<WindSample>, ProfileError> {
    let table = Table::read(path, &["location", "timestamp_utc", "u", "v"], &[])?;
    let mut out = Vec::with_capacity(table.len());
    for row in table.rows() {
        let u = row.get_opt::<f64>("u")?;
        let v = row.get_opt::<f64>("v")?;
        if u.is_some_and(|u| !u.is_finite()) || v.is_some_and(|v| !v.is_finite()) {
            return Err(row.error("u", "wind components must be finite").into());
        }
        out.push(WindSample {
            location: row.get("location")?,
            timestamp: timestamp(&row, "timestamp_utc")?,
            u,
            v,
        });
    }
    Ok(out)
}

/// Samples grouped by location, each group in time order.
pub fn wind_by_location(samples: Vec<WindSample>) -> BTreeMap<String, Vec<WindSample>> {
    let mut out: BTreeMap<String, Vec<WindSample>> = BTreeMap::new();
    for s in samples {
        out.entry(s.location.clone()).or_default().push(s);
    }
    for group in out.values_mut() {
        group.sort_by_key(|s| s.timestamp);
    }
    out
}

/// `irradiance.csv`: plant_id, timestamp_utc, w_per_m2.
pub fn read_irradiance(path: &Path) -> Result<BTreeMap<GenId, HourlyProfile>, ProfileError> {
    let table = Table::read(path, &["plant_id", "timestamp_utc", "w_per_m2"], &[])?;
    let mut rows = Vec::with_capacity(table.len());
    for row in table.rows() {
        rows.push((
            row.get::<GenId>("plant_id")?,
            timestamp(&row, "timestamp_utc")?,
            row.get::<f64>("w_per_m2")?,
        ));
    }
    assemble("irradiance.csv", rows)?
        .into_iter()
        .map(|(k, (start, values))| {
            Ok((k, HourlyProfile::new(start, values, Unit::WattsPerSquareMeter)?))
        })
        .collect()
}

/// `hydro_energy.csv`: plant_id, month (1–12), mwh.
pub fn read_hydro_energy(
    path: &Path,
) -> Result<BTreeMap<GenId, BTreeMap<u32, f64>>, ProfileError> {
    let table = Table::read(path, &["plant_id", "month", "mwh"], &[])?;
    let mut out: BTreeMap<GenId, BTreeMap<u32, f64>> = BTreeMap::new();
    for row in table.rows() {
        let plant: GenId = row.get("plant_id")?;
        let month: u32 = row.get("month")?;
        if !(1..=12).contains(&month) {
            return Err(row.error("month", format!("{month} is not a month")).into());
        }
        let mwh: f64 = row.get("mwh")?;
        if !(mwh >= 0.0) || !mwh.is_finite() {
            return Err(row.error("mwh", "energy must be finite and ≥ 0").into());
        }
        if out.entry(plant).or_default().insert(month, mwh).is_some() {
            return Err(row
                .error("month", format!("duplicate month {month} for plant {plant}"))
                .into());
        }
    }
    Ok(out)
}

/// `hydro_shape.csv`: timestamp_utc, value.
pub fn read_shape(path: &Path) -> Result<HourlyProfile, ProfileError> {
    let table = Table::read(path, &["timestamp_utc", "value"], &[])?;
    let mut rows = Vec::with_capacity(table.len());
    for row in table.rows() {
        rows.push(("shape", timestamp(&row, "timestamp_utc")?, row.get::<f64>("value")?));
    }
    let (start, values) = assemble("hydro_shape.csv", rows)?
        .remove("shape")
        .ok_or(ProfileError::Empty)?;
    HourlyProfile::new(start, values, Unit::Mw)
}

/// `power_curve.csv`: speed_mps, fraction. The first and last rows are the
/// cut-in and cut-out speeds.
pub fn read_power_curve(path: &Path) -> Result<PowerCurve, ProfileError> {
    let table = Table::read(path, &["speed_mps", "fraction"], &[])?;
    let mut points = Vec::with_capacity(table.len());
    for row in table.rows() {
        points.push((row.get::<f64>("speed_mps")?, row.get::<f64>("fraction")?));
    }
    PowerCurve::new(points)
}

/// `tracking_mix.csv`: interconnection, fixed, single, dual.
pub fn read_tracking_mix(path: &Path) -> Result<BTreeMap<String, TrackingMix>, ProfileError> {
    let table = Table::read(path, &["interconnection", "fixed", "single", "dual"], &[])?;
    let mut out = BTreeMap::new();
    for row in table.rows() {
        let name: String = row.get("interconnection")?;
        let mix = TrackingMix::new(row.get("fixed")?, row.get("single")?, row.get("dual")?)
            .map_err(|e| row.error("fixed", e))?;
        if out.insert(name.clone(), mix).is_some() {
            return Err(row
                .error("interconnection", format!("duplicate entry `{name}`"))
                .into());
        }
    }
    Ok(out)
}

/// `profile_<kind>.csv`: entity_id, timestamp_utc, mw.
pub fn write_profiles(
    path: &Path,
    profiles: &BTreeMap<u32, HourlyProfile>,
) -> Result<(), TableError> {
    let mut w = writer(path)?;
    w.write_record(["entity_id", "timestamp_utc", "mw"])
        .map_err(|e| write_err(path, e))?;
    for (id, p) in profiles {
        let id = id.to_string();
        for (i, v) in p.values.iter().enumerate() {
            w.write_record([id.as_str(), &format_timestamp(p.timestamp(i)), &v.to_string()])
                .map_err(|e| write_err(path, e))?;
        }
    }
    w.flush().map_err(|e| write_err(path, e.into()))
}

pub fn read_profiles(path: &Path) -> Result<BTreeMap<u32, HourlyProfile>, ProfileError> {
    let table = Table::read(path, &["entity_id", "timestamp_utc", "mw"], &[])?;
    let mut rows = Vec::with_capacity(table.len());
    for row in table.rows() {
        rows.push((
            row.get::<u32>("entity_id")?,
            timestamp(&row, "timestamp_utc")?,
            row.get::<f64>("mw")?,
        ));
    }
    let name = path
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default();
    assemble(&name, rows)?
        .into_iter()
        .map(|(k, (start, values))| Ok((k, HourlyProfile::new(start, values, Unit::Mw)?)))
        .collect()
}
