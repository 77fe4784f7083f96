use std::collections::BTreeMap;

use chrono::{DateTime, Datelike, Duration, Utc, Weekday};

use super::{GappyProfile, HourlyProfile, ProfileError};
use crate::grid::BusId;

/// Splits a zonal demand series over buses in proportion to their weights.
pub fn disaggregate_demand(
    zone_profile: &HourlyProfile,
    buses: &[(BusId, f64)],
) -> Result<BTreeMap<BusId, HourlyProfile>, ProfileError> {
    if let Some((id, _)) = buses.iter().find(|(_, w)| !(*w >= 0.0)) {
        return Err(ProfileError::NegativeWeight(*id));
    }
    let total: f64 = buses.iter().map(|(_, w)| w).sum();
    if total <= 0.0 {
        return Err(ProfileError::ZeroTotalWeight);
    }
    Ok(buses
        .iter()
        .map(|&(id, w)| {
            let share = w / total;
            let values = zone_profile.values.iter().map(|z| z * share).collect();
            (id, zone_profile.with_values(values, zone_profile.unit))
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DayKind {
    Weekday,
    Weekend,
}

/// Weekday/weekend label of each 24-hour block of a profile, counted from
/// the profile start. Holidays can be labelled as weekend days.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Calendar {
    pub days: Vec<DayKind>,
}

impl Calendar {
    pub fn new(days: Vec<DayKind>) -> Self {
        Calendar { days }
    }

    /// Saturdays and Sundays are weekend days; each block takes the
    /// weekday of its first hour.
    pub fn utc(start: DateTime<Utc>, hours: usize) -> Self {
        let days = hours.div_ceil(24);
        Calendar {
            days: (0..days)
                .map(|d| match (start + Duration::days(d as i64)).weekday() {
                    Weekday::Sat | Weekday::Sun => DayKind::Weekend,
                    _ => DayKind::Weekday,
                })
                .collect(),
        }
    }

    fn kind(&self, day: usize) -> Option<DayKind> {
        self.days.get(day).copied()
    }

    /// Day range `[first, last]` of the weekend run containing `day`.
    fn weekend_run(&self, day: usize) -> (usize, usize) {
        let mut first = day;
        while first > 0 && self.kind(first - 1) == Some(DayKind::Weekend) {
            first -= 1;
        }
        let mut last = day;
        while self.kind(last + 1) == Some(DayKind::Weekend) {
            last += 1;
        }
        (first, last)
    }
}

/// Fills missing hours from donor days with original data at the same hour
/// of day.
///
/// A weekday hole takes the mean of the nearest preceding and following
/// weekdays with data. A weekend hole copies the other days of its weekend;
/// when the whole weekend is missing, the nearest earlier and later weekends
/// with data are averaged per weekend and then together.
///
/// Returns the completed profile and the number of hours filled.
pub fn impute_missing_demand(
    p: &GappyProfile,
    calendar: &Calendar,
) -> Result<(HourlyProfile, usize), ProfileError> {
    let n = p.values.len();
    if calendar.days.len() * 24 < n {
        return Err(ProfileError::Misaligned(format!(
            "calendar covers {} days, profile needs {}",
            calendar.days.len(),
            n.div_ceil(24)
        )));
    }
    let at = |day: usize, hour: usize| p.values.get(day * 24 + hour).copied().flatten();
    let mut filled = 0;
    let mut out = Vec::with_capacity(n);
    for (i, v) in p.values.iter().enumerate() {
        if let Some(v) = v {
            out.push(*v);
            continue;
        }
        let (day, hour) = (i / 24, i % 24);
        let value = match calendar.days[day] {
            DayKind::Weekday => {
                let is_donor = |d: usize| calendar.days[d] == DayKind::Weekday && at(d, hour).is_some();
                let before = (0..day).rev().find(|&d| is_donor(d));
                let after = (day + 1..calendar.days.len()).find(|&d| is_donor(d));
                mean(before.into_iter().chain(after).filter_map(|d| at(d, hour)))
            }
            DayKind::Weekend => {
                let (first, last) = calendar.weekend_run(day);
                mean((first..=last).filter(|&d| d != day).filter_map(|d| at(d, hour))).or_else(
                    || {
                        let earlier = adjacent_weekend(calendar, first, hour, &at, false);
                        let later = adjacent_weekend(calendar, last, hour, &at, true);
                        mean(earlier.into_iter().chain(later))
                    },
                )
            }
        };
        match value {
            Some(v) => {
                out.push(v);
                filled += 1;
            }
            None => return Err(ProfileError::NoDonorData { index: i }),
        }
    }
    Ok((
        HourlyProfile {
            start: p.start,
            values: out,
            unit: p.unit,
        },
        filled,
    ))
}

/// Mean at `hour` over the nearest weekend before (or after) the run edge
/// `edge` that has any data at that hour.
fn adjacent_weekend(
    calendar: &Calendar,
    edge: usize,
    hour: usize,
    at: &dyn Fn(usize, usize) -> Option<f64>,
    forward: bool,
) -> Option<f64> {
    let mut day = edge;
    loop {
        day = if forward {
            day + 1
        } else {
            day.checked_sub(1)?
        };
        calendar.kind(day)?;
        if calendar.days[day] != DayKind::Weekend {
            continue;
        }
        let (first, last) = calendar.weekend_run(day);
        if let Some(m) = mean((first..=last).filter_map(|d| at(d, hour))) {
            return Some(m);
        }
        day = if forward { last } else { first };
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Hours whose incoming ramp `|p_t − p_{t−1}|` exceeds the mean ramp by more
/// than `k` population standard deviations of all ramps.
///
/// A spike produces two large ramps; only the first (the spike hour) is
/// flagged, since a ramp leaving a flagged hour is its recovery.
pub fn detect_anomalies(p: &HourlyProfile, k: f64) -> Result<Vec<usize>, ProfileError> {
    let n = p.values.len();
    if n < 3 {
        return Err(ProfileError::TooShort { len: n });
    }
    let ramps: Vec<f64> = p.values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let m = ramps.len() as f64;
    let mean = ramps.iter().sum::<f64>() / m;
    let var = ramps.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / m;
    let threshold = mean + k * var.sqrt();
    if threshold.is_nan() || threshold == f64::INFINITY {
        return Ok(Vec::new());
    }
    let mut flagged: Vec<usize> = Vec::new();
    for (j, r) in ramps.iter().enumerate() {
        let t = j + 1;
        if *r > threshold && flagged.last() != Some(&(t - 1)) {
            flagged.push(t);
        }
    }
    Ok(flagged)
}

/// Replaces flagged hours by linear interpolation between the nearest
/// unflagged neighbors. A run touching either end of the profile holds the
/// single available neighbor.
pub fn interpolate_anomalies(
    p: &HourlyProfile,
    flagged: &[usize],
) -> Result<HourlyProfile, ProfileError> {
    let n = p.values.len();
    let mut bad = vec![false; n];
    for &i in flagged {
        if i >= n {
            return Err(ProfileError::IndexOutOfRange { index: i, len: n });
        }
        bad[i] = true;
    }
    let mut values = p.values.clone();
    let mut i = 0;
    while i < n {
        if !bad[i] {
            i += 1;
            continue;
        }
        let mut j = i;
        while j < n && bad[j] {
            j += 1;
        }
        let left = i.checked_sub(1).map(|l| (l, p.values[l]));
        let right = (j < n).then(|| (j, p.values[j]));
        for (t, slot) in values.iter_mut().enumerate().take(j).skip(i) {
            *slot = match (left, right) {
                (Some((l, a)), Some((r, b))) => a + (b - a) * (t - l) as f64 / (r - l) as f64,
                (Some((_, a)), None) => a,
                (None, Some((_, b))) => b,
                (None, None) => return Err(ProfileError::NoValidNeighbor { index: t }),
            };
        }
        i = j;
    }
    Ok(p.with_values(values, p.unit))
}
