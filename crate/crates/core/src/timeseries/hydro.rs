use std::collections::BTreeMap;

use super::{month_of, HourlyProfile, ProfileError, Unit};

/// A hydro output series and the months that were flattened.
#[derive(Debug, Clone, PartialEq)]
pub struct HydroProfile {
    pub profile: HourlyProfile,
    pub flat_months: Vec<u32>,
}

/// Spreads each month's energy over the hours of that month following
/// `shape`.
///
/// A month falls back to constant output `E / hours` when the shaped series
/// would exceed `p_max` somewhere or the shape sums to zero; with `flat`
/// every month is constant. `shape` fixes the time axis and must not cover
/// the same calendar month twice. Months are keyed 1–12 and `E` is the
/// energy over the hours of that month present in `shape`.
pub fn hydro_profile(
    shape: &HourlyProfile,
    monthly_energy: &BTreeMap<u32, f64>,
    p_max: f64,
    flat: bool,
) -> Result<HydroProfile, ProfileError> {
    if let Some(index) = shape.values.iter().position(|v| *v < 0.0) {
        return Err(ProfileError::Negative { index });
    }
    let mut months: Vec<(u32, Vec<usize>)> = Vec::new();
    for i in 0..shape.len() {
        let m = month_of(shape.start, i);
        match months.last_mut() {
            Some((last, idx)) if *last == m => idx.push(i),
            _ => {
                if months.iter().any(|(seen, _)| *seen == m) {
                    return Err(ProfileError::Misaligned(format!(
                        "shape covers month {m} more than once"
                    )));
                }
                months.push((m, vec![i]));
            }
        }
    }

    let mut values = vec![0.0; shape.len()];
    let mut flat_months = Vec::new();
    for (m, idx) in months {
        let energy = *monthly_energy.get(&m).ok_or(ProfileError::MissingMonth(m))?;
        let hours = idx.len() as f64;
        let level = energy / hours;
        let total: f64 = idx.iter().map(|&i| shape.values[i]).sum();
        let shaped_fits = !flat
            && total > 0.0
            && idx.iter().all(|&i| shape.values[i] * energy / total <= p_max);
        if shaped_fits {
            for &i in &idx {
                values[i] = shape.values[i] * energy / total;
            }
        } else {
            if level > p_max * (1.0 + 1e-12) {
                return Err(ProfileError::InfeasibleMonth {
                    month: m,
                    flat: level,
                    p_max,
                });
            }
            for &i in &idx {
                values[i] = level;
            }
            if !flat {
                flat_months.push(m);
            }
        }
    }
    Ok(HydroProfile {
        profile: shape.with_values(values, Unit::Mw),
        flat_months,
    })
}
