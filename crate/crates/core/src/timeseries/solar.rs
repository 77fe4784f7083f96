use super::{HourlyProfile, ProfileError, Unit};

/// Capacity shares of fixed-tilt, single-axis and dual-axis arrays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingMix {
    pub fixed: f64,
    pub single_axis: f64,
    pub dual_axis: f64,
}

impl TrackingMix {
    pub fn new(fixed: f64, single_axis: f64, dual_axis: f64) -> Result<Self, ProfileError> {
        let shares = [fixed, single_axis, dual_axis];
        if shares.iter().any(|s| !(*s >= 0.0)) {
            return Err(ProfileError::BadMix(format!(
                "shares {shares:?} must be nonnegative"
            )));
        }
        let total: f64 = shares.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(ProfileError::BadMix(format!("shares sum to {total}, not 1")));
        }
        Ok(TrackingMix {
            fixed,
            single_axis,
            dual_axis,
        })
    }

    /// Regional default: the tracking share is all single-axis.
    pub fn for_interconnection(name: &str) -> Option<Self> {
        let fixed = match name.to_ascii_lowercase().as_str() {
            "eastern" => 0.67,
            "western" => 0.24,
            "texas" | "ercot" => 0.08,
            _ => return None,
        };
        Some(TrackingMix {
            fixed,
            single_axis: 1.0 - fixed,
            dual_axis: 0.0,
        })
    }
}

/// Output per unit of plane-of-array irradiance fraction for each array type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGains {
    pub fixed: f64,
    pub single_axis: f64,
    pub dual_axis: f64,
}

impl Default for ArrayGains {
    fn default() -> Self {
        ArrayGains {
            fixed: 0.85,
            single_axis: 0.95,
            dual_axis: 1.0,
        }
    }
}

/// Plant output from irradiance: each array type contributes
/// `gain × clamp(irradiance / 1000, 0, 1.1)` weighted by its share, and the
/// total is clipped to `[0, p_max]`.
pub fn solar_power(
    irradiance: &HourlyProfile,
    mix: &TrackingMix,
    p_max: f64,
    gains: &ArrayGains,
) -> Result<HourlyProfile, ProfileError> {
    let mix = TrackingMix::new(mix.fixed, mix.single_axis, mix.dual_axis)?;
    let gain =
        mix.fixed * gains.fixed + mix.single_axis * gains.single_axis + mix.dual_axis * gains.dual_axis;
    let values = irradiance
        .values
        .iter()
        .map(|w| {
            let x = (w / 1000.0).clamp(0.0, 1.1);
            (p_max * gain * x).clamp(0.0, p_max)
        })
        .collect();
    Ok(irradiance.with_values(values, Unit::Mw))
}
