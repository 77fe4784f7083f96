use std::collections::BTreeMap;

use chrono::{DateTime, Datelike, Timelike, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::{HourlyProfile, ProfileError, Unit};

/// Wind components at hub height; `None` marks a missing reading.
#[derive(Debug, Clone, PartialEq)]
pub struct WindSample {
    pub location: String,
    pub timestamp: DateTime<Utc>,
    pub u: Option<f64>,
    pub v: Option<f64>,
}

impl WindSample {
    pub fn is_missing(&self) -> bool {
        self.u.is_none() || self.v.is_none()
    }

    pub fn speed(&self) -> Option<f64> {
        Some(self.u?.hypot(self.v?))
    }
}

type Key = (String, u32, u32);

fn key(s: &WindSample) -> Key {
    (s.location.clone(), s.timestamp.month(), s.timestamp.hour())
}

/// Fills each missing U or V with a uniform draw between the extremes of
/// the same component over samples sharing location, month and hour of day.
///
/// Every key has its own random stream derived from `seed`, so the result
/// does not depend on sample order across keys.
pub fn impute_wind_uv(samples: &[WindSample], seed: u64) -> Result<Vec<WindSample>, ProfileError> {
    let mut ranges: BTreeMap<Key, [Option<(f64, f64)>; 2]> = BTreeMap::new();
    for s in samples {
        let entry = ranges.entry(key(s)).or_default();
        for (slot, value) in entry.iter_mut().zip([s.u, s.v]) {
            if let Some(x) = value {
                *slot = Some(match *slot {
                    Some((lo, hi)) => (lo.min(x), hi.max(x)),
                    None => (x, x),
                });
            }
        }
    }
    let mut rngs: BTreeMap<Key, ChaCha8Rng> = BTreeMap::new();
    let mut out = samples.to_vec();
    for s in &mut out {
        if !s.is_missing() {
            continue;
        }
        let k = key(s);
        let bounds = ranges[&k];
        let rng = rngs.entry(k.clone()).or_insert_with(|| key_rng(seed, &k));
        for (component, range) in [&mut s.u, &mut s.v].into_iter().zip(bounds) {
            if component.is_some() {
                continue;
            }
            let (lo, hi) = range.ok_or_else(|| ProfileError::NoWindDonor {
                location: k.0.clone(),
                month: k.1,
                hour: k.2,
            })?;
            *component = Some(if lo == hi { lo } else { rng.random_range(lo..=hi) });
        }
    }
    Ok(out)
}

fn key_rng(seed: u64, (location, month, hour): &Key) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((location.len() as u64).to_le_bytes());
    h.update(location.as_bytes());
    h.update(month.to_le_bytes());
    h.update(hour.to_le_bytes());
    let digest: [u8; 32] = h.finalize().into();
    ChaCha8Rng::from_seed(digest)
}

/// Turbine output as a fraction of rating against hub-height wind speed.
/// The first point is the cut-in speed and the last the cut-out speed;
/// output is zero outside `[cut_in, cut_out)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerCurve {
    points: Vec<(f64, f64)>,
    pub cut_in: f64,
    pub cut_out: f64,
}

impl PowerCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, ProfileError> {
        if points.len() < 2 {
            return Err(ProfileError::BadCurve("needs at least two points".into()));
        }
        if points.iter().any(|(s, f)| !s.is_finite() || !(0.0..=1.0).contains(f)) {
            return Err(ProfileError::BadCurve(
                "fractions must lie in [0, 1] at finite speeds".into(),
            ));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(ProfileError::BadCurve("speeds must increase strictly".into()));
        }
        if points[0].0 < 0.0 {
            return Err(ProfileError::BadCurve("speeds must be ≥ 0".into()));
        }
        Ok(PowerCurve {
            cut_in: points[0].0,
            cut_out: points[points.len() - 1].0,
            points,
        })
    }

    /// Cubic rise from 3 m/s to rated output at 14 m/s, flat to cut-out at
    /// 25 m/s.
    pub fn iec_class2() -> Self {
        let mut points: Vec<(f64, f64)> = (3..14)
            .map(|s| {
                let x = (s as f64 - 3.0) / 11.0;
                (s as f64, x * x * x)
            })
            .collect();
        points.push((14.0, 1.0));
        points.push((25.0, 1.0));
        PowerCurve::new(points).expect("static curve is valid")
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn fraction(&self, speed: f64) -> f64 {
        if !(speed >= self.cut_in) || speed >= self.cut_out {
            return 0.0;
        }
        let i = self.points.partition_point(|p| p.0 <= speed);
        let (s0, f0) = self.points[i - 1];
        let (s1, f1) = self.points[i];
        f0 + (f1 - f0) * (speed - s0) / (s1 - s0)
    }
}

impl Default for PowerCurve {
    fn default() -> Self {
        PowerCurve::iec_class2()
    }
}

pub fn wind_power(u: f64, v: f64, curve: &PowerCurve, p_max: f64) -> f64 {
    p_max * curve.fraction(u.hypot(v))
}

/// Output series of one turbine site from complete, time-ordered samples.
pub fn wind_profile(
    samples: &[WindSample],
    curve: &PowerCurve,
    p_max: f64,
) -> Result<HourlyProfile, ProfileError> {
    let first = samples.first().ok_or(ProfileError::Empty)?;
    let mut values = Vec::with_capacity(samples.len());
    for (i, s) in samples.iter().enumerate() {
        if s.timestamp != first.timestamp + chrono::Duration::hours(i as i64) {
            return Err(ProfileError::Misaligned(format!(
                "wind samples for {} are not hourly at {}",
                s.location, s.timestamp
            )));
        }
        let (u, v) = s.u.zip(s.v).ok_or(ProfileError::NoDonorData { index: i })?;
        values.push(wind_power(u, v, curve, p_max));
    }
    HourlyProfile::new(first.timestamp, values, Unit::Mw)
}
