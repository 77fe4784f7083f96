//! Hourly demand, wind, solar and hydro profiles: disaggregation of zonal
//! demand to buses, gap filling, ramp-anomaly cleaning and resource to
//! power conversion.
//!
//! All timestamps are UTC. A profile stores its first hour and a dense
//! vector of values; hour `i` is `start + i h`.

mod demand;
mod hydro;
pub mod io;
mod solar;
mod wind;

use chrono::{DateTime, Datelike, Duration, Timelike, Utc};
use thiserror::Error;

use crate::grid::BusId;
use crate::table::TableError;

pub use demand::{
    detect_anomalies, disaggregate_demand, impute_missing_demand, interpolate_anomalies, Calendar,
    DayKind,
};
pub use hydro::{hydro_profile, HydroProfile};
pub use solar::{solar_power, ArrayGains, TrackingMix};
pub use wind::{impute_wind_uv, wind_power, wind_profile, PowerCurve, WindSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Mw,
    WattsPerSquareMeter,
    MetersPerSecond,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HourlyProfile {
    pub start: DateTime<Utc>,
    pub values: Vec<f64>,
    pub unit: Unit,
}

impl HourlyProfile {
    pub fn new(start: DateTime<Utc>, values: Vec<f64>, unit: Unit) -> Result<Self, ProfileError> {
        check_start(start)?;
        if values.is_empty() {
            return Err(ProfileError::Empty);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(ProfileError::NonFinite { index });
        }
        Ok(HourlyProfile {
            start,
            values,
            unit,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn timestamp(&self, index: usize) -> DateTime<Utc> {
        self.start + Duration::hours(index as i64)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Same time axis, new values.
    pub fn with_values(&self, values: Vec<f64>, unit: Unit) -> HourlyProfile {
        debug_assert_eq!(values.len(), self.values.len());
        HourlyProfile {
            start: self.start,
            values,
            unit,
        }
    }
}

/// A profile with missing hours, as read from raw data.
#[derive(Debug, Clone, PartialEq)]
pub struct GappyProfile {
    pub start: DateTime<Utc>,
    pub values: Vec<Option<f64>>,
    pub unit: Unit,
}

impl GappyProfile {
    pub fn new(
        start: DateTime<Utc>,
        values: Vec<Option<f64>>,
        unit: Unit,
    ) -> Result<Self, ProfileError> {
        check_start(start)?;
        if values.is_empty() {
            return Err(ProfileError::Empty);
        }
        if let Some(index) = values.iter().position(|v| v.is_some_and(|v| !v.is_finite())) {
            return Err(ProfileError::NonFinite { index });
        }
        Ok(GappyProfile {
            start,
            values,
            unit,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// The complete profile, if nothing is missing.
    pub fn complete(&self) -> Option<HourlyProfile> {
        let values: Option<Vec<f64>> = self.values.iter().copied().collect();
        values.map(|values| HourlyProfile {
            start: self.start,
            values,
            unit: self.unit,
        })
    }
}

impl From<HourlyProfile> for GappyProfile {
    fn from(p: HourlyProfile) -> Self {
        GappyProfile {
            start: p.start,
            values: p.values.into_iter().map(Some).collect(),
            unit: p.unit,
        }
    }
}

fn check_start(start: DateTime<Utc>) -> Result<(), ProfileError> {
    if start.minute() != 0 || start.second() != 0 || start.nanosecond() != 0 {
        Err(ProfileError::NotHourAligned(start))
    } else {
        Ok(())
    }
}

/// Calendar month (1–12) of hour `index` of a profile starting at `start`.
pub(crate) fn month_of(start: DateTime<Utc>, index: usize) -> u32 {
    (start + Duration::hours(index as i64)).month()
}

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("profile is empty")]
    Empty,
    #[error("profile start {0} is not on the hour")]
    NotHourAligned(DateTime<Utc>),
    #[error("non-finite value at hour {index}")]
    NonFinite { index: usize },
    #[error("negative value at hour {index}")]
    Negative { index: usize },
    #[error("population weights sum to zero")]
    ZeroTotalWeight,
    #[error("bus {0} has a negative weight")]
    NegativeWeight(BusId),
    #[error("no donor data to fill hour {index}")]
    NoDonorData { index: usize },
    #[error("no donor wind data for location {location}, month {month}, hour {hour}")]
    NoWindDonor {
        location: String,
        month: u32,
        hour: u32,
    },
    #[error("profile of length {len} is too short for ramp statistics")]
    TooShort { len: usize },
    #[error("flagged hour {index} has no unflagged neighbor")]
    NoValidNeighbor { index: usize },
    #[error("flagged hour {index} is outside a profile of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("tracking mix {0}")]
    BadMix(String),
    #[error("power curve {0}")]
    BadCurve(String),
    #[error("no energy given for month {0}")]
    MissingMonth(u32),
    #[error("month {month}: flat output {flat} MW exceeds capacity {p_max} MW")]
    InfeasibleMonth { month: u32, flat: f64, p_max: f64 },
    #[error("{0}")]
    Misaligned(String),
    #[error(transparent)]
    Table(#[from] TableError),
}
