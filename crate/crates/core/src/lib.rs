//! Calibration, hourly profile synthesis and rolling-horizon DC optimal
//! power flow validation for synthetic transmission test systems.

pub mod calibration;
pub mod grid;
pub mod harness;
pub mod lp;
pub mod mpdcopf;
pub mod report;
pub mod table;
pub mod timeseries;
pub mod upgrade;

#[cfg(test)]
mod testutil;
