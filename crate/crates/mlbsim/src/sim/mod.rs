//! Semi-dynamic network simulation: one-second correlated snapshots driving
//! arrivals, mobility, margin control, PRB scheduling, transmission,
//! handovers, departures, and KPI accounting.

mod engine;
mod kpi;

pub use engine::{best_server, fcfs_allocation, run, run_with_observer, SnapshotView, UserSession};
pub use kpi::{HmPairStat, KpiReport};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::{ControlError, DynamicSampler, HmMatrix};
use crate::net::NetError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error("non-finite KPI: {0}")]
    NonFinite(String),
}

/// Traffic, mobility, and measurement parameters of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub snapshot_dt_s: f64,
    /// Poisson arrival rate over the whole area, 1/s.
    pub arrival_rate_per_s: f64,
    pub mobile_fraction: f64,
    pub speed_kmh: f64,
    /// Received-pilot floor for admission and handover targets.
    pub ho_power_threshold_dbm: f64,
    pub hysteresis_db: f64,
    pub duration_s: f64,
    /// Leading interval excluded from every KPI.
    pub warmup_s: f64,
    /// Trailing window for the load estimate fed to the controller.
    pub load_window_s: f64,
    pub file_size_bits: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            snapshot_dt_s: 1.0,
            arrival_rate_per_s: 5.0,
            mobile_fraction: 0.4,
            speed_kmh: 30.0,
            ho_power_threshold_dbm: -110.0,
            hysteresis_db: 0.0,
            duration_s: 2000.0,
            warmup_s: 0.0,
            load_window_s: 10.0,
            file_size_bits: 10_000_000,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let err = |m: String| Err(SimError::Config(m));
        if !(self.snapshot_dt_s > 0.0) || !self.snapshot_dt_s.is_finite() {
            return err(format!("snapshot_dt {} must be > 0", self.snapshot_dt_s));
        }
        if !(self.arrival_rate_per_s >= 0.0) || !self.arrival_rate_per_s.is_finite() {
            return err(format!("arrival_rate {} must be >= 0", self.arrival_rate_per_s));
        }
        if !(0.0..=1.0).contains(&self.mobile_fraction) {
            return err(format!("mobile_fraction {} must be in [0, 1]", self.mobile_fraction));
        }
        if !(self.speed_kmh >= 0.0) || !self.speed_kmh.is_finite() {
            return err(format!("speed {} must be >= 0", self.speed_kmh));
        }
        if !self.ho_power_threshold_dbm.is_finite() || !self.hysteresis_db.is_finite() {
            return err("threshold and hysteresis must be finite".to_string());
        }
        if !(self.duration_s >= self.snapshot_dt_s) {
            return err(format!("duration {} must cover one snapshot", self.duration_s));
        }
        if !(0.0..self.duration_s).contains(&self.warmup_s) {
            return err(format!("warmup {} must be in [0, duration)", self.warmup_s));
        }
        if !(self.load_window_s >= self.snapshot_dt_s) {
            return err(format!("load_window {} must cover one snapshot", self.load_window_s));
        }
        if self.file_size_bits == 0 {
            return err("file_size must be > 0".to_string());
        }
        Ok(())
    }
}

/// The margin source for a run: a frozen matrix or a periodic sampler.
#[derive(Debug, Clone)]
pub enum Controller {
    Fixed(HmMatrix),
    Dynamic(DynamicSampler),
}

impl Controller {
    pub fn matrix(&self) -> &HmMatrix {
        match self {
            Controller::Fixed(m) => m,
            Controller::Dynamic(s) => s.current(),
        }
    }

    /// Advances the dynamic sampler; fixed controllers never change.
    pub fn maybe_update(&mut self, clock_s: f64, windowed_loads: &[f64]) -> bool {
        match self {
            Controller::Fixed(_) => false,
            Controller::Dynamic(s) => s.maybe_update(clock_s, windowed_loads),
        }
    }
}
