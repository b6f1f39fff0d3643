//! Appliance-level household response to hourly incentives.
//!
//! Power-controllable appliances curtail to a discrete level every hour;
//! time-shiftable ones are rescheduled at most once per day; the rest of the
//! demand is inflexible.

mod fleet;
mod pc;
mod response;
mod ts;

pub use fleet::{ApplianceTemplate, Fleet, FleetConfig, BETA_FLOOR};
pub use pc::{pc_best_response, pc_cost, pc_delta};
pub use response::{HourResponse, HouseholdDay, HouseholdState};
pub use ts::{schedule_ts_i, schedule_ts_ni, ts_cost, BlockSpec, ChargeSpec, DayProfile, ShiftDecision};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum HouseholdError {
    #[error("curtailment level {q} outside 0..={m}")]
    Level { q: u32, m: u32 },
    #[error("household configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ApplianceKind {
    /// Curtailable to `levels` discrete fractions of its hourly demand.
    PowerControllable { levels: u32 },
    /// Runs as one contiguous block inside `[earliest, deadline]`.
    ShiftableBlock { block_length: usize, earliest: usize, deadline: usize },
    /// Can be spread over its window at up to `max_rate` kW.
    ShiftableInterruptible { max_rate: f64, earliest: usize, deadline: usize },
    NonShiftable,
}

impl ApplianceKind {
    pub fn category(&self) -> &'static str {
        match self {
            ApplianceKind::PowerControllable { .. } => "pc",
            ApplianceKind::ShiftableBlock { .. } => "ts-ni",
            ApplianceKind::ShiftableInterruptible { .. } => "ts-i",
            ApplianceKind::NonShiftable => "ns",
        }
    }

    pub fn is_shiftable(&self) -> bool {
        matches!(self, ApplianceKind::ShiftableBlock { .. } | ApplianceKind::ShiftableInterruptible { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Appliance {
    pub name: String,
    pub kind: ApplianceKind,
    /// ¢/kWh² for curtailment, ¢/h² for delay.
    pub beta: f64,
}

impl Appliance {
    pub fn validate(&self) -> Result<(), HouseholdError> {
        let bad = |why: &str| Err(HouseholdError::Config(format!("appliance {}: {why}", self.name)));
        if self.kind != ApplianceKind::NonShiftable && !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad("dissatisfaction coefficient must be positive");
        }
        match self.kind {
            ApplianceKind::PowerControllable { levels } if levels == 0 => bad("needs at least one curtailment level"),
            ApplianceKind::ShiftableBlock { block_length, earliest, deadline }
                if block_length == 0 || deadline >= crate::data::HOURS_PER_DAY || deadline + 1 < earliest + block_length =>
            {
                bad("block does not fit its window")
            }
            ApplianceKind::ShiftableInterruptible { max_rate, earliest, deadline }
                if !(max_rate > 0.0) || deadline >= crate::data::HOURS_PER_DAY || earliest > deadline =>
            {
                bad("invalid charging window or rate")
            }
            _ => Ok(()),
        }
    }
}

/// An end user and its appliance set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Household {
    pub id: String,
    pub appliances: Vec<Appliance>,
}
