//! Day-long incentive market between the service provider and its
//! households, stepped hour by hour.
//!
//! Each step decodes a joint action into per-household incentive rates,
//! collects the households' responses against the current aggregate load
//! and pays out a reward combining the provider's margin, the households'
//! weighted benefit and a capacity-tracking shaping term.

mod action;
mod env;
mod shaping;
mod trace;

pub use action::{ActionSpace, MAX_RATE_FRACTION};
pub use env::{capacity_threshold, DayScenario, EnvConfig, EnvState, MarketEnv, StepInfo, StepResult, LOAD_SCALE, PRICE_SCALE, STATE_DIM};
pub use shaping::{shaping, Shaping, ShapingConfig};
pub use trace::{read_trace, write_trace, EpisodeTrace};

use crate::data::DataError;
use crate::household::HouseholdError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("action {index} outside 0..{n_actions}")]
    Action { index: usize, n_actions: usize },
    #[error("episode finished; call reset first")]
    Finished,
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Household(#[from] HouseholdError),
    #[error(transparent)]
    Data(#[from] DataError),
}
