//! One-step LSTM forecasters of price and per-household load.
//!
//! Each hour is described by five calendar fields and nine lags of the
//! target; a window of these vectors is fed to a stacked LSTM whose last
//! hidden state is read out linearly. Day-ahead trajectories are produced by
//! rolling the one-step forecast over the 24 hours.

mod features;
mod model;
mod train;

pub use features::{build_features, FeatureVector, MinMax, LAGS, LAG_OFFSET, MAX_LAG, N_FEATURES};
pub use model::{evaluate_forecast, first_forecastable_index, forecast_day, AccuracyReport, Forecaster, OneStepModel, RollMode};
pub use train::{train_forecaster, ForecastConfig, TrainReport};

use crate::neural::NeuralError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ForecastError {
    #[error("insufficient history at hour index {index}: {required_lag} earlier hours are required")]
    InsufficientHistory { index: usize, required_lag: usize },
    #[error("non-finite value{}: {detail}", .epoch.map(|e| format!(" in epoch {e}")).unwrap_or_default())]
    NonFinite { epoch: Option<usize>, detail: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Neural(#[from] NeuralError),
}
