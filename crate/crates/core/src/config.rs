//! Run configuration: a single TOML document covering every stage.
//!
//! Every key has a compiled-in default, so an empty file is a valid
//! configuration. [`CONFIG_KEYS`] lists each key with the origin of its
//! default and backs the command-line help.

use crate::agent::AgentConfig;
use crate::benchmark::EblrConfig;
use crate::data::SynthConfig;
use crate::forecast::ForecastConfig;
use crate::household::FleetConfig;
use crate::market_env::EnvConfig;
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    /// Hourly series CSV; when absent the run uses synthetic data from `[synth]`.
    pub data: Option<PathBuf>,
    /// One ISO date per line; when absent US federal holidays of 2018 are used.
    pub holidays: Option<PathBuf>,
    pub output: PathBuf,
    pub checkpoints: PathBuf,
}

impl Default for PathsConfig {
    fn default() -> Self {
        Self { data: None, holidays: None, output: "out".into(), checkpoints: "checkpoints".into() }
    }
}

/// Which values drive the simulated days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioInput {
    /// Day-ahead forecasts of price and load (requires trained forecasters).
    #[default]
    Forecast,
    /// Recorded prices and loads.
    Actual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub test_start: NaiveDate,
    pub test_end: NaiveDate,
    /// Days right before the test window held out for greedy validation.
    pub validation_days: usize,
    /// Evaluation day; defaults to the test day with the highest aggregate peak.
    pub eval_date: Option<NaiveDate>,
    pub scenario: ScenarioInput,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            test_start: NaiveDate::from_ymd_opt(2018, 7, 1).expect("valid date"),
            test_end: NaiveDate::from_ymd_opt(2018, 7, 31).expect("valid date"),
            validation_days: 3,
            eval_date: None,
            scenario: ScenarioInput::Forecast,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub rhos: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { rhos: vec![0.1, 0.3, 0.5, 0.7, 0.9] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub paths: PathsConfig,
    pub data: DataConfig,
    pub synth: SynthConfig,
    pub forecast: ForecastConfig,
    pub fleet: FleetConfig,
    pub env: EnvConfig,
    pub agent: AgentConfig,
    pub eblr: EblrConfig,
    pub sweep: SweepConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            paths: PathsConfig::default(),
            data: DataConfig::default(),
            synth: SynthConfig::default(),
            forecast: ForecastConfig::default(),
            fleet: FleetConfig::default(),
            env: EnvConfig::default(),
            agent: AgentConfig::default(),
            eblr: EblrConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        let cfg = Self::from_toml(&text).map_err(|message| ConfigError::Parse { path: path.into(), message })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.data.test_end < self.data.test_start {
            return bad(format!("test window {}..{} is empty", self.data.test_start, self.data.test_end));
        }
        if !(0.0..=1.0).contains(&self.env.rho) {
            return bad(format!("rho must lie in [0, 1], got {}", self.env.rho));
        }
        if let Some(c) = self.env.capacity {
            if !(c.is_finite() && c > 0.0) {
                return bad(format!("capacity override must be positive, got {c}"));
            }
        }
        if self.env.levels < 2 {
            return bad(format!("at least two incentive levels are needed, got {}", self.env.levels));
        }
        if self.synth.days == 0 || self.synth.households == 0 {
            return bad("synthetic data needs at least one day and one household".into());
        }
        if self.sweep.rhos.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return bad("sweep rhos must lie in [0, 1]".into());
        }
        self.fleet.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.agent.validate().map_err(|e| ConfigError::Invalid(e.to_string()))
    }
}

/// Where a default comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Value of the reference experimental setup.
    Reference,
    /// Chosen for this implementation.
    Choice,
}

impl Provenance {
    pub fn label(self) -> &'static str {
        match self {
            Provenance::Reference => "reference setting",
            Provenance::Choice => "implementation choice",
        }
    }
}

use Provenance::{Choice, Reference};

/// Every configuration key, the origin of its default and a short description.
pub const CONFIG_KEYS: &[(&str, Provenance, &str)] = &[
    ("seed", Choice, "master seed for fleet sampling, forecasters and the agent"),
    ("paths.data", Choice, "hourly series CSV; synthetic data when absent"),
    ("paths.holidays", Choice, "holiday list, one ISO date per line"),
    ("paths.output", Choice, "directory for CSV reports and traces"),
    ("paths.checkpoints", Choice, "directory for model checkpoints"),
    ("data.test_start", Reference, "first test day"),
    ("data.test_end", Reference, "last test day"),
    ("data.validation_days", Reference, "held-out days before the test window for greedy validation"),
    ("data.eval_date", Choice, "evaluation day; default is the test day with the highest aggregate peak"),
    ("data.scenario", Choice, "forecast | actual: values that drive the simulated days"),
    ("synth.seed", Choice, "synthetic data seed"),
    ("synth.days", Reference, "synthetic days (a summer half-year)"),
    ("synth.households", Reference, "synthetic households"),
    ("synth.start", Choice, "first synthetic day"),
    ("synth.noise", Choice, "scale of all stochastic components; 0 gives a periodic signal"),
    ("forecast.lstm_layers", Reference, "stacked LSTM layers"),
    ("forecast.hidden_units", Reference, "units per LSTM layer"),
    ("forecast.dropout", Reference, "dropout rate between layers and before the head"),
    ("forecast.window", Reference, "input window in hours"),
    ("forecast.horizon", Reference, "steps ahead (only 1)"),
    ("forecast.learning_rate", Choice, "Adam learning rate"),
    ("forecast.batch_size", Choice, "minibatch size"),
    ("forecast.max_epochs", Reference, "epoch limit"),
    ("forecast.patience", Reference, "early-stopping patience in epochs"),
    ("forecast.validation_fraction", Choice, "trailing share of training samples used for early stopping"),
    ("fleet.appliances", Reference, "appliance templates (category pc | ts-ni | ts-i | ns) with beta_mean/beta_std"),
    ("fleet.appliances[].split", Choice, "demand split fields: share, block_length, block_energy, daily_energy, max_rate, max_share, windows"),
    ("env.rho", Reference, "household benefit weight against discomfort"),
    ("env.levels", Reference, "incentive levels per household"),
    ("env.capacity_fraction", Reference, "capacity as a share of the mean daily aggregate peak"),
    ("env.capacity", Choice, "fixed capacity override in kW"),
    ("env.shaping.idle_bonus", Reference, "bonus for no incentive when no reduction is needed"),
    ("env.shaping.needless_penalty", Reference, "penalty per unit of needless incentive"),
    ("env.shaping.miss_penalty", Reference, "penalty per kW of missing reduction"),
    ("env.shaping.over_penalty", Reference, "penalty per kW of excess reduction"),
    ("agent.gamma", Reference, "discount factor"),
    ("agent.learning_rate", Reference, "Adam learning rate"),
    ("agent.batch_size", Reference, "minibatch size"),
    ("agent.buffer_capacity", Reference, "replay buffer size"),
    ("agent.epsilon_start", Reference, "initial exploration rate"),
    ("agent.epsilon_min", Reference, "exploration floor"),
    ("agent.epsilon_decay", Reference, "per-episode exploration decay"),
    ("agent.tau", Reference, "soft target update rate"),
    ("agent.hidden", Reference, "hidden layer widths"),
    ("agent.episodes", Reference, "training episodes"),
    ("agent.warmup", Choice, "transitions stored before the first update"),
    ("agent.huber_delta", Choice, "Huber loss threshold"),
    ("agent.grad_clip", Choice, "global gradient norm limit"),
    ("agent.validation_every", Choice, "episodes between greedy validations"),
    ("eblr.elasticity.off_peak", Reference, "elasticity for hours 1-6 and 22-24"),
    ("eblr.elasticity.mid_peak", Reference, "elasticity for hours 7-16"),
    ("eblr.elasticity.on_peak", Reference, "elasticity for hours 17-21"),
    ("eblr.mu", Reference, "per-household position inside the incentive band"),
    ("eblr.omega", Reference, "carried parameter without effect on the response"),
    ("eblr.k_min_fraction", Reference, "lower reduction bound as a share of demand"),
    ("eblr.k_max_fraction", Reference, "upper reduction bound as a share of demand"),
    ("eblr.lambda_min_fraction", Reference, "band floor as a share of the day's lowest price"),
    ("eblr.lambda_max_fraction", Reference, "band ceiling as a share of the day's lowest price"),
    ("eblr.denominator", Choice, "lambda-min | band: divisor of the incentive excess"),
    ("sweep.rhos", Reference, "values of rho for sweep-rho"),
];

/// Help text listing [`CONFIG_KEYS`].
pub fn keys_help() -> String {
    let width = CONFIG_KEYS.iter().map(|(k, _, _)| k.len()).max().unwrap_or(0);
    let mut out = String::from("Configuration keys (TOML; every key optional):\n");
    for (key, prov, what) in CONFIG_KEYS {
        out.push_str(&format!("  {key:width$}  [{}] {what}\n", prov.label()));
    }
    out
}
