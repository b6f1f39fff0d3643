//! End-to-end experiment wiring shared by the command-line tool and the
//! integration tests: data, day planning, forecasts, simulated days, agent
//! training, comparisons and the rho sweep.

use crate::agent::{evaluate, no_dr, train_agent, AgentError, TrainOutcome};
use crate::benchmark::{eblr_run_day, BenchmarkError};
use crate::config::{ConfigError, RunConfig, ScenarioInput};
use crate::data::{load_series, split_by_window, synth_generate, ColumnSchema, DataError, HolidayCalendar, HourlySeries, Quantity, HOURS_PER_DAY};
use crate::exec::{self, ExecMode};
use crate::forecast::{first_forecastable_index, forecast_day, train_forecaster, ForecastError, Forecaster, RollMode, TrainReport};
use crate::household::{Fleet, FleetConfig, Household, HouseholdError};
use crate::market_env::{capacity_threshold, DayScenario, EnvConfig, EnvError, EpisodeTrace, MarketEnv};
use crate::metrics::{ledger, load_stats, FinancialLedger, LoadStats, MetricsError};
use crate::neural::{load_checkpoint, save_checkpoint, DenseNet, NeuralError};
use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const FORECASTERS_FILE: &str = "forecasters.json";
pub const AGENT_FILE: &str = "agent.json";
pub const FORECASTERS_KIND: &str = "forecasters";
pub const AGENT_KIND: &str = "agent";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Forecast(#[from] ForecastError),
    #[error(transparent)]
    Household(#[from] HouseholdError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Benchmark(#[from] BenchmarkError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error("checkpoint {} not found; run `{command}` first", path.display())]
    MissingCheckpoint { path: PathBuf, command: &'static str },
    #[error("{0}")]
    Invalid(String),
}

impl PipelineError {
    /// True for failures of the numerics (divergence, NaN) rather than of
    /// inputs or configuration.
    pub fn is_numeric(&self) -> bool {
        match self {
            PipelineError::Agent(AgentError::NonFinite(_) | AgentError::Diverged { .. }) => true,
            PipelineError::Forecast(ForecastError::NonFinite { .. }) => true,
            _ => false,
        }
    }
}

/// Independent seed for one consumer of the master seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const FLEET_STREAM: u64 = 1;
const AGENT_STREAM: u64 = 2;
const FORECAST_STREAM: u64 = 100;

/// The series with its holiday calendar.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub series: HourlySeries,
    pub holidays: HolidayCalendar,
}

impl Dataset {
    pub fn load(cfg: &RunConfig) -> Result<Self, PipelineError> {
        let series = match &cfg.paths.data {
            Some(path) => load_series(path, &ColumnSchema::default())?,
            None => synth_generate(&cfg.synth),
        };
        let holidays = match &cfg.paths.holidays {
            Some(path) => HolidayCalendar::from_file(path)?,
            None => HolidayCalendar::us_federal_2018(),
        };
        Ok(Self { series, holidays })
    }

    /// Everything strictly before the test window.
    pub fn training_series(&self, cfg: &RunConfig) -> Result<HourlySeries, PipelineError> {
        Ok(split_by_window(&self.series, cfg.data.test_start, cfg.data.test_end)?.train)
    }
}

/// Which days are used for what.
#[derive(Debug, Clone, PartialEq)]
pub struct DayPlan {
    pub train: Vec<NaiveDate>,
    pub validation: Vec<NaiveDate>,
    pub test: Vec<NaiveDate>,
}

/// Training days are the whole days before the test window with enough
/// history to be forecast; the last `validation_days` of them are held out.
pub fn plan_days(series: &HourlySeries, cfg: &RunConfig) -> Result<DayPlan, PipelineError> {
    let split = split_by_window(series, cfg.data.test_start, cfg.data.test_end)?;
    let needed = first_forecastable_index(cfg.forecast.window);
    let mut before: Vec<NaiveDate> = split
        .train
        .full_days()
        .into_iter()
        .filter(|d| split.train.day_range(*d).is_some_and(|r| r.start >= needed))
        .collect();
    if before.len() <= cfg.data.validation_days {
        return Err(PipelineError::Invalid(format!(
            "{} usable days before {} leave nothing to train on after {} validation days",
            before.len(),
            cfg.data.test_start,
            cfg.data.validation_days
        )));
    }
    let validation = before.split_off(before.len() - cfg.data.validation_days);
    let test = split.test.full_days();
    if test.is_empty() {
        return Err(PipelineError::Invalid("the test window holds no whole day".into()));
    }
    Ok(DayPlan { train: before, validation, test })
}

/// One forecaster per target: price first, then each household's load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastBundle {
    pub price: Forecaster,
    pub loads: Vec<Forecaster>,
}

impl ForecastBundle {
    pub fn save(&self, dir: &Path) -> Result<PathBuf, PipelineError> {
        std::fs::create_dir_all(dir).map_err(|source| DataError::Io { path: dir.display().to_string(), source })?;
        let path = dir.join(FORECASTERS_FILE);
        save_checkpoint(&path, FORECASTERS_KIND, self)?;
        Ok(path)
    }

    pub fn load(dir: &Path) -> Result<Self, PipelineError> {
        let path = dir.join(FORECASTERS_FILE);
        if !path.exists() {
            return Err(PipelineError::MissingCheckpoint { path, command: "forecast-train" });
        }
        Ok(load_checkpoint(&path, FORECASTERS_KIND)?)
    }
}

fn targets(n_households: usize) -> Vec<Quantity> {
    std::iter::once(Quantity::Price).chain((0..n_households).map(Quantity::Load)).collect()
}

/// Trains every forecaster on `train`; the models are trained concurrently.
pub fn train_forecasters(
    train: &HourlySeries,
    holidays: &HolidayCalendar,
    cfg: &RunConfig,
    mode: ExecMode,
) -> Result<(ForecastBundle, Vec<TrainReport>), PipelineError> {
    let targets = targets(train.n_households());
    let results = exec::map_range(mode, targets.len(), |k| {
        train_forecaster(train, targets[k], holidays, &cfg.forecast, derive_seed(cfg.seed, FORECAST_STREAM + k as u64), mode)
    });
    let mut models = Vec::with_capacity(results.len());
    let mut reports = Vec::with_capacity(results.len());
    for r in results {
        let (m, rep) = r?;
        models.push(m);
        reports.push(rep);
    }
    let price = models.remove(0);
    Ok((ForecastBundle { price, loads: models }, reports))
}

fn actual_day(series: &HourlySeries, date: NaiveDate, quantity: Quantity) -> Result<[f64; HOURS_PER_DAY], PipelineError> {
    let range = series.day_range(date).ok_or_else(|| PipelineError::Invalid(format!("series does not cover {date}")))?;
    let mut out = [0.0; HOURS_PER_DAY];
    for (k, i) in range.enumerate() {
        out[k] = series.value(quantity, i);
    }
    Ok(out)
}

fn forecast_profile(model: &Forecaster, ds: &Dataset, date: NaiveDate) -> Result<[f64; HOURS_PER_DAY], PipelineError> {
    let v = forecast_day(model, &ds.series, date, &ds.holidays, RollMode::Rolled)?;
    v.try_into().map_err(|_| PipelineError::Invalid("forecast is not 24 hours long".into()))
}

/// The simulated inputs of `date`. Forecasts only read hours before the day.
pub fn day_scenario(ds: &Dataset, date: NaiveDate, input: ScenarioInput, bundle: Option<&ForecastBundle>) -> Result<DayScenario, PipelineError> {
    let n = ds.series.n_households();
    match input {
        ScenarioInput::Actual => {
            let price = actual_day(&ds.series, date, Quantity::Price)?;
            let loads = (0..n).map(|k| actual_day(&ds.series, date, Quantity::Load(k))).collect::<Result<_, _>>()?;
            Ok(DayScenario::from_forecast(date, price, loads))
        }
        ScenarioInput::Forecast => {
            let b = bundle.ok_or_else(|| PipelineError::Invalid("forecast scenarios need trained forecasters".into()))?;
            if b.loads.len() != n {
                return Err(PipelineError::Invalid(format!("{} load forecasters for {n} households", b.loads.len())));
            }
            let price = forecast_profile(&b.price, ds, date)?;
            let loads = b.loads.iter().map(|m| forecast_profile(m, ds, date)).collect::<Result<_, _>>()?;
            Ok(DayScenario::from_forecast(date, price, loads))
        }
    }
}

pub fn scenarios(
    ds: &Dataset,
    dates: &[NaiveDate],
    input: ScenarioInput,
    bundle: Option<&ForecastBundle>,
    mode: ExecMode,
) -> Result<Vec<DayScenario>, PipelineError> {
    exec::map(mode, dates, |d| day_scenario(ds, *d, input, bundle)).into_iter().collect()
}

/// Capacity from the override or from the training part of the series.
pub fn capacity(cfg: &RunConfig, train: &HourlySeries) -> Result<f64, PipelineError> {
    match cfg.env.capacity {
        Some(c) => Ok(c),
        None => Ok(capacity_threshold(train, cfg.env.capacity_fraction)?),
    }
}

/// The environment with a freshly sampled fleet.
pub fn build_env(cfg: &RunConfig, household_ids: &[String], capacity: f64) -> Result<MarketEnv, PipelineError> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, FLEET_STREAM));
    let fleet = Fleet::sample(&cfg.fleet, household_ids, &mut rng)?;
    Ok(MarketEnv::new(fleet, cfg.env.clone(), capacity)?)
}

/// The configured evaluation day, or the day with the highest expected
/// aggregate peak.
pub fn evaluation_day(cfg: &RunConfig, test: &[DayScenario]) -> Result<DayScenario, PipelineError> {
    let peak = |s: &DayScenario| s.forecast_aggregate().into_iter().fold(f64::NEG_INFINITY, f64::max);
    let found = match cfg.data.eval_date {
        Some(d) => test.iter().find(|s| s.date == d),
        None => test.iter().max_by(|a, b| peak(a).total_cmp(&peak(b))),
    };
    found.cloned().ok_or_else(|| PipelineError::Invalid(format!("{:?} is not a test day", cfg.data.eval_date)))
}

/// A trained policy with the households and capacity it was trained against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentArtifact {
    pub policy: DenseNet,
    pub fleet: FleetConfig,
    pub households: Vec<Household>,
    pub env: EnvConfig,
    pub capacity: f64,
}

impl AgentArtifact {
    pub fn new(policy: DenseNet, env: &MarketEnv) -> Self {
        Self {
            policy,
            fleet: env.fleet().config().clone(),
            households: env.fleet().households().to_vec(),
            env: env.config().clone(),
            capacity: env.capacity(),
        }
    }

    pub fn env(&self) -> Result<MarketEnv, PipelineError> {
        let fleet = Fleet::from_households(&self.fleet, self.households.clone())?;
        Ok(MarketEnv::new(fleet, self.env.clone(), self.capacity)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), PipelineError> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|source| DataError::Io { path: dir.display().to_string(), source })?;
        }
        Ok(save_checkpoint(path, AGENT_KIND, self)?)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        if !path.exists() {
            return Err(PipelineError::MissingCheckpoint { path: path.into(), command: "agent-train" });
        }
        Ok(load_checkpoint(path, AGENT_KIND)?)
    }
}

/// Scenarios prepared for an experiment.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub plan: DayPlan,
    pub train: Vec<DayScenario>,
    pub validation: Vec<DayScenario>,
    pub test: Vec<DayScenario>,
    pub eval: DayScenario,
    pub capacity: f64,
}

pub fn prepare(ds: &Dataset, cfg: &RunConfig, bundle: Option<&ForecastBundle>, mode: ExecMode) -> Result<Prepared, PipelineError> {
    let plan = plan_days(&ds.series, cfg)?;
    let input = cfg.data.scenario;
    let train = scenarios(ds, &plan.train, input, bundle, mode)?;
    let validation = scenarios(ds, &plan.validation, input, bundle, mode)?;
    let test = scenarios(ds, &plan.test, input, bundle, mode)?;
    let eval = evaluation_day(cfg, &test)?;
    let capacity = capacity(cfg, &ds.training_series(cfg)?)?;
    Ok(Prepared { plan, train, validation, test, eval, capacity })
}

/// Trains an agent on the prepared days.
pub fn train_policy(env: &mut MarketEnv, prepared: &Prepared, cfg: &RunConfig, mode: ExecMode) -> Result<TrainOutcome, PipelineError> {
    Ok(train_agent(env, &prepared.train, &prepared.validation, &cfg.agent, derive_seed(cfg.seed, AGENT_STREAM), mode)?)
}

pub const NO_DR: &str = "NoDR";
pub const EBLR: &str = "EBLR";
pub const CCRL_DR: &str = "CCRL-DR";

/// One day under the three strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub no_dr: EpisodeTrace,
    pub eblr: EpisodeTrace,
    pub ccrl: EpisodeTrace,
}

impl Comparison {
    pub fn labeled(&self) -> [(&'static str, &EpisodeTrace); 3] {
        [(NO_DR, &self.no_dr), (EBLR, &self.eblr), (CCRL_DR, &self.ccrl)]
    }

    pub fn stats(&self) -> Result<[(&'static str, LoadStats); 3], PipelineError> {
        let [a, b, c] = self.labeled();
        Ok([(a.0, load_stats(&a.1.load_after())?), (b.0, load_stats(&b.1.load_after())?), (c.0, load_stats(&c.1.load_after())?)])
    }
}

pub fn compare_day(env: &MarketEnv, policy: &DenseNet, scenario: &DayScenario, cfg: &RunConfig) -> Result<Comparison, PipelineError> {
    let eblr = eblr_run_day(scenario, &cfg.eblr, &env.fleet().ids(), env.capacity(), env.config().rho, &env.config().shaping)?;
    Ok(Comparison { no_dr: no_dr(env, scenario)?, eblr, ccrl: evaluate(policy, env, scenario)? })
}

pub fn compare_days(env: &MarketEnv, policy: &DenseNet, days: &[DayScenario], cfg: &RunConfig, mode: ExecMode) -> Result<Vec<Comparison>, PipelineError> {
    exec::map(mode, days, |d| compare_day(env, policy, d, cfg)).into_iter().collect()
}

/// One point of the rho sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub rho: f64,
    pub outcome: TrainOutcome,
    pub trace: EpisodeTrace,
    pub ledger: FinancialLedger,
}

/// Trains and evaluates one agent per rho with the same fleet, capacity
/// and seed; only rho differs between the runs.
pub fn sweep_rho(
    base: &MarketEnv,
    prepared: &Prepared,
    cfg: &RunConfig,
    rhos: &[f64],
    mode: ExecMode,
) -> Result<Vec<SweepPoint>, PipelineError> {
    exec::map(mode, rhos, |&rho| sweep_point(base, prepared, cfg, rho, mode)).into_iter().collect()
}

pub fn sweep_point(base: &MarketEnv, prepared: &Prepared, cfg: &RunConfig, rho: f64, mode: ExecMode) -> Result<SweepPoint, PipelineError> {
    let mut env = with_rho(base, rho)?;
    let outcome = train_policy(&mut env, prepared, cfg, mode)?;
    let trace = evaluate(&outcome.learner.policy, &env, &prepared.eval)?;
    let ledger = ledger(&trace, rho)?;
    Ok(SweepPoint { rho, outcome, trace, ledger })
}

/// `base` with a different rho and the same households and capacity.
pub fn with_rho(base: &MarketEnv, rho: f64) -> Result<MarketEnv, PipelineError> {
    let cfg = EnvConfig { rho, ..base.config().clone() };
    Ok(MarketEnv::new(base.fleet().clone(), cfg, base.capacity())?)
}
