use super::action::ActionSpace;
use super::shaping::{shaping, ShapingConfig};
use super::trace::EpisodeTrace;
use super::EnvError;
use crate::data::{DataError, HourlySeries, HOURS_PER_DAY};
use crate::household::{DayProfile, Fleet, HourResponse, HouseholdDay, HouseholdState};
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

/// Divisors bringing state entries to order one.
pub const PRICE_SCALE: f64 = 10.0;
pub const LOAD_SCALE: f64 = 10.0;
/// Length of [`EnvState::to_vector`].
pub const STATE_DIM: usize = 11;

/// `fraction` of the mean daily peak of the aggregate load.
pub fn capacity_threshold(series: &HourlySeries, fraction: f64) -> Result<f64, EnvError> {
    let days = series.full_days();
    if days.is_empty() {
        return Err(DataError::Invalid("no complete day to derive a capacity from".into()).into());
    }
    let total: f64 = days
        .iter()
        .map(|d| {
            let range = series.day_range(*d).expect("full day");
            range.map(|i| series.aggregate_load(i)).fold(f64::NEG_INFINITY, f64::max)
        })
        .sum();
    Ok(fraction * total / days.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    /// Weight of household benefit against discomfort.
    pub rho: f64,
    /// Incentive steps per household, including zero.
    pub levels: usize,
    /// Capacity as a fraction of the mean daily aggregate peak.
    pub capacity_fraction: f64,
    /// Fixed capacity in kW, overriding the fraction.
    pub capacity: Option<f64>,
    pub shaping: ShapingConfig,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self { rho: 0.9, levels: 4, capacity_fraction: 0.75, capacity: None, shaping: ShapingConfig::default() }
    }
}

/// Inputs of one simulated day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayScenario {
    pub date: NaiveDate,
    /// Price seen by the provider, ¢/kWh.
    pub price: DayProfile,
    /// Per-household load the provider expects.
    pub forecast_load: Vec<DayProfile>,
    /// Per-household preferred consumption the households act on.
    pub demand: Vec<DayProfile>,
}

impl DayScenario {
    /// A day whose households consume exactly what was forecast.
    pub fn from_forecast(date: NaiveDate, price: DayProfile, load: Vec<DayProfile>) -> Self {
        Self { date, price, demand: load.clone(), forecast_load: load }
    }

    pub fn forecast_aggregate(&self) -> DayProfile {
        sum(&self.forecast_load)
    }

    pub fn demand_aggregate(&self) -> DayProfile {
        sum(&self.demand)
    }
}

fn sum(profiles: &[DayProfile]) -> DayProfile {
    let mut out = [0.0; HOURS_PER_DAY];
    for p in profiles {
        for t in 0..HOURS_PER_DAY {
            out[t] += p[t];
        }
    }
    out
}

/// What the provider observes before acting in an hour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvState {
    /// 1..=24.
    pub hour_of_day: usize,
    pub price: f64,
    pub forecast_load: f64,
    pub realized_load: f64,
    pub capacity: f64,
    pub margin: f64,
    pub required: f64,
    /// Sum of the rates issued in the previous hour.
    pub prev_incentive: f64,
}

impl EnvState {
    pub fn to_vector(&self) -> Vec<f64> {
        let angle = 2.0 * std::f64::consts::PI * self.hour_of_day as f64 / HOURS_PER_DAY as f64;
        vec![
            angle.sin(),
            angle.cos(),
            self.hour_of_day as f64 / HOURS_PER_DAY as f64,
            self.price / PRICE_SCALE,
            self.forecast_load / LOAD_SCALE,
            self.realized_load / LOAD_SCALE,
            self.capacity / LOAD_SCALE,
            self.margin / LOAD_SCALE,
            self.required,
            self.prev_incentive / PRICE_SCALE,
            f64::from(u8::from(self.required > 0.0)),
        ]
    }
}

/// Everything that happened in one hour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    /// 1..=24.
    pub hour: usize,
    pub price: f64,
    pub lambda: Vec<f64>,
    pub delta_e: Vec<f64>,
    pub dis_cost: Vec<f64>,
    pub demand: Vec<f64>,
    pub consumption: Vec<f64>,
    /// Aggregate preferred consumption.
    pub load_before: f64,
    /// Aggregate realized consumption.
    pub load_after: f64,
    pub required: f64,
    pub achieved: f64,
    pub r_miss: f64,
    pub r_over: f64,
    pub phi: f64,
    /// Provider margin `sum (p - lambda) dE`.
    pub sp_term: f64,
    /// Weighted household benefit `sum rho lambda dE - (1 - rho) C`.
    pub eu_term: f64,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    /// After the last hour this repeats the final state; it carries no
    /// information since `done` masks it.
    pub next_state: EnvState,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// One provider, a fleet of households, one day at a time.
#[derive(Debug, Clone)]
pub struct MarketEnv {
    fleet: Fleet,
    cfg: EnvConfig,
    capacity: f64,
    space: ActionSpace,
    scenario: Option<DayScenario>,
    days: Vec<HouseholdDay>,
    states: Vec<HouseholdState>,
    hour: usize,
    prev_incentive: f64,
    trace: Vec<StepInfo>,
}

impl MarketEnv {
    pub fn new(fleet: Fleet, cfg: EnvConfig, capacity: f64) -> Result<Self, EnvError> {
        if !(capacity > 0.0 && capacity.is_finite()) {
            return Err(EnvError::Invalid(format!("capacity must be positive, got {capacity}")));
        }
        if !(0.0..=1.0).contains(&cfg.rho) {
            return Err(EnvError::Invalid(format!("rho must lie in [0, 1], got {}", cfg.rho)));
        }
        let space = ActionSpace::new(cfg.levels, fleet.len())?;
        Ok(Self { fleet, cfg, capacity, space, scenario: None, days: Vec::new(), states: Vec::new(), hour: 0, prev_incentive: 0.0, trace: Vec::new() })
    }

    pub fn space(&self) -> ActionSpace {
        self.space
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn fleet(&self) -> &Fleet {
        &self.fleet
    }

    pub fn n_eu(&self) -> usize {
        self.fleet.len()
    }

    /// Starts a new day; all shifting bookkeeping of the previous day is dropped.
    pub fn reset(&mut self, scenario: &DayScenario) -> Result<EnvState, EnvError> {
        let n = self.fleet.len();
        if scenario.forecast_load.len() != n || scenario.demand.len() != n {
            return Err(EnvError::Invalid(format!("scenario for {} households, fleet has {n}", scenario.demand.len())));
        }
        if scenario.price.iter().chain(scenario.forecast_load.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(EnvError::Invalid(format!("non-finite forecast on {}", scenario.date)));
        }
        self.days = (0..n).map(|k| self.fleet.day(k, &scenario.demand[k])).collect::<Result<_, _>>()?;
        self.states = self.days.iter().map(HouseholdDay::start_state).collect();
        self.scenario = Some(scenario.clone());
        self.hour = 0;
        self.prev_incentive = 0.0;
        self.trace.clear();
        Ok(self.state_at(0))
    }

    pub fn is_done(&self) -> bool {
        self.hour >= HOURS_PER_DAY
    }

    /// Aggregate planned consumption of all households for the whole day.
    pub fn planned_aggregate(&self) -> DayProfile {
        sum(&self.states.iter().map(HouseholdState::planned).collect::<Vec<_>>())
    }

    fn state_at(&self, hour: usize) -> EnvState {
        let sc = self.scenario.as_ref().expect("reset before use");
        let forecast: f64 = sc.forecast_load.iter().map(|p| p[hour]).sum();
        let realized = self.planned_aggregate()[hour];
        EnvState {
            hour_of_day: hour + 1,
            price: sc.price[hour],
            forecast_load: forecast,
            realized_load: realized,
            capacity: self.capacity,
            margin: self.capacity - realized,
            required: (forecast - self.capacity).max(0.0),
            prev_incentive: self.prev_incentive,
        }
    }

    /// Observation for the current hour.
    pub fn state(&self) -> Result<EnvState, EnvError> {
        if self.scenario.is_none() || self.is_done() {
            return Err(EnvError::Finished);
        }
        Ok(self.state_at(self.hour))
    }

    /// Applies the action for the current hour.
    pub fn step(&mut self, action: usize) -> Result<StepResult, EnvError> {
        let state = self.state()?;
        let h = self.hour;
        let rates = self.space.decode(action, state.price)?;
        // households answer in order, each seeing the plans already committed
        // by the ones before it, so they do not all pile into the same valley
        let mut responses: Vec<HourResponse> = Vec::with_capacity(self.days.len());
        for k in 0..self.days.len() {
            let aggregate = self.planned_aggregate();
            responses.push(self.states[k].respond(&self.days[k], h, rates[k], &aggregate, self.capacity)?);
        }
        let rho = self.cfg.rho;
        let mut sp_term = 0.0;
        let mut eu_term = 0.0;
        for (r, lambda) in responses.iter().zip(&rates) {
            sp_term += (state.price - lambda) * r.delta_e;
            eu_term += rho * lambda * r.delta_e - (1.0 - rho) * r.dis_cost;
        }
        let achieved: f64 = responses.iter().map(|r| r.delta_e).sum();
        let s = shaping(&self.cfg.shaping, state.required, achieved, &rates);
        let reward = sp_term + eu_term + s.phi;
        let info = StepInfo {
            hour: h + 1,
            price: state.price,
            delta_e: responses.iter().map(|r| r.delta_e).collect(),
            dis_cost: responses.iter().map(|r| r.dis_cost).collect(),
            demand: responses.iter().map(|r| r.demand).collect(),
            consumption: responses.iter().map(|r| r.consumption).collect(),
            load_before: responses.iter().map(|r| r.demand).sum(),
            load_after: responses.iter().map(|r| r.consumption).sum(),
            lambda: rates,
            required: state.required,
            achieved,
            r_miss: s.r_miss,
            r_over: s.r_over,
            phi: s.phi,
            sp_term,
            eu_term,
            reward,
        };
        self.prev_incentive = info.lambda.iter().sum();
        self.trace.push(info.clone());
        self.hour += 1;
        let done = self.is_done();
        let next_state = if done { self.state_at(HOURS_PER_DAY - 1) } else { self.state_at(self.hour) };
        Ok(StepResult { next_state, reward, done, info })
    }

    pub fn trace(&self) -> &[StepInfo] {
        &self.trace
    }

    /// Appliance-level preferred profiles of the current day.
    pub fn household_days(&self) -> &[HouseholdDay] {
        &self.days
    }

    /// Appliance-level plans as of the current hour.
    pub fn household_states(&self) -> &[HouseholdState] {
        &self.states
    }

    /// Trace of the current (normally finished) episode.
    pub fn episode_trace(&self) -> Option<EpisodeTrace> {
        let sc = self.scenario.as_ref()?;
        Some(EpisodeTrace {
            date: sc.date,
            rho: self.cfg.rho,
            capacity: self.capacity,
            household_ids: self.fleet.households().iter().map(|h| h.id.clone()).collect(),
            steps: self.trace.clone(),
        })
    }
}
