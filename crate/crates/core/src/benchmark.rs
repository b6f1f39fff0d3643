//! Elasticity-based load reduction: the open-loop benchmark.
//!
//! Each household is paid a fixed position inside an incentive band derived
//! from the day's lowest price and curtails a share of its hourly demand set
//! by the hour's elasticity. There is no shifting, no learning and no
//! capacity feedback.

use crate::data::HOURS_PER_DAY;
use crate::market_env::{shaping, DayScenario, EpisodeTrace, ShapingConfig, StepInfo};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BenchmarkError {
    #[error("incentive {lambda} below the band floor {lambda_min}")]
    BelowFloor { lambda: f64, lambda_min: f64 },
    #[error("{0}")]
    Invalid(String),
}

/// Demand elasticity by period; hours are 1..=24.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElasticitySchedule {
    /// Hours 1-6 and 22-24.
    pub off_peak: f64,
    /// Hours 7-16.
    pub mid_peak: f64,
    /// Hours 17-21.
    pub on_peak: f64,
}

impl Default for ElasticitySchedule {
    fn default() -> Self {
        Self { off_peak: 0.5, mid_peak: 0.3, on_peak: 0.1 }
    }
}

impl ElasticitySchedule {
    pub fn xi(&self, hour_of_day: usize) -> f64 {
        match hour_of_day {
            7..=16 => self.mid_peak,
            17..=21 => self.on_peak,
            _ => self.off_peak,
        }
    }
}

/// What the incentive excess over the floor is divided by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Denominator {
    /// The band floor itself.
    #[default]
    LambdaMin,
    /// The band width, `lambda_max - lambda_min`.
    Band,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EblrConfig {
    pub elasticity: ElasticitySchedule,
    /// Position of each household inside the band, in household order.
    pub mu: Vec<f64>,
    /// Carried for completeness; it does not enter the response.
    pub omega: f64,
    /// Reduction bounds as fractions of the hour's demand.
    pub k_min_fraction: f64,
    pub k_max_fraction: f64,
    /// Band as fractions of the day's lowest price.
    pub lambda_min_fraction: f64,
    pub lambda_max_fraction: f64,
    pub denominator: Denominator,
}

impl Default for EblrConfig {
    fn default() -> Self {
        Self {
            elasticity: ElasticitySchedule::default(),
            mu: vec![0.3, 0.6, 0.9],
            omega: 0.1,
            k_min_fraction: 0.0,
            k_max_fraction: 0.3,
            lambda_min_fraction: 0.3,
            lambda_max_fraction: 1.0,
            denominator: Denominator::LambdaMin,
        }
    }
}

impl EblrConfig {
    /// Reduction of demand `e` at elasticity `xi` when paid `lambda` inside
    /// `[lambda_min, lambda_max]`, clamped to the configured bounds.
    pub fn reduction(&self, e: f64, xi: f64, lambda: f64, lambda_min: f64, lambda_max: f64) -> Result<f64, BenchmarkError> {
        if !(lambda_min > 0.0) {
            return Err(BenchmarkError::Invalid(format!("band floor must be positive, got {lambda_min}")));
        }
        if lambda < lambda_min {
            return Err(BenchmarkError::BelowFloor { lambda, lambda_min });
        }
        let scale = match self.denominator {
            Denominator::LambdaMin => lambda_min,
            Denominator::Band if lambda_max > lambda_min => lambda_max - lambda_min,
            Denominator::Band => return Err(BenchmarkError::Invalid("empty incentive band".into())),
        };
        let raw = e * xi * (lambda - lambda_min) / scale;
        Ok(raw.clamp(self.k_min_fraction * e, self.k_max_fraction * e))
    }
}

/// Reduction with the reference bounds `[0, 0.3 e]` and the floor as
/// denominator.
pub fn eblr_reduction(e: f64, xi: f64, lambda: f64, lambda_min: f64) -> Result<f64, BenchmarkError> {
    EblrConfig::default().reduction(e, xi, lambda, lambda_min, f64::INFINITY)
}

/// Runs the benchmark over one day. Rewards, shaping and the required
/// reduction are accounted exactly as in the market environment so the
/// traces are comparable; there is no discomfort model.
pub fn eblr_run_day(
    scenario: &DayScenario,
    cfg: &EblrConfig,
    household_ids: &[String],
    capacity: f64,
    rho: f64,
    shaping_cfg: &ShapingConfig,
) -> Result<EpisodeTrace, BenchmarkError> {
    let n = scenario.demand.len();
    if cfg.mu.len() != n || household_ids.len() != n {
        return Err(BenchmarkError::Invalid(format!("{} band positions and {} ids for {n} households", cfg.mu.len(), household_ids.len())));
    }
    let p_min = scenario.price.iter().copied().fold(f64::INFINITY, f64::min);
    let (lo, hi) = (cfg.lambda_min_fraction * p_min, cfg.lambda_max_fraction * p_min);
    let lambda: Vec<f64> = cfg.mu.iter().map(|m| lo + m * (hi - lo)).collect();
    let forecast = scenario.forecast_aggregate();
    let mut steps = Vec::with_capacity(HOURS_PER_DAY);
    for h in 0..HOURS_PER_DAY {
        let xi = cfg.elasticity.xi(h + 1);
        let demand: Vec<f64> = scenario.demand.iter().map(|d| d[h].max(0.0)).collect();
        let delta_e = demand.iter().zip(&lambda).map(|(e, l)| cfg.reduction(*e, xi, *l, lo, hi)).collect::<Result<Vec<_>, _>>()?;
        let consumption: Vec<f64> = demand.iter().zip(&delta_e).map(|(e, d)| e - d).collect();
        let price = scenario.price[h];
        let required = (forecast[h] - capacity).max(0.0);
        let achieved: f64 = delta_e.iter().sum();
        let s = shaping(shaping_cfg, required, achieved, &lambda);
        let sp_term: f64 = delta_e.iter().zip(&lambda).map(|(d, l)| (price - l) * d).sum();
        let eu_term: f64 = delta_e.iter().zip(&lambda).map(|(d, l)| rho * l * d).sum();
        steps.push(StepInfo {
            hour: h + 1,
            price,
            lambda: lambda.clone(),
            dis_cost: vec![0.0; n],
            load_before: demand.iter().sum(),
            load_after: consumption.iter().sum(),
            demand,
            consumption,
            delta_e,
            required,
            achieved,
            r_miss: s.r_miss,
            r_over: s.r_over,
            phi: s.phi,
            sp_term,
            eu_term,
            reward: sp_term + eu_term + s.phi,
        });
    }
    Ok(EpisodeTrace { date: scenario.date, rho, capacity, household_ids: household_ids.to_vec(), steps })
}
