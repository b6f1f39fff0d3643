//! Fixtures and episode checks shared by the integration suites.
#![allow(dead_code)]

use ibdr::config::{RunConfig, ScenarioInput};
use ibdr::data::HOURS_PER_DAY;
use ibdr::household::ApplianceKind;
use ibdr::market_env::{capacity_threshold, DayScenario, EpisodeTrace, MarketEnv, MAX_RATE_FRACTION};
use ibdr::pipeline::{build_env, day_scenario, Dataset};

/// Synthetic seed-42 summer with recorded values driving every day.
pub struct Fixture {
    pub cfg: RunConfig,
    pub ds: Dataset,
    pub days: Vec<DayScenario>,
    pub env: MarketEnv,
}

pub fn fixture() -> Fixture {
    let mut cfg = RunConfig::default();
    cfg.data.scenario = ScenarioInput::Actual;
    let ds = Dataset::load(&cfg).unwrap();
    let days = ds.series.full_days().iter().map(|d| day_scenario(&ds, *d, ScenarioInput::Actual, None).unwrap()).collect();
    let capacity = capacity_threshold(&ds.series, cfg.env.capacity_fraction).unwrap();
    let env = build_env(&cfg, ds.series.household_ids(), capacity).unwrap();
    Fixture { cfg, ds, days, env }
}

pub fn peak(profile: &[f64]) -> f64 {
    profile.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Index of the day with the highest aggregate hourly load.
pub fn peak_day(days: &[DayScenario]) -> usize {
    (0..days.len()).max_by(|&a, &b| peak(&days[a].demand_aggregate()).total_cmp(&peak(&days[b].demand_aggregate()))).unwrap()
}

/// Violations of the per-episode safety properties, checked on a finished
/// episode; empty when everything holds.
pub fn episode_violations(env: &MarketEnv, trace: &EpisodeTrace) -> Vec<String> {
    let mut bad = Vec::new();
    let rho = trace.rho;
    let mut pc_curtailed = 0.0;
    for (n, (day, state)) in env.household_days().iter().zip(env.household_states()).enumerate() {
        for (a, appliance) in day.household().appliances.iter().enumerate() {
            let pref = &day.preferred()[a];
            let real = &state.realized()[a];
            let (sp, sr): (f64, f64) = (pref.iter().sum(), real.iter().sum());
            match &appliance.kind {
                ApplianceKind::NonShiftable => {
                    if pref != real {
                        bad.push(format!("household {n}: non-shiftable {} changed", appliance.name));
                    }
                }
                ApplianceKind::PowerControllable { .. } => {
                    for h in 0..HOURS_PER_DAY {
                        if real[h] < -1e-12 || real[h] > pref[h] + 1e-12 {
                            bad.push(format!("household {n}: {} hour {h} curtailed outside [0, E]", appliance.name));
                        }
                    }
                    pc_curtailed += sp - sr;
                }
                ApplianceKind::ShiftableBlock { block_length, earliest, deadline } => {
                    if (sp - sr).abs() > 1e-9 {
                        bad.push(format!("household {n}: {} energy {sr} != {sp}", appliance.name));
                    }
                    let on: Vec<usize> = (0..HOURS_PER_DAY).filter(|&h| real[h] > 1e-12).collect();
                    if let (Some(&first), Some(&last)) = (on.first(), on.last()) {
                        if first < *earliest || last > *deadline || last + 1 - first > *block_length && sp > 0.0 {
                            bad.push(format!("household {n}: {} runs {first}..={last} outside its window or block", appliance.name));
                        }
                    }
                }
                ApplianceKind::ShiftableInterruptible { max_rate, earliest, deadline } => {
                    if (sp - sr).abs() > 1e-9 {
                        bad.push(format!("household {n}: {} energy {sr} != {sp}", appliance.name));
                    }
                    for h in 0..HOURS_PER_DAY {
                        if real[h] > 1e-12 && (h < *earliest || h > *deadline) {
                            bad.push(format!("household {n}: {} delivers at hour {h} outside its window", appliance.name));
                        }
                        if real[h] > max_rate + 1e-9 {
                            bad.push(format!("household {n}: {} exceeds its rate at hour {h}", appliance.name));
                        }
                    }
                }
            }
        }
    }
    let mut ret = 0.0;
    for s in &trace.steps {
        let (mut sp, mut eu) = (0.0, 0.0);
        for k in 0..s.lambda.len() {
            if s.lambda[k] < 0.0 || s.lambda[k] > MAX_RATE_FRACTION * s.price + 1e-12 {
                bad.push(format!("hour {}: rate {} outside [0, 0.95 p]", s.hour, s.lambda[k]));
            }
            let gross = (s.price - s.lambda[k]) * s.delta_e[k];
            if gross < 0.0 {
                bad.push(format!("hour {}: negative provider margin {gross}", s.hour));
            }
            sp += gross;
            eu += rho * s.lambda[k] * s.delta_e[k] - (1.0 - rho) * s.dis_cost[k];
        }
        if s.reward != s.sp_term + s.eu_term + s.phi || (s.reward - s.phi - (s.sp_term + s.eu_term)).abs() > 1e-12 * (1.0 + s.reward.abs()) {
            bad.push(format!("hour {}: reward is not the sum of its terms", s.hour));
        }
        if (sp - s.sp_term).abs() > 1e-9 || (eu - s.eu_term).abs() > 1e-9 {
            bad.push(format!("hour {}: re-accounted terms differ", s.hour));
        }
        ret += sp + eu + s.phi;
    }
    if (ret - trace.total_reward()).abs() > 1e-9 * (1.0 + ret.abs()) {
        bad.push(format!("return {} differs from re-accounted {ret}", trace.total_reward()));
    }
    let before: f64 = trace.load_before().iter().sum();
    let after: f64 = trace.load_after().iter().sum();
    if (before - pc_curtailed - after).abs() > 1e-9 {
        bad.push(format!("load balance: {before} - {pc_curtailed} != {after}"));
    }
    bad
}
