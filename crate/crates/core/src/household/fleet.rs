use super::ts::DayProfile;
use super::{Appliance, ApplianceKind, Household, HouseholdDay, HouseholdError};
use crate::data::HOURS_PER_DAY;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Sampled dissatisfaction coefficients are truncated below at this value.
pub const BETA_FLOOR: f64 = 0.01;

/// One appliance of the fleet template, carving its share out of each
/// household's hourly demand. Templates are applied in order; the single
/// `ns` entry receives what is left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "category", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ApplianceTemplate {
    /// Takes `share` of the remaining demand every hour.
    Pc { name: String, beta_mean: f64, beta_std: f64, levels: u32, share: f64 },
    /// A block of `block_length` hours at up to `block_energy` kWh/h starting
    /// at `preferred_start`, capped at `max_share` of the remaining demand.
    TsNi {
        name: String,
        beta_mean: f64,
        beta_std: f64,
        block_length: usize,
        block_energy: f64,
        preferred_start: usize,
        earliest: usize,
        deadline: usize,
        max_share: f64,
    },
    /// `daily_energy` kWh charged at `max_rate` from `preferred_start` on,
    /// capped per hour at `max_share` of the remaining demand.
    TsI {
        name: String,
        beta_mean: f64,
        beta_std: f64,
        daily_energy: f64,
        max_rate: f64,
        preferred_start: usize,
        earliest: usize,
        deadline: usize,
        max_share: f64,
    },
    Ns { name: String },
}

impl ApplianceTemplate {
    pub fn name(&self) -> &str {
        match self {
            ApplianceTemplate::Pc { name, .. }
            | ApplianceTemplate::TsNi { name, .. }
            | ApplianceTemplate::TsI { name, .. }
            | ApplianceTemplate::Ns { name } => name,
        }
    }

    fn beta_dist(&self) -> Option<(f64, f64)> {
        match self {
            ApplianceTemplate::Pc { beta_mean, beta_std, .. }
            | ApplianceTemplate::TsNi { beta_mean, beta_std, .. }
            | ApplianceTemplate::TsI { beta_mean, beta_std, .. } => Some((*beta_mean, *beta_std)),
            ApplianceTemplate::Ns { .. } => None,
        }
    }

    fn kind(&self) -> ApplianceKind {
        match *self {
            ApplianceTemplate::Pc { levels, .. } => ApplianceKind::PowerControllable { levels },
            ApplianceTemplate::TsNi { block_length, earliest, deadline, .. } => {
                ApplianceKind::ShiftableBlock { block_length, earliest, deadline }
            }
            ApplianceTemplate::TsI { max_rate, earliest, deadline, .. } => {
                ApplianceKind::ShiftableInterruptible { max_rate, earliest, deadline }
            }
            ApplianceTemplate::Ns { .. } => ApplianceKind::NonShiftable,
        }
    }

    /// Takes this appliance's preferred profile out of `residual`.
    fn carve(&self, residual: &mut DayProfile) -> DayProfile {
        let mut own = [0.0; HOURS_PER_DAY];
        match *self {
            ApplianceTemplate::Pc { share, .. } => {
                for t in 0..HOURS_PER_DAY {
                    own[t] = share * residual[t];
                }
            }
            ApplianceTemplate::TsNi { block_length, block_energy, preferred_start, max_share, .. } => {
                let hours = preferred_start..preferred_start + block_length;
                let room = hours.clone().map(|t| max_share * residual[t]).fold(f64::INFINITY, f64::min);
                let e = block_energy.min(room);
                if e > 0.0 {
                    hours.for_each(|t| own[t] = e);
                }
            }
            ApplianceTemplate::TsI { daily_energy, max_rate, preferred_start, deadline, max_share, .. } => {
                let mut left = daily_energy;
                for t in preferred_start..=deadline {
                    let e = max_rate.min(max_share * residual[t]).min(left);
                    own[t] = e;
                    left -= e;
                }
            }
            ApplianceTemplate::Ns { .. } => own = *residual,
        }
        for t in 0..HOURS_PER_DAY {
            residual[t] = (residual[t] - own[t]).max(0.0);
        }
        own
    }

    fn validate(&self) -> Result<(), HouseholdError> {
        let bad = |why: String| Err(HouseholdError::Config(format!("appliance template {}: {why}", self.name())));
        if let Some((mean, std)) = self.beta_dist() {
            if !(mean.is_finite() && std.is_finite() && std >= 0.0) {
                return bad(format!("beta distribution ({mean}, {std})"));
            }
        }
        match *self {
            ApplianceTemplate::Pc { share, levels, .. } if !(0.0..=1.0).contains(&share) || levels == 0 => {
                bad(format!("share {share} with {levels} levels"))
            }
            ApplianceTemplate::TsNi { block_length, block_energy, preferred_start, earliest, deadline, max_share, .. }
                if block_length == 0
                    || block_energy < 0.0
                    || !(0.0..=1.0).contains(&max_share)
                    || preferred_start < earliest
                    || deadline >= HOURS_PER_DAY
                    || preferred_start + block_length > deadline + 1 =>
            {
                bad(format!("block of {block_length} h at {preferred_start} in window {earliest}..={deadline}"))
            }
            ApplianceTemplate::TsI { daily_energy, max_rate, preferred_start, earliest, deadline, max_share, .. }
                if !(max_rate > 0.0)
                    || daily_energy < 0.0
                    || !(0.0..=1.0).contains(&max_share)
                    || preferred_start < earliest
                    || preferred_start > deadline
                    || deadline >= HOURS_PER_DAY
                    || daily_energy > max_rate * (deadline + 1 - earliest) as f64 =>
            {
                bad(format!("{daily_energy} kWh at {max_rate} kW in window {earliest}..={deadline}"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FleetConfig {
    pub appliances: Vec<ApplianceTemplate>,
}

impl Default for FleetConfig {
    /// Dryer, washing machine, dishwasher, EV and air conditioner with the
    /// reference dissatisfaction distributions; hours are zero-based.
    fn default() -> Self {
        let ts_ni = |name: &str, mean, len, energy, start, earliest, deadline| ApplianceTemplate::TsNi {
            name: name.into(),
            beta_mean: mean,
            beta_std: 0.1,
            block_length: len,
            block_energy: energy,
            preferred_start: start,
            earliest,
            deadline,
            max_share: 0.5,
        };
        Self {
            appliances: vec![
                ts_ni("dryer", 0.1, 1, 1.0, 22, 17, 23),
                ts_ni("washing_machine", 0.4, 2, 0.5, 0, 0, 7),
                ts_ni("dishwasher", 0.2, 2, 0.6, 21, 17, 23),
                ApplianceTemplate::TsI {
                    name: "ev".into(),
                    beta_mean: 0.05,
                    beta_std: 0.1,
                    daily_energy: 3.0,
                    max_rate: 1.5,
                    preferred_start: 0,
                    earliest: 0,
                    deadline: 7,
                    max_share: 0.6,
                },
                ApplianceTemplate::Pc { name: "air_conditioner".into(), beta_mean: 3.5, beta_std: 2.0, levels: 4, share: 0.45 },
                ApplianceTemplate::Ns { name: "base".into() },
            ],
        }
    }
}

impl FleetConfig {
    pub fn validate(&self) -> Result<(), HouseholdError> {
        let ns = self.appliances.iter().filter(|a| matches!(a, ApplianceTemplate::Ns { .. })).count();
        if ns != 1 || !matches!(self.appliances.last(), Some(ApplianceTemplate::Ns { .. })) {
            return Err(HouseholdError::Config("the fleet needs exactly one ns appliance, listed last".into()));
        }
        self.appliances.iter().try_for_each(ApplianceTemplate::validate)
    }
}

/// Households with sampled coefficients, able to split any day's demand
/// into appliance profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct Fleet {
    config: FleetConfig,
    households: Vec<Household>,
}

impl Fleet {
    /// Draws every coefficient once from its normal distribution, truncated
    /// at [`BETA_FLOOR`].
    pub fn sample(config: &FleetConfig, ids: &[String], rng: &mut impl Rng) -> Result<Self, HouseholdError> {
        config.validate()?;
        let households = ids
            .iter()
            .map(|id| {
                let appliances = config
                    .appliances
                    .iter()
                    .map(|t| {
                        let beta = match t.beta_dist() {
                            Some((mean, std)) => Normal::new(mean, std).expect("validated").sample(rng).max(BETA_FLOOR),
                            None => 0.0,
                        };
                        Appliance { name: t.name().to_string(), kind: t.kind(), beta }
                    })
                    .collect();
                Household { id: id.clone(), appliances }
            })
            .collect();
        Ok(Self { config: config.clone(), households })
    }

    /// Fleet with the given households, e.g. restored from a checkpoint.
    pub fn from_households(config: &FleetConfig, households: Vec<Household>) -> Result<Self, HouseholdError> {
        config.validate()?;
        for h in &households {
            if h.appliances.len() != config.appliances.len() {
                return Err(HouseholdError::Config(format!("household {} does not match the fleet template", h.id)));
            }
        }
        Ok(Self { config: config.clone(), households })
    }

    pub fn households(&self) -> &[Household] {
        &self.households
    }

    pub fn config(&self) -> &FleetConfig {
        &self.config
    }

    pub fn ids(&self) -> Vec<String> {
        self.households.iter().map(|h| h.id.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.households.len()
    }

    pub fn is_empty(&self) -> bool {
        self.households.is_empty()
    }

    /// Splits household `n`'s hourly demand (negative values read as 0)
    /// into per-appliance preferred profiles.
    pub fn day(&self, n: usize, demand: &DayProfile) -> Result<HouseholdDay, HouseholdError> {
        let household = self.households.get(n).ok_or_else(|| HouseholdError::Config(format!("no household {n}")))?;
        let mut residual = demand.map(|v| if v.is_finite() { v.max(0.0) } else { f64::NAN });
        if residual.iter().any(|v| v.is_nan()) {
            return Err(HouseholdError::Config(format!("household {n}: non-finite demand")));
        }
        let profiles = self.config.appliances.iter().map(|t| t.carve(&mut residual)).collect();
        HouseholdDay::new(household.clone(), profiles)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fleet(n: usize, seed: u64) -> Fleet {
        let ids: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
        Fleet::sample(&FleetConfig::default(), &ids, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn decomposition_sums_to_demand() {
        let f = fleet(3, 1);
        let mut demand = [0.0; HOURS_PER_DAY];
        for (t, v) in demand.iter_mut().enumerate() {
            *v = 1.0 + (t as f64 * 0.4).sin().abs() * 3.0;
        }
        for n in 0..3 {
            let day = f.day(n, &demand).unwrap();
            let total = day.demand();
            for t in 0..HOURS_PER_DAY {
                assert!((total[t] - demand[t]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn decomposition_respects_caps() {
        let f = fleet(1, 2);
        let day = f.day(0, &[2.0; HOURS_PER_DAY]).unwrap();
        let p = day.preferred();
        // dryer: min(1.0, 0.5 * 2)
        assert_eq!(p[0][22], 1.0);
        // washing machine at 0..2 with 0.5 kWh/h, then the EV sees 1.5 left
        assert_eq!(&p[1][..3], &[0.5, 0.5, 0.0]);
        assert_eq!(p[3][0], 0.6 * 1.5);
        // dishwasher at 21..23: the dryer leaves 1.0 at 22, so the block runs at 0.5
        assert_eq!(&p[2][21..23], &[0.5, 0.5]);
        let ev: f64 = p[3].iter().sum();
        assert!((ev - 3.0).abs() < 1e-12);
    }

    #[test]
    fn negative_demand_reads_as_zero() {
        let f = fleet(1, 3);
        let day = f.day(0, &[-0.5; HOURS_PER_DAY]).unwrap();
        assert!(day.demand().iter().all(|v| *v == 0.0));
        assert!(f.day(0, &[f64::NAN; HOURS_PER_DAY]).is_err());
    }

    #[test]
    fn betas_are_floored_and_fixed_per_seed() {
        let a = fleet(50, 4);
        assert_eq!(a, fleet(50, 4));
        for h in a.households() {
            for app in &h.appliances {
                if app.kind != ApplianceKind::NonShiftable {
                    assert!(app.beta >= BETA_FLOOR);
                }
            }
        }
        // EV mean 0.05, std 0.1: about a third of draws are truncated
        let floored = a.households().iter().filter(|h| h.appliances[3].beta == BETA_FLOOR).count();
        assert!(floored > 5 && floored < 30, "{floored}");
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = FleetConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        assert!(text.contains("category = \"ts-ni\""));
        let back: FleetConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn bad_templates_are_rejected() {
        let mut cfg = FleetConfig::default();
        cfg.appliances.pop();
        assert!(cfg.validate().is_err());
        let mut cfg = FleetConfig::default();
        if let ApplianceTemplate::TsNi { deadline, .. } = &mut cfg.appliances[0] {
            *deadline = 21;
        }
        assert!(cfg.validate().is_err());
    }
}
