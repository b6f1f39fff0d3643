use super::ts::{schedule_ts_i, schedule_ts_ni, BlockSpec, ChargeSpec, DayProfile};
use super::{pc_best_response, pc_cost, pc_delta, ApplianceKind, Household, HouseholdError};
use crate::data::HOURS_PER_DAY;

/// A household together with its preferred per-appliance profile for one day.
#[derive(Debug, Clone, PartialEq)]
pub struct HouseholdDay {
    household: Household,
    preferred: Vec<DayProfile>,
    /// Preferred start of each block appliance.
    starts: Vec<Option<usize>>,
}

impl HouseholdDay {
    pub fn new(household: Household, preferred: Vec<DayProfile>) -> Result<Self, HouseholdError> {
        if preferred.len() != household.appliances.len() {
            return Err(HouseholdError::Config(format!(
                "{} preferred profiles for {} appliances",
                preferred.len(),
                household.appliances.len()
            )));
        }
        let mut starts = Vec::with_capacity(preferred.len());
        for (app, profile) in household.appliances.iter().zip(&preferred) {
            app.validate()?;
            if profile.iter().any(|e| !(*e >= 0.0) || !e.is_finite()) {
                return Err(HouseholdError::Config(format!("appliance {}: preferred demand must be finite and non-negative", app.name)));
            }
            starts.push(match app.kind {
                ApplianceKind::ShiftableBlock { block_length, earliest, deadline } => {
                    Some(block_start(profile, block_length, earliest, deadline).ok_or_else(|| {
                        HouseholdError::Config(format!("appliance {}: preferred run is not one block of {block_length} h inside its window", app.name))
                    })?)
                }
                ApplianceKind::ShiftableInterruptible { max_rate, earliest, deadline } => {
                    ChargeSpec { max_rate, earliest, deadline }.validate(profile)?;
                    None
                }
                _ => None,
            });
        }
        Ok(Self { household, preferred, starts })
    }

    pub fn household(&self) -> &Household {
        &self.household
    }

    pub fn preferred(&self) -> &[DayProfile] {
        &self.preferred
    }

    /// Total preferred demand per hour.
    pub fn demand(&self) -> DayProfile {
        sum_profiles(&self.preferred)
    }

    pub fn start_state(&self) -> HouseholdState {
        HouseholdState::new(self)
    }
}

/// Start of the single constant block in `profile`, or `None` if the
/// profile is not such a block. An idle appliance counts as a zero block at
/// its earliest start.
fn block_start(profile: &DayProfile, len: usize, earliest: usize, deadline: usize) -> Option<usize> {
    let on: Vec<usize> = (0..HOURS_PER_DAY).filter(|t| profile[*t] > 0.0).collect();
    let Some(&first) = on.first() else {
        return Some(earliest);
    };
    let contiguous = on.len() == len && on.iter().enumerate().all(|(k, t)| *t == first + k);
    let constant = on.iter().all(|t| profile[*t] == profile[first]);
    (contiguous && constant && first >= earliest && first + len - 1 <= deadline).then_some(first)
}

fn sum_profiles(profiles: &[DayProfile]) -> DayProfile {
    let mut total = [0.0; HOURS_PER_DAY];
    for p in profiles {
        for (t, e) in p.iter().enumerate() {
            total[t] += e;
        }
    }
    total
}

/// Response of one household in one hour.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HourResponse {
    /// Energy reduction credited this hour, kWh.
    pub delta_e: f64,
    /// Dissatisfaction cost charged this hour, ¢.
    pub dis_cost: f64,
    /// Preferred consumption this hour.
    pub demand: f64,
    /// Realized consumption this hour, after curtailment and shifting.
    pub consumption: f64,
    pub pc_delta: f64,
    pub ts_delta: f64,
}

/// Mutable state of a household during one simulated day.
#[derive(Debug, Clone, PartialEq)]
pub struct HouseholdState {
    realized: Vec<DayProfile>,
    shift_delta: Vec<DayProfile>,
    shift_cost: Vec<DayProfile>,
    decided: Vec<bool>,
    next_hour: usize,
}

impl HouseholdState {
    pub fn new(day: &HouseholdDay) -> Self {
        let n = day.preferred.len();
        Self {
            realized: day.preferred.clone(),
            shift_delta: vec![[0.0; HOURS_PER_DAY]; n],
            shift_cost: vec![[0.0; HOURS_PER_DAY]; n],
            decided: vec![false; n],
            next_hour: 0,
        }
    }

    /// Current planned consumption per appliance (realized for past hours).
    pub fn realized(&self) -> &[DayProfile] {
        &self.realized
    }

    /// Current planned total consumption per hour.
    pub fn planned(&self) -> DayProfile {
        sum_profiles(&self.realized)
    }

    pub fn next_hour(&self) -> usize {
        self.next_hour
    }

    /// Responds to incentive `lambda` (¢/kWh) at `hour` given the
    /// aggregate planned load of all households at the start of the hour.
    ///
    /// A shiftable appliance is rescheduled at the first hour with a
    /// positive incentive while the aggregate exceeds `capacity`; its
    /// discomfort is spread over the hours it vacates in proportion to the
    /// energy removed there.
    pub fn respond(
        &mut self,
        day: &HouseholdDay,
        hour: usize,
        lambda: f64,
        aggregate: &DayProfile,
        capacity: f64,
    ) -> Result<HourResponse, HouseholdError> {
        if hour != self.next_hour || hour >= HOURS_PER_DAY {
            return Err(HouseholdError::Config(format!("hour {hour} out of order (expected {})", self.next_hour)));
        }
        if !(lambda >= 0.0) {
            return Err(HouseholdError::Config(format!("incentive must be non-negative, got {lambda}")));
        }
        let trigger = lambda > 0.0 && aggregate[hour] > capacity;
        let mut out = HourResponse::default();
        for (a, app) in day.household.appliances.iter().enumerate() {
            let preferred = &day.preferred[a];
            match app.kind {
                ApplianceKind::PowerControllable { levels } => {
                    let e = preferred[hour];
                    let q = pc_best_response(lambda, app.beta, levels, e);
                    let d = pc_delta(q, levels, e)?;
                    self.realized[a][hour] = e - d;
                    out.pc_delta += d;
                    out.dis_cost += pc_cost(app.beta, q, levels, e)?;
                }
                ApplianceKind::ShiftableBlock { block_length, earliest, deadline } if trigger && !self.decided[a] => {
                    self.decided[a] = true;
                    let start = day.starts[a].expect("block start set on construction");
                    let spec = BlockSpec { block_length, block_energy: preferred[start], earliest, deadline };
                    let d = schedule_ts_ni(&spec, app.beta, lambda, aggregate, capacity, start, hour)?;
                    if d.moved {
                        self.apply_shift(a, d.profile, d.delta_e, d.dis_cost);
                    }
                }
                ApplianceKind::ShiftableInterruptible { max_rate, earliest, deadline } if trigger && !self.decided[a] => {
                    self.decided[a] = true;
                    let spec = ChargeSpec { max_rate, earliest, deadline };
                    let d = schedule_ts_i(&spec, app.beta, lambda, preferred, aggregate, capacity, hour)?;
                    if d.moved {
                        self.apply_shift(a, d.profile, d.delta_e, d.dis_cost);
                    }
                }
                _ => {}
            }
            out.ts_delta += self.shift_delta[a][hour];
            out.dis_cost += self.shift_cost[a][hour];
            out.demand += preferred[hour];
            out.consumption += self.realized[a][hour];
        }
        out.delta_e = out.pc_delta + out.ts_delta;
        self.next_hour += 1;
        Ok(out)
    }

    fn apply_shift(&mut self, a: usize, profile: DayProfile, delta_e: DayProfile, cost: f64) {
        let vacated: f64 = delta_e.iter().sum();
        if vacated > 0.0 {
            for t in 0..HOURS_PER_DAY {
                self.shift_cost[a][t] = cost * delta_e[t] / vacated;
            }
        }
        self.realized[a] = profile;
        self.shift_delta[a] = delta_e;
    }
}
