use super::HouseholdError;
use crate::data::HOURS_PER_DAY;

/// Daily hourly profile, kWh per hour.
pub type DayProfile = [f64; HOURS_PER_DAY];

/// Discomfort of running a time-shiftable appliance `delay` hours late:
/// `beta * delay^2`.
pub fn ts_cost(beta: f64, delay: f64) -> Result<f64, HouseholdError> {
    if delay < 0.0 || !delay.is_finite() {
        return Err(HouseholdError::Config(format!("delay must be a non-negative number of hours, got {delay}")));
    }
    Ok(beta * delay * delay)
}

/// Non-interruptible block: `block_length` consecutive hours at
/// `block_energy` kWh each, starting no earlier than `earliest` and
/// finishing by `deadline` (inclusive hour indices).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockSpec {
    pub block_length: usize,
    pub block_energy: f64,
    pub earliest: usize,
    pub deadline: usize,
}

/// Interruptible load with a charging window `[earliest, deadline]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeSpec {
    pub max_rate: f64,
    pub earliest: usize,
    pub deadline: usize,
}

/// Outcome of one rescheduling decision for a time-shiftable appliance.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftDecision {
    /// New daily profile (equal to the preferred one when not moved).
    pub profile: DayProfile,
    /// Energy removed from each hour relative to the preferred profile.
    pub delta_e: DayProfile,
    /// Energy added to each hour relative to the preferred profile.
    pub added: DayProfile,
    pub delay: f64,
    pub dis_cost: f64,
    pub moved: bool,
    /// New start hour (blocks only).
    pub start: Option<usize>,
}

impl ShiftDecision {
    fn stay(preferred: &DayProfile, start: Option<usize>) -> Self {
        Self {
            profile: *preferred,
            delta_e: [0.0; HOURS_PER_DAY],
            added: [0.0; HOURS_PER_DAY],
            delay: 0.0,
            dis_cost: 0.0,
            moved: false,
            start,
        }
    }
}

impl BlockSpec {
    pub fn validate(&self, preferred_start: usize) -> Result<(), HouseholdError> {
        let ok = self.block_length >= 1
            && self.block_energy >= 0.0
            && self.deadline < HOURS_PER_DAY
            && preferred_start >= self.earliest
            && preferred_start + self.block_length - 1 <= self.deadline;
        if ok {
            Ok(())
        } else {
            Err(HouseholdError::Config(format!(
                "block of {} h starting at {preferred_start} does not fit window {}..={}",
                self.block_length, self.earliest, self.deadline
            )))
        }
    }

    pub fn profile(&self, start: usize) -> DayProfile {
        let mut p = [0.0; HOURS_PER_DAY];
        p[start..start + self.block_length].fill(self.block_energy);
        p
    }
}

/// Reschedules a non-interruptible block at hour `now`.
///
/// Candidate starts are those not earlier than `now` whose whole block fits
/// the window and keeps `aggregate` (which includes the block at its
/// preferred slot) within `capacity` in every new block hour. The move with
/// the best `lambda * (energy vacated from over-capacity hours) - beta * delay^2`
/// wins when that value is positive; ties favour the start closest to the
/// preferred one, then the earliest.
pub fn schedule_ts_ni(
    spec: &BlockSpec,
    beta: f64,
    lambda: f64,
    aggregate: &DayProfile,
    capacity: f64,
    preferred_start: usize,
    now: usize,
) -> Result<ShiftDecision, HouseholdError> {
    spec.validate(preferred_start)?;
    let preferred = spec.profile(preferred_start);
    if lambda <= 0.0 || preferred_start < now {
        return Ok(ShiftDecision::stay(&preferred, Some(preferred_start)));
    }
    let len = spec.block_length;
    let in_pref = |t: usize| (preferred_start..preferred_start + len).contains(&t);
    let base = |t: usize| aggregate[t] - preferred[t];
    let mut best: Option<(f64, usize, usize)> = None;
    for start in spec.earliest.max(now)..=spec.deadline + 1 - len {
        if start == preferred_start {
            continue;
        }
        let hours = start..start + len;
        if hours.clone().any(|t| base(t) + spec.block_energy > capacity) {
            continue;
        }
        let removed_over: f64 = (preferred_start..preferred_start + len)
            .filter(|t| !hours.contains(t) && aggregate[*t] > capacity)
            .map(|_| spec.block_energy)
            .sum();
        let delay = start.abs_diff(preferred_start);
        let gain = lambda * removed_over - ts_cost(beta, delay as f64)?;
        let better = match best {
            None => true,
            Some((g, d, _)) => gain > g || (gain == g && delay < d),
        };
        if better {
            best = Some((gain, delay, start));
        }
    }
    let Some((gain, delay, start)) = best else {
        return Ok(ShiftDecision::stay(&preferred, Some(preferred_start)));
    };
    if gain <= 0.0 {
        return Ok(ShiftDecision::stay(&preferred, Some(preferred_start)));
    }
    let profile = spec.profile(start);
    let mut delta_e = [0.0; HOURS_PER_DAY];
    let mut added = [0.0; HOURS_PER_DAY];
    for t in 0..HOURS_PER_DAY {
        let new_here = (start..start + len).contains(&t);
        if in_pref(t) && !new_here {
            delta_e[t] = spec.block_energy;
        } else if new_here && !in_pref(t) {
            added[t] = spec.block_energy;
        }
    }
    let delay = delay as f64;
    Ok(ShiftDecision { profile, delta_e, added, delay, dis_cost: ts_cost(beta, delay)?, moved: true, start: Some(start) })
}

fn mean_hour(profile: &DayProfile) -> f64 {
    let total: f64 = profile.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    profile.iter().enumerate().map(|(t, e)| t as f64 * e).sum::<f64>() / total
}

impl ChargeSpec {
    /// Checks that `preferred` respects the window and the rate limit.
    pub fn validate(&self, preferred: &DayProfile) -> Result<(), HouseholdError> {
        if self.deadline >= HOURS_PER_DAY || self.earliest > self.deadline || self.max_rate <= 0.0 {
            return Err(HouseholdError::Config(format!("charging window {}..={} at {} kW", self.earliest, self.deadline, self.max_rate)));
        }
        for (t, e) in preferred.iter().enumerate() {
            let inside = (self.earliest..=self.deadline).contains(&t);
            if *e < 0.0 || (!inside && *e > 0.0) || *e > self.max_rate + 1e-12 {
                return Err(HouseholdError::Config(format!("preferred charging of {e} kWh at hour {t} violates the window or rate")));
            }
        }
        Ok(())
    }
}

/// Redistributes the not-yet-delivered energy of an interruptible load
/// from hour `now` on.
///
/// Hours of the window are filled in ascending order of the load of
/// everyone else, first up to the remaining capacity headroom and the rate
/// limit, then (if energy is left) up to the rate limit alone. The new
/// profile is adopted when `lambda * (energy removed from over-capacity
/// hours) - beta * delay^2` is positive, where the delay is how far the
/// energy-weighted mean charging hour moves later.
pub fn schedule_ts_i(
    spec: &ChargeSpec,
    beta: f64,
    lambda: f64,
    preferred: &DayProfile,
    aggregate: &DayProfile,
    capacity: f64,
    now: usize,
) -> Result<ShiftDecision, HouseholdError> {
    spec.validate(preferred)?;
    let first = spec.earliest.max(now);
    let remaining: f64 = preferred[now.min(HOURS_PER_DAY)..].iter().sum();
    let open = if first <= spec.deadline { spec.deadline + 1 - first } else { 0 };
    if remaining > spec.max_rate * open as f64 + 1e-9 {
        return Err(HouseholdError::Config(format!("{remaining} kWh cannot be delivered in {open} h at {} kW", spec.max_rate)));
    }
    if lambda <= 0.0 || remaining <= 0.0 {
        return Ok(ShiftDecision::stay(preferred, None));
    }
    let mut order: Vec<usize> = (first..=spec.deadline).collect();
    let base = |t: usize| aggregate[t] - preferred[t];
    order.sort_by(|a, b| base(*a).total_cmp(&base(*b)).then(a.cmp(b)));

    let mut profile = *preferred;
    profile[now..].fill(0.0);
    let mut left = remaining;
    for &t in &order {
        let room = spec.max_rate.min((capacity - base(t)).max(0.0));
        let take = room.min(left);
        profile[t] += take;
        left -= take;
    }
    for &t in &order {
        if left <= 0.0 {
            break;
        }
        let take = (spec.max_rate - profile[t]).max(0.0).min(left);
        profile[t] += take;
        left -= take;
    }
    // absorb rounding so the delivered total matches exactly
    let delivered: f64 = profile[now..].iter().sum();
    if let Some(&t) = order.iter().rev().find(|t| profile[**t] > 0.0) {
        profile[t] += remaining - delivered;
    }

    let mut delta_e = [0.0; HOURS_PER_DAY];
    let mut added = [0.0; HOURS_PER_DAY];
    for t in now..HOURS_PER_DAY {
        let d = preferred[t] - profile[t];
        if d > 0.0 {
            delta_e[t] = d;
        } else {
            added[t] = -d;
        }
    }
    let delay = (mean_hour(&profile) - mean_hour(preferred)).max(0.0);
    let dis_cost = ts_cost(beta, delay)?;
    let removed_over: f64 = (now..HOURS_PER_DAY).filter(|t| aggregate[*t] > capacity).map(|t| delta_e[t]).sum();
    if lambda * removed_over - dis_cost <= 0.0 {
        return Ok(ShiftDecision::stay(preferred, None));
    }
    Ok(ShiftDecision { profile, delta_e, added, delay, dis_cost, moved: true, start: None })
}
