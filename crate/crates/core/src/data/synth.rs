//! Synthetic stand-in for the licensed residential dataset.
//!
//! Each household follows a night-heavy base sinusoid plus a late-evening
//! bump; the wholesale price follows a diurnal curve peaking with the load.
//! All randomness (day-to-day scaling, hourly noise, price spikes) is scaled
//! by `noise`, so `noise = 0` yields an exactly periodic daily profile.

use super::{HourlyRecord, HourlySeries, HOURS_PER_DAY};
use chrono::{Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub days: usize,
    pub households: usize,
    pub start: NaiveDate,
    /// Multiplier on every stochastic component; 0 disables them.
    pub noise: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            days: 183,
            households: 3,
            start: NaiveDate::from_ymd_opt(2018, 4, 1).expect("valid date"),
            noise: 1.0,
        }
    }
}

struct HouseShape {
    scale: f64,
    peak_hour: f64,
}

// Per-household base level, night swing and evening bump, kW at scale 1.
const BASE_KW: f64 = 1.76;
const NIGHT_SWING_KW: f64 = 0.53;
const BUMP_KW: f64 = 1.41;
const BUMP_WIDTH_H: f64 = 1.5;

fn house_shape(index: usize) -> HouseShape {
    const SCALES: [f64; 3] = [0.85, 1.0, 1.15];
    const SHIFTS: [f64; 3] = [-0.3, 0.0, 0.3];
    HouseShape { scale: SCALES[index % 3], peak_hour: 22.0 + SHIFTS[index % 3] }
}

/// Circular distance between clock hours.
fn clock_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs() % 24.0;
    d.min(24.0 - d)
}

fn bump(hour: f64, centre: f64, width: f64) -> f64 {
    let d = clock_distance(hour, centre);
    (-d * d / (2.0 * width * width)).exp()
}

fn household_profile(shape: &HouseShape, clock_hour: f64) -> f64 {
    shape.scale
        * (BASE_KW
            + NIGHT_SWING_KW * (2.0 * PI * (clock_hour - 1.0) / 24.0).cos()
            + BUMP_KW * bump(clock_hour, shape.peak_hour, BUMP_WIDTH_H))
}

fn price_profile(clock_hour: f64) -> f64 {
    4.0 + 5.5 * bump(clock_hour, 21.5, 2.5) + 0.8 * (2.0 * PI * (clock_hour - 1.0) / 24.0).cos()
}

/// Generates `config.days` whole days of hourly loads and prices.
/// Identical configs produce identical series.
pub fn synth_generate(config: &SynthConfig) -> HourlySeries {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let noise = config.noise.max(0.0);
    let shapes: Vec<HouseShape> = (0..config.households).map(house_shape).collect();
    let start = config.start.and_hms_opt(0, 0, 0).expect("midnight exists");
    let normal = |rng: &mut ChaCha8Rng| -> f64 { StandardNormal.sample(rng) };

    let mut records = Vec::with_capacity(config.days * HOURS_PER_DAY);
    for day in 0..config.days {
        let day_factor = 1.0 + noise * (0.035 * normal(&mut rng)).clamp(-0.07, 0.07);
        let house_factors: Vec<f64> =
            shapes.iter().map(|_| 1.0 + noise * (0.02 * normal(&mut rng)).clamp(-0.04, 0.04)).collect();
        let price_factor = 1.0 + noise * (0.06 * normal(&mut rng)).clamp(-0.15, 0.15);
        for hour in 0..HOURS_PER_DAY {
            let clock = hour as f64;
            let loads = shapes
                .iter()
                .zip(&house_factors)
                .map(|(shape, hf)| {
                    let clean = day_factor * hf * household_profile(shape, clock);
                    let jitter = noise * 0.05 * shape.scale * normal(&mut rng);
                    (clean + jitter).max(0.05)
                })
                .collect();
            let mut price = price_factor * price_profile(clock) + noise * 0.25 * normal(&mut rng);
            let spike_draw: f64 = rng.random();
            if spike_draw < 0.02 * noise {
                price *= rng.random_range(1.3..1.8);
            }
            records.push(HourlyRecord {
                timestamp: start + Duration::hours((day * HOURS_PER_DAY + hour) as i64),
                loads,
                price: price.clamp(2.0, 40.0),
            });
        }
    }
    let ids = (1..=config.households).map(|i| i.to_string()).collect();
    HourlySeries::new(ids, records).expect("generator emits a valid hourly series")
}
