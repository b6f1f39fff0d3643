use super::ForecastError;
use crate::data::{calendar_features, HolidayCalendar, HourlySeries, Quantity};
use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

/// Lags of the target quantity, in feature order.
pub const LAGS: [usize; 9] = [1, 2, 3, 24, 25, 26, 48, 49, 50];
/// Deepest lag; the first index with a complete feature vector.
pub const MAX_LAG: usize = 50;
/// Five calendar fields followed by the nine lags.
pub const N_FEATURES: usize = 14;
/// Position of the first lag inside the vector.
pub const LAG_OFFSET: usize = 5;

/// `[month, day_of_week, hour, holiday, weekend, lag1, lag2, lag3, lag24,
/// lag25, lag26, lag48, lag49, lag50]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; N_FEATURES]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Value of the lag `lag` hours back.
    pub fn lag(&self, lag: usize) -> Option<f64> {
        LAGS.iter().position(|l| *l == lag).map(|k| self.0[LAG_OFFSET + k])
    }

    /// Builds a vector for hour `index` from a timestamp and a lookup of
    /// earlier target values.
    pub fn assemble(timestamp: NaiveDateTime, holidays: &HolidayCalendar, index: usize, history: impl Fn(usize) -> f64) -> Self {
        let mut v = [0.0; N_FEATURES];
        v[..LAG_OFFSET].copy_from_slice(&calendar_features(timestamp, holidays).as_array());
        for (k, lag) in LAGS.iter().enumerate() {
            v[LAG_OFFSET + k] = history(index - lag);
        }
        FeatureVector(v)
    }
}

/// Feature vector of `target` for the hour at (zero-based) `index`.
///
/// Needs `index >= 50` so that every lag is inside the series.
pub fn build_features(series: &HourlySeries, target: Quantity, index: usize, holidays: &HolidayCalendar) -> Result<FeatureVector, ForecastError> {
    if index < MAX_LAG {
        return Err(ForecastError::InsufficientHistory { index, required_lag: MAX_LAG });
    }
    if index >= series.len() {
        return Err(ForecastError::Invalid(format!("hour index {index} beyond series of {} hours", series.len())));
    }
    if let Quantity::Load(n) = target {
        if n >= series.n_households() {
            return Err(ForecastError::Invalid(format!("household {n} not in series")));
        }
    }
    Ok(FeatureVector::assemble(series.timestamp(index), holidays, index, |i| series.value(target, i)))
}

/// Per-feature min-max scaling to `[0, 1]`; constant features map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMax {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMax {
    /// Column-wise bounds over `rows`.
    pub fn fit<'a>(rows: impl IntoIterator<Item = &'a [f64]>) -> Option<Self> {
        let mut it = rows.into_iter();
        let first = it.next()?;
        let (mut min, mut max) = (first.to_vec(), first.to_vec());
        for row in it {
            for ((lo, hi), v) in min.iter_mut().zip(max.iter_mut()).zip(row) {
                *lo = lo.min(*v);
                *hi = hi.max(*v);
            }
        }
        Some(Self { min, max })
    }

    fn span(&self, k: usize) -> f64 {
        let s = self.max[k] - self.min[k];
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn normalize_at(&self, k: usize, x: f64) -> f64 {
        (x - self.min[k]) / self.span(k)
    }

    pub fn denormalize_at(&self, k: usize, z: f64) -> f64 {
        z * self.span(k) + self.min[k]
    }

    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter().enumerate().map(|(k, v)| self.normalize_at(k, *v)).collect()
    }

    pub fn denormalize(&self, z: &[f64]) -> Vec<f64> {
        z.iter().enumerate().map(|(k, v)| self.denormalize_at(k, *v)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::HourlyRecord;
    use chrono::{Duration, NaiveDate};
    use proptest::prelude::*;

    fn series_from(values: &[f64]) -> HourlySeries {
        let start = NaiveDate::from_ymd_opt(2018, 4, 2).unwrap().and_hms_opt(0, 0, 0).unwrap();
        let records = values
            .iter()
            .enumerate()
            .map(|(i, v)| HourlyRecord { timestamp: start + Duration::hours(i as i64), loads: vec![*v], price: *v })
            .collect();
        HourlySeries::new(vec!["1".into()], records).unwrap()
    }

    #[test]
    fn constant_series_gives_constant_lags() {
        let s = series_from(&[3.5; 80]);
        let f = build_features(&s, Quantity::Price, 60, &HolidayCalendar::default()).unwrap();
        assert!(f.0[LAG_OFFSET..].iter().all(|v| *v == 3.5));
    }

    #[test]
    fn index_series_recovers_lag_offsets() {
        let values: Vec<f64> = (0..120).map(|i| i as f64).collect();
        let s = series_from(&values);
        let h = 100;
        let f = build_features(&s, Quantity::Load(0), h, &HolidayCalendar::default()).unwrap();
        let expected: Vec<f64> = LAGS.iter().map(|l| (h - l) as f64).collect();
        assert_eq!(&f.0[LAG_OFFSET..], expected.as_slice());
        // 2018-04-06 04:00 is a Friday in April
        assert_eq!(&f.0[..LAG_OFFSET], &[4.0, 5.0, 5.0, 0.0, 0.0]);
        assert_eq!(f.lag(24), Some(76.0));
    }

    #[test]
    fn first_complete_index_is_fifty() {
        let s = series_from(&[1.0; 60]);
        let cal = HolidayCalendar::default();
        // the fiftieth hour of the series (index 49) lacks its 50-hour lag
        let err = build_features(&s, Quantity::Price, 49, &cal).unwrap_err();
        assert!(matches!(err, ForecastError::InsufficientHistory { required_lag: 50, .. }));
        assert!(err.to_string().contains("50"));
        assert!(build_features(&s, Quantity::Price, 50, &cal).is_ok());
    }

    #[test]
    fn constant_column_normalizes_to_zero() {
        let rows = [vec![2.0, 1.0], vec![2.0, 3.0]];
        let mm = MinMax::fit(rows.iter().map(|r| r.as_slice())).unwrap();
        assert_eq!(mm.normalize(&[2.0, 2.0]), vec![0.0, 0.5]);
    }

    proptest! {
        #[test]
        fn features_ignore_future_values(noise in proptest::collection::vec(0.0f64..50.0, 40)) {
            let base: Vec<f64> = (0..100).map(|i| (i % 24) as f64).collect();
            let mut mutated = base.clone();
            for (k, v) in noise.iter().enumerate() {
                mutated[60 + k] = *v;
            }
            let cal = HolidayCalendar::default();
            let a = build_features(&series_from(&base), Quantity::Price, 60, &cal).unwrap();
            let b = build_features(&series_from(&mutated), Quantity::Price, 60, &cal).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn normalization_round_trips(rows in proptest::collection::vec(proptest::collection::vec(-1e3f64..1e3, 3), 2..20)) {
            let mm = MinMax::fit(rows.iter().map(|r| r.as_slice())).unwrap();
            for r in &rows {
                let back = mm.denormalize(&mm.normalize(r));
                for (a, b) in back.iter().zip(r) {
                    prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
                }
            }
        }
    }
}
