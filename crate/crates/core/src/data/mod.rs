//! Hourly load/price series: ingestion, calendar features, train/test splits
//! and the synthetic three-household generator.

mod calendar;
mod csv_io;
mod synth;

pub use calendar::{calendar_features, CalendarFeatures, HolidayCalendar};
pub use csv_io::{load_series, read_series, write_series, write_series_to, ColumnSchema, MAX_GAP_HOURS, MAX_MISSING_FRACTION};
pub use synth::{synth_generate, SynthConfig};

use chrono::{Duration, NaiveDate, NaiveDateTime, Timelike};
use std::ops::Range;
use thiserror::Error;

/// Hours per simulated day.
pub const HOURS_PER_DAY: usize = 24;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: column `{column}`: {message}")]
    Parse { line: usize, column: String, message: String },
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("duplicate timestamp {0}")]
    DuplicateTimestamp(NaiveDateTime),
    #[error("gap of {missing} consecutive missing hours after {after} exceeds the interpolation limit")]
    GapTooLong { after: NaiveDateTime, missing: usize },
    #[error("{missing} of {expected} hours are missing (limit {limit_pct}%)")]
    TooManyMissing { missing: usize, expected: usize, limit_pct: f64 },
    #[error("invalid series: {0}")]
    Invalid(String),
}

/// Which column of a series a model or feature refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Quantity {
    /// Wholesale price, ¢/kWh.
    Price,
    /// Load of the household at this position, kW.
    Load(usize),
}

impl Quantity {
    /// Short label used in file names and reports.
    pub fn label(self) -> String {
        match self {
            Quantity::Price => "price".to_string(),
            Quantity::Load(n) => format!("load_{}", n + 1),
        }
    }
}

/// One hour of data: per-household demand (kW) and the wholesale price (¢/kWh).
#[derive(Debug, Clone, PartialEq)]
pub struct HourlyRecord {
    pub timestamp: NaiveDateTime,
    pub loads: Vec<f64>,
    pub price: f64,
}

/// Gap-free, strictly hourly sequence of [`HourlyRecord`]s.
#[derive(Debug, Clone, PartialEq)]
pub struct HourlySeries {
    household_ids: Vec<String>,
    records: Vec<HourlyRecord>,
    interpolated: Vec<bool>,
}

impl HourlySeries {
    /// Builds a series, checking the hourly spacing and value invariants.
    pub fn new(household_ids: Vec<String>, records: Vec<HourlyRecord>) -> Result<Self, DataError> {
        let n = records.len();
        Self::with_flags(household_ids, records, vec![false; n])
    }

    pub(crate) fn with_flags(
        household_ids: Vec<String>,
        records: Vec<HourlyRecord>,
        interpolated: Vec<bool>,
    ) -> Result<Self, DataError> {
        if household_ids.is_empty() {
            return Err(DataError::Invalid("series has no households".into()));
        }
        for (i, r) in records.iter().enumerate() {
            if r.loads.len() != household_ids.len() {
                return Err(DataError::Invalid(format!(
                    "record {i} has {} loads, expected {}",
                    r.loads.len(),
                    household_ids.len()
                )));
            }
            if r.timestamp.minute() != 0 || r.timestamp.second() != 0 {
                return Err(DataError::Invalid(format!("{} is not on the hour", r.timestamp)));
            }
            if r.loads.iter().any(|l| !l.is_finite() || *l < 0.0) || !r.price.is_finite() || r.price < 0.0 {
                return Err(DataError::Invalid(format!("negative or non-finite value at {}", r.timestamp)));
            }
            if i > 0 && r.timestamp - records[i - 1].timestamp != Duration::hours(1) {
                return Err(DataError::Invalid(format!(
                    "timestamps {} and {} are not one hour apart",
                    records[i - 1].timestamp, r.timestamp
                )));
            }
        }
        Ok(Self { household_ids, records, interpolated })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn household_ids(&self) -> &[String] {
        &self.household_ids
    }

    pub fn n_households(&self) -> usize {
        self.household_ids.len()
    }

    pub fn records(&self) -> &[HourlyRecord] {
        &self.records
    }

    /// Per-record flag marking hours filled by interpolation during ingestion.
    pub fn interpolated(&self) -> &[bool] {
        &self.interpolated
    }

    pub fn timestamp(&self, index: usize) -> NaiveDateTime {
        self.records[index].timestamp
    }

    /// Value of `quantity` at `index`.
    pub fn value(&self, quantity: Quantity, index: usize) -> f64 {
        let r = &self.records[index];
        match quantity {
            Quantity::Price => r.price,
            Quantity::Load(n) => r.loads[n],
        }
    }

    /// The whole column of `quantity`.
    pub fn column(&self, quantity: Quantity) -> Vec<f64> {
        (0..self.len()).map(|i| self.value(quantity, i)).collect()
    }

    /// Sum of household loads at `index`.
    pub fn aggregate_load(&self, index: usize) -> f64 {
        self.records[index].loads.iter().sum()
    }

    pub fn index_of(&self, timestamp: NaiveDateTime) -> Option<usize> {
        let first = self.records.first()?.timestamp;
        let offset = (timestamp - first).num_hours();
        if offset < 0 || (timestamp - first) != Duration::hours(offset) {
            return None;
        }
        let idx = offset as usize;
        (idx < self.len()).then_some(idx)
    }

    /// Index range of the 24 hours of `day`, if the series covers all of them.
    pub fn day_range(&self, day: NaiveDate) -> Option<Range<usize>> {
        let start = self.index_of(day.and_hms_opt(0, 0, 0)?)?;
        (start + HOURS_PER_DAY <= self.len()).then(|| start..start + HOURS_PER_DAY)
    }

    /// Dates fully covered (all 24 hours) by the series, in order.
    pub fn full_days(&self) -> Vec<NaiveDate> {
        let mut days = Vec::new();
        let mut i = 0;
        while i < self.len() {
            let ts = self.records[i].timestamp;
            if ts.hour() == 0 && i + HOURS_PER_DAY <= self.len() {
                days.push(ts.date());
                i += HOURS_PER_DAY;
            } else {
                i += 1;
            }
        }
        days
    }

    /// Contiguous sub-series over `range`.
    pub fn slice(&self, range: Range<usize>) -> HourlySeries {
        HourlySeries {
            household_ids: self.household_ids.clone(),
            records: self.records[range.clone()].to_vec(),
            interpolated: self.interpolated[range].to_vec(),
        }
    }

    /// Sub-series of all hours strictly before `timestamp`.
    pub fn before(&self, timestamp: NaiveDateTime) -> HourlySeries {
        let end = self.records.iter().take_while(|r| r.timestamp < timestamp).count();
        self.slice(0..end)
    }
}

/// Chronological train/test split.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub train: HourlySeries,
    pub test: HourlySeries,
}

/// Splits `series` into a test window covering the whole days
/// `test_start..=test_end` and a training part made of every hour before it.
pub fn split_by_window(series: &HourlySeries, test_start: NaiveDate, test_end: NaiveDate) -> Result<DatasetSplit, DataError> {
    if test_end < test_start {
        return Err(DataError::Invalid(format!("test window {test_start}..{test_end} is empty")));
    }
    let first = series
        .day_range(test_start)
        .ok_or_else(|| DataError::Invalid(format!("series does not cover {test_start}")))?;
    let last = series
        .day_range(test_end)
        .ok_or_else(|| DataError::Invalid(format!("series does not cover {test_end}")))?;
    if first.start == 0 {
        return Err(DataError::Invalid("no training hours before the test window".into()));
    }
    Ok(DatasetSplit { train: series.slice(0..first.start), test: series.slice(first.start..last.end) })
}
