use super::DataError;
use chrono::{Datelike, NaiveDate, NaiveDateTime, Timelike, Weekday};
use std::collections::BTreeSet;
use std::path::Path;

/// Calendar inputs shared by the price and load forecasters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CalendarFeatures {
    /// 1–12.
    pub month_of_year: u32,
    /// 1 (Monday) – 7 (Sunday).
    pub day_of_week: u32,
    /// 1–24; hour 1 is the slot starting at 00:00.
    pub hour_of_day: u32,
    pub is_holiday: bool,
    pub is_weekend: bool,
}

impl CalendarFeatures {
    pub fn as_array(&self) -> [f64; 5] {
        [
            self.month_of_year as f64,
            self.day_of_week as f64,
            self.hour_of_day as f64,
            f64::from(u8::from(self.is_holiday)),
            f64::from(u8::from(self.is_weekend)),
        ]
    }
}

/// Explicit list of holiday dates.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HolidayCalendar {
    dates: BTreeSet<NaiveDate>,
}

impl HolidayCalendar {
    pub fn new(dates: impl IntoIterator<Item = NaiveDate>) -> Self {
        Self { dates: dates.into_iter().collect() }
    }

    /// US federal holidays of 2018 (observed dates).
    pub fn us_federal_2018() -> Self {
        const DATES: [(u32, u32); 10] =
            [(1, 1), (1, 15), (2, 19), (5, 28), (7, 4), (9, 3), (10, 8), (11, 12), (11, 22), (12, 25)];
        Self::new(DATES.iter().map(|&(m, d)| NaiveDate::from_ymd_opt(2018, m, d).expect("valid date")))
    }

    /// Parses one ISO date per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, DataError> {
        let mut dates = BTreeSet::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let date = NaiveDate::parse_from_str(line, "%Y-%m-%d").map_err(|e| DataError::Parse {
                line: i + 1,
                column: "date".into(),
                message: e.to_string(),
            })?;
            dates.insert(date);
        }
        Ok(Self { dates })
    }

    pub fn from_file(path: &Path) -> Result<Self, DataError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| DataError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.dates.contains(&date)
    }

    pub fn dates(&self) -> impl Iterator<Item = &NaiveDate> {
        self.dates.iter()
    }
}

pub fn calendar_features(timestamp: NaiveDateTime, holidays: &HolidayCalendar) -> CalendarFeatures {
    let weekday = timestamp.weekday();
    CalendarFeatures {
        month_of_year: timestamp.month(),
        day_of_week: weekday.number_from_monday(),
        hour_of_day: timestamp.hour() + 1,
        is_holiday: holidays.contains(timestamp.date()),
        is_weekend: matches!(weekday, Weekday::Sat | Weekday::Sun),
    }
}
