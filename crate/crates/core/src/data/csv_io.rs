use super::{DataError, HourlyRecord, HourlySeries};
use chrono::{Duration, NaiveDateTime, Timelike};
use std::io::{Read, Write};
use std::path::Path;

/// Longest run of consecutive missing hours that is filled by interpolation.
pub const MAX_GAP_HOURS: usize = 3;
/// Largest tolerated share of missing hours.
pub const MAX_MISSING_FRACTION: f64 = 0.05;

const TIMESTAMP_FORMATS: [&str; 4] = ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"];

/// Maps CSV columns onto a series.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSchema {
    pub timestamp: String,
    /// Explicit load columns; `None` selects every column starting with `load_`.
    pub loads: Option<Vec<String>>,
    pub price: String,
}

impl Default for ColumnSchema {
    fn default() -> Self {
        Self { timestamp: "timestamp".into(), loads: None, price: "price".into() }
    }
}

pub fn load_series(path: &Path, schema: &ColumnSchema) -> Result<HourlySeries, DataError> {
    let file = std::fs::File::open(path).map_err(|source| DataError::Io { path: path.display().to_string(), source })?;
    read_series(file, schema)
}

fn parse_timestamp(raw: &str) -> Option<NaiveDateTime> {
    let raw = raw.trim();
    TIMESTAMP_FORMATS.iter().find_map(|f| NaiveDateTime::parse_from_str(raw, f).ok())
}

/// Reads a series from CSV, sorting rows and interpolating short gaps.
pub fn read_series<R: Read>(reader: R, schema: &ColumnSchema) -> Result<HourlySeries, DataError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name).ok_or_else(|| DataError::MissingColumn(name.to_string()));
    let ts_col = find(&schema.timestamp)?;
    let price_col = find(&schema.price)?;
    let load_names: Vec<String> = match &schema.loads {
        Some(names) => names.clone(),
        None => headers.iter().filter(|h| h.starts_with("load_")).map(str::to_string).collect(),
    };
    if load_names.is_empty() {
        return Err(DataError::MissingColumn("load_<id>".into()));
    }
    let load_cols = load_names.iter().map(|n| find(n)).collect::<Result<Vec<_>, _>>()?;
    let ids: Vec<String> = load_names.iter().map(|n| n.strip_prefix("load_").unwrap_or(n).to_string()).collect();

    let mut rows = Vec::new();
    for result in rdr.records() {
        let record = result?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |col: usize| record.get(col).unwrap_or("");
        let timestamp = parse_timestamp(field(ts_col)).ok_or_else(|| DataError::Parse {
            line,
            column: schema.timestamp.clone(),
            message: format!("`{}` is not an ISO-8601 timestamp", field(ts_col)),
        })?;
        if timestamp.minute() != 0 || timestamp.second() != 0 {
            return Err(DataError::Parse { line, column: schema.timestamp.clone(), message: "sub-hourly timestamp".into() });
        }
        let number = |col: usize, name: &str| -> Result<f64, DataError> {
            let v: f64 = field(col).parse().map_err(|_| DataError::Parse {
                line,
                column: name.to_string(),
                message: format!("`{}` is not a number", field(col)),
            })?;
            if !v.is_finite() || v < 0.0 {
                return Err(DataError::Parse { line, column: name.to_string(), message: format!("value {v} must be finite and >= 0") });
            }
            Ok(v)
        };
        let loads = load_cols.iter().zip(&load_names).map(|(&c, n)| number(c, n)).collect::<Result<Vec<_>, _>>()?;
        let price = number(price_col, &schema.price)?;
        rows.push(HourlyRecord { timestamp, loads, price });
    }
    if rows.is_empty() {
        return Err(DataError::Invalid("no data rows".into()));
    }
    rows.sort_by_key(|r| r.timestamp);
    fill_gaps(ids, rows)
}

fn fill_gaps(ids: Vec<String>, rows: Vec<HourlyRecord>) -> Result<HourlySeries, DataError> {
    let mut records: Vec<HourlyRecord> = Vec::with_capacity(rows.len());
    let mut flags = Vec::with_capacity(rows.len());
    let mut missing_total = 0usize;
    for row in rows {
        if let Some(prev) = records.last() {
            let step = (row.timestamp - prev.timestamp).num_hours();
            if step == 0 {
                return Err(DataError::DuplicateTimestamp(row.timestamp));
            }
            let missing = (step - 1) as usize;
            if missing > MAX_GAP_HOURS {
                return Err(DataError::GapTooLong { after: prev.timestamp, missing });
            }
            let prev = prev.clone();
            for k in 1..=missing {
                let w = k as f64 / (missing + 1) as f64;
                let lerp = |a: f64, b: f64| a + (b - a) * w;
                records.push(HourlyRecord {
                    timestamp: prev.timestamp + Duration::hours(k as i64),
                    loads: prev.loads.iter().zip(&row.loads).map(|(a, b)| lerp(*a, *b)).collect(),
                    price: lerp(prev.price, row.price),
                });
                flags.push(true);
            }
            missing_total += missing;
        }
        records.push(row);
        flags.push(false);
    }
    let expected = records.len();
    if missing_total as f64 > MAX_MISSING_FRACTION * expected as f64 {
        return Err(DataError::TooManyMissing { missing: missing_total, expected, limit_pct: MAX_MISSING_FRACTION * 100.0 });
    }
    HourlySeries::with_flags(ids, records, flags)
}

/// Writes `series` as `timestamp,load_<id>...,price`.
pub fn write_series_to<W: Write>(writer: W, series: &HourlySeries) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["timestamp".to_string()];
    header.extend(series.household_ids().iter().map(|id| format!("load_{id}")));
    header.push("price".into());
    w.write_record(&header)?;
    for r in series.records() {
        let mut row = vec![r.timestamp.format("%Y-%m-%dT%H:%M:%S").to_string()];
        row.extend(r.loads.iter().map(|v| v.to_string()));
        row.push(r.price.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|source| DataError::Io { path: "<csv output>".into(), source })?;
    Ok(())
}

pub fn write_series(path: &Path, series: &HourlySeries) -> Result<(), DataError> {
    let file = std::fs::File::create(path).map_err(|source| DataError::Io { path: path.display().to_string(), source })?;
    write_series_to(std::io::BufWriter::new(file), series)
}
