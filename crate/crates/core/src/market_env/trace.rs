use super::env::StepInfo;
use super::EnvError;
use crate::data::DataError;
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

/// A completed day with the per-hour records behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub date: NaiveDate,
    pub rho: f64,
    pub capacity: f64,
    pub household_ids: Vec<String>,
    pub steps: Vec<StepInfo>,
}

impl EpisodeTrace {
    pub fn load_before(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.load_before).collect()
    }

    pub fn load_after(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.load_after).collect()
    }

    pub fn total_reward(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }
}

const PER_EU: [&str; 5] = ["lambda", "delta_e", "dis_cost", "demand", "consumption"];
const TAIL: [&str; 11] = ["load_before", "load_after", "required", "achieved", "r_miss", "r_over", "phi", "sp_term", "eu_term", "reward", "capacity"];

fn header(ids: &[String]) -> Vec<String> {
    let mut h = vec!["date".to_string(), "hour".into(), "price".into()];
    for col in PER_EU {
        h.extend(ids.iter().map(|id| format!("{col}_{id}")));
    }
    h.extend(TAIL.iter().map(|s| s.to_string()));
    h.push("rho".into());
    h
}

/// Writes one row per hour (floats in shortest round-trip form).
pub fn write_trace<W: Write>(writer: W, trace: &EpisodeTrace) -> Result<(), EnvError> {
    let mut w = csv::Writer::from_writer(writer);
    let csv_err = |e: csv::Error| EnvError::Data(DataError::Csv(e));
    w.write_record(header(&trace.household_ids)).map_err(csv_err)?;
    for s in &trace.steps {
        let mut row = vec![trace.date.to_string(), s.hour.to_string(), s.price.to_string()];
        for col in [&s.lambda, &s.delta_e, &s.dis_cost, &s.demand, &s.consumption] {
            row.extend(col.iter().map(f64::to_string));
        }
        for v in [s.load_before, s.load_after, s.required, s.achieved, s.r_miss, s.r_over, s.phi, s.sp_term, s.eu_term, s.reward, trace.capacity, trace.rho] {
            row.push(v.to_string());
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| EnvError::Data(DataError::Io { path: "trace".into(), source }))?;
    Ok(())
}

/// Reads a trace written by [`write_trace`].
pub fn read_trace<R: Read>(reader: R) -> Result<EpisodeTrace, EnvError> {
    let bad = |why: String| EnvError::Data(DataError::Invalid(why));
    let parse = |line: usize, column: &str, message: String| EnvError::Data(DataError::Parse { line, column: column.to_string(), message });
    let mut r = csv::Reader::from_reader(reader);
    let head: Vec<String> = r.headers().map_err(|e| EnvError::Data(e.into()))?.iter().map(str::to_string).collect();
    let n = head.iter().filter(|h| h.starts_with("lambda_")).count();
    if head.len() != 3 + PER_EU.len() * n + TAIL.len() + 1 {
        return Err(bad(format!("trace header has {} columns", head.len())));
    }
    let ids: Vec<String> = head[3..3 + n].iter().map(|h| h["lambda_".len()..].to_string()).collect();
    if head != header(&ids) {
        return Err(bad("unexpected trace header".into()));
    }
    let mut steps = Vec::new();
    let (mut date, mut rho, mut capacity) = (None, 0.0, 0.0);
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| EnvError::Data(e.into()))?;
        let num = |k: usize| -> Result<f64, EnvError> { rec[k].parse::<f64>().map_err(|e| parse(line + 2, &head[k], e.to_string())) };
        date = Some(rec[0].parse::<NaiveDate>().map_err(|e| parse(line + 2, "date", e.to_string()))?);
        let block = |c: usize| -> Result<Vec<f64>, EnvError> { (0..n).map(|k| num(3 + c * n + k)).collect() };
        let t = 3 + PER_EU.len() * n;
        steps.push(StepInfo {
            hour: rec[1].parse().map_err(|e: std::num::ParseIntError| parse(line + 2, "hour", e.to_string()))?,
            price: num(2)?,
            lambda: block(0)?,
            delta_e: block(1)?,
            dis_cost: block(2)?,
            demand: block(3)?,
            consumption: block(4)?,
            load_before: num(t)?,
            load_after: num(t + 1)?,
            required: num(t + 2)?,
            achieved: num(t + 3)?,
            r_miss: num(t + 4)?,
            r_over: num(t + 5)?,
            phi: num(t + 6)?,
            sp_term: num(t + 7)?,
            eu_term: num(t + 8)?,
            reward: num(t + 9)?,
        });
        capacity = num(t + 10)?;
        rho = num(t + 11)?;
    }
    let date = date.ok_or_else(|| bad("empty trace".into()))?;
    Ok(EpisodeTrace { date, rho, capacity, household_ids: ids, steps })
}
