//! Load-shape statistics, financial ledgers and the exported result tables.

use crate::market_env::EpisodeTrace;
use serde::{Deserialize, Serialize};
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadStats {
    pub peak: f64,
    pub mean: f64,
    pub par: f64,
}

pub fn load_stats(loads: &[f64]) -> Result<LoadStats, MetricsError> {
    if loads.is_empty() || loads.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(MetricsError::Invalid("loads must be non-empty, finite and non-negative".into()));
    }
    let peak = loads.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = loads.iter().sum::<f64>() / loads.len() as f64;
    LoadStats::from_peak_mean(peak, mean)
}

impl LoadStats {
    pub fn from_peak_mean(peak: f64, mean: f64) -> Result<Self, MetricsError> {
        if !(mean > 0.0) {
            return Err(MetricsError::Invalid(format!("mean load must be positive, got {mean}")));
        }
        Ok(Self { peak, mean, par: peak / mean })
    }
}

/// Relative PAR reduction in percent; negative when `treated` is worse.
pub fn par_improvement(base: &LoadStats, treated: &LoadStats) -> f64 {
    100.0 * (base.par - treated.par) / base.par
}

/// Element-wise mean of daily statistics.
pub fn mean_stats(days: &[LoadStats]) -> Result<LoadStats, MetricsError> {
    if days.is_empty() {
        return Err(MetricsError::Invalid("no days to average".into()));
    }
    let n = days.len() as f64;
    Ok(LoadStats {
        peak: days.iter().map(|s| s.peak).sum::<f64>() / n,
        mean: days.iter().map(|s| s.mean).sum::<f64>() / n,
        par: days.iter().map(|s| s.par).sum::<f64>() / n,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EuLedger {
    pub id: String,
    pub reduction: f64,
    /// Raw incentive income, `sum lambda dE`.
    pub income: f64,
    pub discomfort: f64,
    /// `rho * income - (1 - rho) * discomfort`.
    pub profit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinancialLedger {
    pub rho: f64,
    pub eu: Vec<EuLedger>,
    /// Avoided wholesale cost, `sum p dE`.
    pub sp_gross: f64,
    /// Incentives paid, `sum lambda dE`.
    pub sp_cost: f64,
    pub sp_profit: f64,
}

impl FinancialLedger {
    pub fn eu_profit_total(&self) -> f64 {
        self.eu.iter().map(|e| e.profit).sum()
    }
}

pub fn ledger(trace: &EpisodeTrace, rho: f64) -> Result<FinancialLedger, MetricsError> {
    let n = trace.household_ids.len();
    if trace.steps.len() != crate::data::HOURS_PER_DAY {
        return Err(MetricsError::Invalid(format!("trace of {} hours is incomplete", trace.steps.len())));
    }
    let mut eu: Vec<EuLedger> =
        trace.household_ids.iter().map(|id| EuLedger { id: id.clone(), reduction: 0.0, income: 0.0, discomfort: 0.0, profit: 0.0 }).collect();
    let (mut gross, mut cost) = (0.0, 0.0);
    for s in &trace.steps {
        if s.delta_e.len() != n || s.lambda.len() != n || s.dis_cost.len() != n {
            return Err(MetricsError::Invalid(format!("hour {} does not cover {n} households", s.hour)));
        }
        for (k, e) in eu.iter_mut().enumerate() {
            let pay = s.lambda[k] * s.delta_e[k];
            e.reduction += s.delta_e[k];
            e.income += pay;
            e.discomfort += s.dis_cost[k];
            gross += s.price * s.delta_e[k];
            cost += pay;
        }
    }
    for e in &mut eu {
        e.profit = rho * e.income - (1.0 - rho) * e.discomfort;
    }
    Ok(FinancialLedger { rho, eu, sp_gross: gross, sp_cost: cost, sp_profit: gross - cost })
}

/// Spearman rank correlation (average ranks for ties).
pub fn rank_correlation(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let ranks = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|a, b| v[*a].total_cmp(&v[*b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            for k in i..=j {
                r[idx[k]] = (i + j) as f64 / 2.0;
            }
            i = j + 1;
        }
        r
    };
    let (rx, ry) = (ranks(x), ranks(y));
    let m = (x.len() - 1) as f64 / 2.0;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - m) * (b - m)).sum();
    let vx: f64 = rx.iter().map(|a| (a - m).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - m).powi(2)).sum();
    (vx > 0.0 && vy > 0.0).then(|| cov / (vx * vy).sqrt())
}

/// `metric,<label>...` with rows peak, mean and par.
pub fn write_table6<W: Write>(writer: W, columns: &[(&str, LoadStats)]) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut head = vec!["metric".to_string()];
    head.extend(columns.iter().map(|(l, _)| l.to_string()));
    w.write_record(&head)?;
    let rows: [(&str, fn(&LoadStats) -> f64); 3] = [("peak", |s| s.peak), ("mean", |s| s.mean), ("par", |s| s.par)];
    for (name, get) in rows {
        let mut row = vec![name.to_string()];
        row.extend(columns.iter().map(|(_, s)| get(s).to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `entry,rho_<value>...` with per-household and provider rows.
pub fn write_table7<W: Write>(writer: W, ledgers: &[FinancialLedger]) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut head = vec!["entry".to_string()];
    head.extend(ledgers.iter().map(|l| format!("rho_{}", l.rho)));
    w.write_record(&head)?;
    let Some(first) = ledgers.first() else {
        w.flush()?;
        return Ok(());
    };
    let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
    for (k, e) in first.eu.iter().enumerate() {
        for (field, get) in [
            ("reduction_kwh", (|e: &EuLedger| e.reduction) as fn(&EuLedger) -> f64),
            ("income", |e| e.income),
            ("discomfort", |e| e.discomfort),
            ("profit", |e| e.profit),
        ] {
            rows.push((format!("eu_{}_{field}", e.id), ledgers.iter().map(|l| get(&l.eu[k])).collect()));
        }
    }
    rows.push(("eu_total_profit".into(), ledgers.iter().map(FinancialLedger::eu_profit_total).collect()));
    rows.push(("sp_gross".into(), ledgers.iter().map(|l| l.sp_gross).collect()));
    rows.push(("sp_cost".into(), ledgers.iter().map(|l| l.sp_cost).collect()));
    rows.push(("sp_profit".into(), ledgers.iter().map(|l| l.sp_profit).collect()));
    for (name, values) in rows {
        let mut row = vec![name];
        row.extend(values.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `scenario,peak,mean,par`, one row per labeled series.
pub fn write_fig13<W: Write>(writer: W, series: &[(&str, LoadStats)]) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["scenario", "peak", "mean", "par"])?;
    for (label, s) in series {
        w.write_record([label.to_string(), s.peak.to_string(), s.mean.to_string(), s.par.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `hour,<label>...` hourly aggregate loads side by side.
pub fn write_profiles<W: Write>(writer: W, series: &[(&str, Vec<f64>)]) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut head = vec!["hour".to_string()];
    head.extend(series.iter().map(|(l, _)| l.to_string()));
    w.write_record(&head)?;
    let hours = series.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
    for h in 0..hours {
        let mut row = vec![(h + 1).to_string()];
        row.extend(series.iter().map(|(_, v)| v.get(h).map(f64::to_string).unwrap_or_default()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
