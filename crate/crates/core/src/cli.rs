//! Command-line front end. Every command reads the same TOML configuration;
//! flags override individual keys.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data or missing
//! input, 3 numeric failure.

use crate::agent::{evaluate, no_dr, rollout, write_training_log};
use crate::config::{keys_help, RunConfig, ScenarioInput};
use crate::data::{read_series, synth_generate, write_series, ColumnSchema, DataError, HolidayCalendar, SynthConfig};
use crate::exec::ExecMode;
use crate::forecast::{evaluate_forecast, forecast_day, AccuracyReport, RollMode, TrainReport};
use crate::market_env::{write_trace, EpisodeTrace, MarketEnv};
use crate::metrics::{ledger, load_stats, mean_stats, par_improvement, write_fig13, write_profiles, write_table6, write_table7, LoadStats};
use crate::pipeline::{self, AgentArtifact, Dataset, ForecastBundle, PipelineError, Prepared, AGENT_FILE};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "ibdr", version, about = "Incentive-based demand response: forecasting, household simulation, DDQN agent and baselines", after_long_help = keys_help())]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML configuration; compiled-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed (overrides `seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Input series CSV (overrides `paths.data`).
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    /// Report directory (overrides `paths.output`).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Checkpoint directory (overrides `paths.checkpoints`).
    #[arg(long, global = true)]
    pub checkpoints: Option<PathBuf>,
    /// Scenario input (overrides `data.scenario`).
    #[arg(long, global = true, value_enum)]
    pub scenario: Option<ScenarioArg>,
    /// Household benefit weight (overrides `env.rho`).
    #[arg(long, global = true)]
    pub rho: Option<f64>,
    /// Fixed capacity in kW (overrides `env.capacity`).
    #[arg(long, global = true)]
    pub capacity: Option<f64>,
    /// Run every data-parallel loop on the calling thread.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScenarioArg {
    Forecast,
    Actual,
}

#[derive(Debug, Clone, Copy, Default, ValueEnum)]
pub enum PolicyArg {
    /// The checkpointed agent.
    #[default]
    Trained,
    /// Always the zero-incentive action.
    Zero,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic hourly series.
    Synth {
        #[arg(long, default_value_t = 183, value_parser = clap::value_parser!(u64).range(1..))]
        days: u64,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
        households: u64,
        /// Series seed (defaults to `synth.seed`).
        #[arg(long = "synth-seed")]
        synth_seed: Option<u64>,
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long)]
        start: Option<NaiveDate>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate a series CSV, fill short gaps and write the cleaned series.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Timestamp column name.
        #[arg(long, default_value = "timestamp")]
        timestamp: String,
        /// Price column name.
        #[arg(long, default_value = "price")]
        price: String,
    },
    /// Train the price and load forecasters.
    ForecastTrain {
        /// Epoch limit (overrides `forecast.max_epochs`).
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Train the incentive agent.
    AgentTrain {
        /// Episodes (overrides `agent.episodes`).
        #[arg(long)]
        episodes: Option<usize>,
    },
    /// Run one day with the trained (or zero) policy.
    Evaluate {
        /// Day to run (overrides `data.eval_date`).
        #[arg(long)]
        date: Option<NaiveDate>,
        #[arg(long, value_enum, default_value_t = PolicyArg::Trained)]
        policy: PolicyArg,
    },
    /// NoDR, EBLR and the trained agent on the evaluation day and the test window.
    Compare {
        #[arg(long)]
        date: Option<NaiveDate>,
    },
    /// Train and evaluate one agent per rho.
    SweepRho {
        /// Comma-separated values (overrides `sweep.rhos`).
        #[arg(long, value_delimiter = ',')]
        rhos: Option<Vec<f64>>,
        #[arg(long)]
        episodes: Option<usize>,
    },
    /// Print the effective configuration as TOML.
    Config,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        let code = match &e {
            PipelineError::Config(_) => 1,
            _ if e.is_numeric() => 3,
            _ => 2,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        PipelineError::from(e).into()
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Messages go to stdout/stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

fn effective_config(g: &GlobalArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &g.config {
        Some(path) => RunConfig::load(path).map_err(|e| match e {
            crate::config::ConfigError::Io { .. } => CliError::data(e.to_string()),
            _ => CliError::usage(e.to_string()),
        })?,
        None => RunConfig::default(),
    };
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(d) = &g.data {
        cfg.paths.data = Some(d.clone());
    }
    if let Some(o) = &g.output {
        cfg.paths.output = o.clone();
    }
    if let Some(c) = &g.checkpoints {
        cfg.paths.checkpoints = c.clone();
    }
    if let Some(s) = g.scenario {
        cfg.data.scenario = match s {
            ScenarioArg::Forecast => ScenarioInput::Forecast,
            ScenarioArg::Actual => ScenarioInput::Actual,
        };
    }
    if let Some(r) = g.rho {
        cfg.env.rho = r;
    }
    if let Some(c) = g.capacity {
        cfg.env.capacity = Some(c);
    }
    Ok(cfg)
}

fn validated(cfg: RunConfig) -> Result<RunConfig, CliError> {
    cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let mode = if cli.global.sequential { ExecMode::Sequential } else { ExecMode::Parallel };
    let mut cfg = effective_config(&cli.global)?;
    match &cli.command {
        Command::Synth { days, households, synth_seed, noise, start, out } => {
            let synth = SynthConfig {
                seed: synth_seed.unwrap_or(cfg.synth.seed),
                days: *days as usize,
                households: *households as usize,
                start: start.unwrap_or(cfg.synth.start),
                noise: noise.unwrap_or(cfg.synth.noise),
            };
            if !(synth.noise >= 0.0) {
                return Err(CliError::usage("--noise must be non-negative"));
            }
            let series = synth_generate(&synth);
            ensure_parent(out)?;
            write_series(out, &series)?;
            println!("wrote {} hours for {} households to {}", series.len(), series.n_households(), out.display());
            Ok(())
        }
        Command::Ingest { input, out, timestamp, price } => {
            let schema = ColumnSchema { timestamp: timestamp.clone(), loads: None, price: price.clone() };
            let file = File::open(input).map_err(|source| DataError::Io { path: input.display().to_string(), source })?;
            let series = read_series(file, &schema)?;
            ensure_parent(out)?;
            write_series(out, &series)?;
            let summary = IngestSummary {
                hours: series.len(),
                households: series.household_ids().to_vec(),
                interpolated_hours: series.interpolated().iter().filter(|b| **b).count(),
                full_days: series.full_days().len(),
            };
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
            Ok(())
        }
        Command::Config => {
            print!("{}", validated(cfg)?.to_toml());
            Ok(())
        }
        Command::ForecastTrain { epochs } => {
            if let Some(e) = epochs {
                cfg.forecast.max_epochs = *e;
            }
            forecast_train(&validated(cfg)?, mode)
        }
        Command::AgentTrain { episodes } => {
            if let Some(e) = episodes {
                cfg.agent.episodes = *e;
            }
            agent_train(&validated(cfg)?, mode)
        }
        Command::Evaluate { date, policy } => {
            if date.is_some() {
                cfg.data.eval_date = *date;
            }
            evaluate_cmd(&validated(cfg)?, *policy, cli.global.rho, mode)
        }
        Command::Compare { date } => {
            if date.is_some() {
                cfg.data.eval_date = *date;
            }
            compare_cmd(&validated(cfg)?, cli.global.rho, mode)
        }
        Command::SweepRho { rhos, episodes } => {
            if let Some(r) = rhos {
                cfg.sweep.rhos = r.clone();
            }
            if let Some(e) = episodes {
                cfg.agent.episodes = *e;
            }
            sweep_cmd(&validated(cfg)?, mode)
        }
    }
}

#[derive(Serialize)]
struct IngestSummary {
    hours: usize,
    households: Vec<String>,
    interpolated_hours: usize,
    full_days: usize,
}

fn ensure_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => ensure_dir(dir),
        _ => Ok(()),
    }
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| DataError::Io { path: dir.display().to_string(), source }.into())
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    ensure_parent(path)?;
    File::create(path).map(BufWriter::new).map_err(|source| DataError::Io { path: path.display().to_string(), source }.into())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    ensure_parent(path)?;
    std::fs::write(path, text).map_err(|source| DataError::Io { path: path.display().to_string(), source }.into())
}

fn metrics_err(e: crate::metrics::MetricsError) -> CliError {
    PipelineError::from(e).into()
}

fn save_trace(path: &Path, trace: &EpisodeTrace) -> Result<(), CliError> {
    write_trace(create(path)?, trace).map_err(|e| PipelineError::from(e).into())
}

fn forecasters_if_needed(cfg: &RunConfig) -> Result<Option<ForecastBundle>, CliError> {
    match cfg.data.scenario {
        ScenarioInput::Forecast => Ok(Some(ForecastBundle::load(&cfg.paths.checkpoints)?)),
        ScenarioInput::Actual => Ok(None),
    }
}

fn prepared(cfg: &RunConfig, ds: &Dataset, mode: ExecMode) -> Result<Prepared, CliError> {
    let bundle = forecasters_if_needed(cfg)?;
    Ok(pipeline::prepare(ds, cfg, bundle.as_ref(), mode)?)
}

const ACCURACY_HEADER: [&str; 8] = ["target", "mae", "mape", "n_terms", "zero_actuals", "epochs_run", "best_epoch", "final_train_loss"];

fn forecast_train(cfg: &RunConfig, mode: ExecMode) -> Result<(), CliError> {
    let ds = Dataset::load(cfg)?;
    let train = ds.training_series(cfg)?;
    let (bundle, reports) = pipeline::train_forecasters(&train, &ds.holidays, cfg, mode)?;
    let path = bundle.save(&cfg.paths.checkpoints)?;
    let plan = pipeline::plan_days(&ds.series, cfg)?;
    let models: Vec<_> = std::iter::once(&bundle.price).chain(&bundle.loads).collect();
    let mut accuracy = Vec::with_capacity(models.len());
    for model in &models {
        accuracy.push(test_accuracy(model, &ds.series, &ds.holidays, &plan.test)?);
    }
    write_accuracy(&cfg.paths.output.join("forecast_accuracy.csv"), &reports, &accuracy)?;
    write_losses(&cfg.paths.output.join("forecast_loss.csv"), &reports)?;
    println!("saved forecasters to {}", path.display());
    for (r, a) in reports.iter().zip(&accuracy) {
        println!("{:<8} MAPE {:6.2}%  MAE {:.4}  epochs {}", r.target.label(), a.mape, a.mae, r.epochs_run);
    }
    Ok(())
}

fn test_accuracy(
    model: &crate::forecast::Forecaster,
    series: &crate::data::HourlySeries,
    holidays: &HolidayCalendar,
    days: &[NaiveDate],
) -> Result<AccuracyReport, CliError> {
    let target = crate::forecast::OneStepModel::target(model);
    let (mut pred, mut actual) = (Vec::new(), Vec::new());
    for day in days {
        pred.extend(forecast_day(model, series, *day, holidays, RollMode::Rolled).map_err(PipelineError::from)?);
        let range = series.day_range(*day).expect("planned day exists");
        actual.extend(range.map(|i| series.value(target, i)));
    }
    Ok(evaluate_forecast(&pred, &actual).map_err(PipelineError::from)?)
}

fn write_accuracy(path: &Path, reports: &[TrainReport], accuracy: &[AccuracyReport]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let err = |e: csv::Error| CliError::from(DataError::Csv(e));
    w.write_record(ACCURACY_HEADER).map_err(err)?;
    for (r, a) in reports.iter().zip(accuracy) {
        w.write_record([
            r.target.label(),
            a.mae.to_string(),
            a.mape.to_string(),
            a.n_terms.to_string(),
            a.zero_actuals.to_string(),
            r.epochs_run.to_string(),
            r.best_epoch.to_string(),
            r.final_train_loss.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|source| DataError::Io { path: path.display().to_string(), source }.into())
}

fn write_losses(path: &Path, reports: &[TrainReport]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let err = |e: csv::Error| CliError::from(DataError::Csv(e));
    w.write_record(["target", "epoch", "train_loss", "val_loss"]).map_err(err)?;
    for r in reports {
        for (k, (t, v)) in r.train_losses.iter().zip(&r.val_losses).enumerate() {
            w.write_record([r.target.label(), (k + 1).to_string(), t.to_string(), v.to_string()]).map_err(err)?;
        }
    }
    w.flush().map_err(|source| DataError::Io { path: path.display().to_string(), source }.into())
}

#[derive(Serialize)]
struct TrainSummary {
    episodes: usize,
    transitions: usize,
    capacity: f64,
    rho: f64,
    final_validation_reward: Option<f64>,
    train_days: usize,
    validation_days: Vec<NaiveDate>,
}

fn agent_train(cfg: &RunConfig, mode: ExecMode) -> Result<(), CliError> {
    let ds = Dataset::load(cfg)?;
    let p = prepared(cfg, &ds, mode)?;
    let mut env = pipeline::build_env(cfg, ds.series.household_ids(), p.capacity)?;
    let outcome = pipeline::train_policy(&mut env, &p, cfg, mode)?;
    let ckpt = cfg.paths.checkpoints.join(AGENT_FILE);
    AgentArtifact::new(outcome.learner.policy.clone(), &env).save(&ckpt)?;
    let log_path = cfg.paths.output.join("training_log.csv");
    write_training_log(create(&log_path)?, &outcome.log).map_err(|e| CliError::from(DataError::Csv(e)))?;
    let summary = TrainSummary {
        episodes: outcome.log.len(),
        transitions: outcome.transitions,
        capacity: env.capacity(),
        rho: env.config().rho,
        final_validation_reward: outcome.log.iter().rev().find_map(|l| l.val_reward),
        train_days: p.train.len(),
        validation_days: p.plan.validation.clone(),
    };
    write_json(&cfg.paths.output.join("agent_train.json"), &summary)?;
    println!("saved agent to {} and log to {}", ckpt.display(), log_path.display());
    Ok(())
}

fn trained_env(cfg: &RunConfig, rho: Option<f64>) -> Result<(AgentArtifact, MarketEnv), CliError> {
    let art = AgentArtifact::load(&cfg.paths.checkpoints.join(AGENT_FILE))?;
    let mut env = art.env()?;
    if let Some(r) = rho {
        env = pipeline::with_rho(&env, r)?;
    }
    Ok((art, env))
}

#[derive(Serialize)]
struct DayStats {
    peak: f64,
    mean: f64,
    par: f64,
}

impl From<LoadStats> for DayStats {
    fn from(s: LoadStats) -> Self {
        Self { peak: s.peak, mean: s.mean, par: s.par }
    }
}

#[derive(Serialize)]
struct EvaluateSummary {
    date: NaiveDate,
    policy: &'static str,
    rho: f64,
    capacity: f64,
    no_dr: DayStats,
    with_policy: DayStats,
    par_improvement_pct: f64,
    total_reward: f64,
    sp_profit: f64,
    sp_cost: f64,
    eu_profit_total: f64,
}

fn evaluate_cmd(cfg: &RunConfig, policy: PolicyArg, rho: Option<f64>, mode: ExecMode) -> Result<(), CliError> {
    let ds = Dataset::load(cfg)?;
    let p = prepared(cfg, &ds, mode)?;
    let (art, env) = trained_env(cfg, rho)?;
    let (label, trace) = match policy {
        PolicyArg::Trained => (pipeline::CCRL_DR, evaluate(&art.policy, &env, &p.eval).map_err(PipelineError::from)?),
        PolicyArg::Zero => {
            let mut e = env.clone();
            ("zero", rollout(&mut e, &p.eval, |_| Ok(0)).map_err(PipelineError::from)?)
        }
    };
    let base = no_dr(&env, &p.eval).map_err(PipelineError::from)?;
    let before = load_stats(&base.load_after()).map_err(metrics_err)?;
    let after = load_stats(&trace.load_after()).map_err(metrics_err)?;
    let date = p.eval.date;
    let out = &cfg.paths.output;
    save_trace(&out.join(format!("trace_{date}.csv")), &trace)?;
    write_table6(create(&out.join(format!("table6_{date}.csv")))?, &[(pipeline::NO_DR, before), (label, after)]).map_err(metrics_err)?;
    let l = ledger(&trace, env.config().rho).map_err(metrics_err)?;
    let summary = EvaluateSummary {
        date,
        policy: label,
        rho: env.config().rho,
        capacity: env.capacity(),
        no_dr: before.into(),
        with_policy: after.into(),
        par_improvement_pct: par_improvement(&before, &after),
        total_reward: trace.total_reward(),
        sp_profit: l.sp_profit,
        sp_cost: l.sp_cost,
        eu_profit_total: l.eu_profit_total(),
    };
    write_json(&out.join(format!("evaluate_{date}.json")), &summary)?;
    println!("{date}: PAR {:.3} -> {:.3} ({:.2}% lower)", before.par, after.par, summary.par_improvement_pct);
    Ok(())
}

fn compare_cmd(cfg: &RunConfig, rho: Option<f64>, mode: ExecMode) -> Result<(), CliError> {
    let ds = Dataset::load(cfg)?;
    let p = prepared(cfg, &ds, mode)?;
    let (art, env) = trained_env(cfg, rho)?;
    let out = &cfg.paths.output;
    let day = pipeline::compare_day(&env, &art.policy, &p.eval, cfg)?;
    let stats = day.stats()?;
    write_fig13(create(&out.join("fig13.csv"))?, &stats).map_err(metrics_err)?;
    let profiles: Vec<(&str, Vec<f64>)> = day.labeled().iter().map(|(l, t)| (*l, t.load_after())).collect();
    write_profiles(create(&out.join("profiles.csv"))?, &profiles).map_err(metrics_err)?;
    for (label, trace) in day.labeled() {
        save_trace(&out.join(format!("trace_{}.csv", label.to_lowercase())), trace)?;
    }
    let window = pipeline::compare_days(&env, &art.policy, &p.test, cfg, mode)?;
    let per_day: Vec<[(&str, LoadStats); 3]> = window.iter().map(|c| c.stats()).collect::<Result<_, _>>()?;
    let mut columns = Vec::with_capacity(3);
    for k in 0..3 {
        let days: Vec<LoadStats> = per_day.iter().map(|s| s[k].1).collect();
        columns.push((stats[k].0, mean_stats(&days).map_err(metrics_err)?));
    }
    write_table6(create(&out.join("table6.csv"))?, &columns).map_err(metrics_err)?;
    println!("{}:", p.eval.date);
    for (label, s) in &stats {
        println!("  {label:<8} peak {:.3}  mean {:.3}  PAR {:.3}", s.peak, s.mean, s.par);
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepRow {
    rho: f64,
    sp_gross: f64,
    sp_cost: f64,
    sp_profit: f64,
    eu_profit_total: f64,
    par: f64,
    final_validation_reward: Option<f64>,
}

fn sweep_cmd(cfg: &RunConfig, mode: ExecMode) -> Result<(), CliError> {
    let ds = Dataset::load(cfg)?;
    let p = prepared(cfg, &ds, mode)?;
    let base = pipeline::build_env(cfg, ds.series.household_ids(), p.capacity)?;
    let points = pipeline::sweep_rho(&base, &p, cfg, &cfg.sweep.rhos, mode)?;
    let out = &cfg.paths.output;
    let ledgers: Vec<_> = points.iter().map(|pt| pt.ledger.clone()).collect();
    write_table7(create(&out.join("table7.csv"))?, &ledgers).map_err(metrics_err)?;
    let mut w = csv::Writer::from_writer(create(&out.join("sweep_rho.csv"))?);
    let err = |e: csv::Error| CliError::from(DataError::Csv(e));
    w.write_record(["rho", "sp_gross", "sp_cost", "sp_profit", "eu_profit_total", "par", "final_validation_reward"]).map_err(err)?;
    for pt in &points {
        let env = pipeline::with_rho(&base, pt.rho)?;
        AgentArtifact::new(pt.outcome.learner.policy.clone(), &env).save(&cfg.paths.checkpoints.join(format!("agent_rho_{}.json", pt.rho)))?;
        save_trace(&out.join(format!("trace_rho_{}.csv", pt.rho)), &pt.trace)?;
        let row = SweepRow {
            rho: pt.rho,
            sp_gross: pt.ledger.sp_gross,
            sp_cost: pt.ledger.sp_cost,
            sp_profit: pt.ledger.sp_profit,
            eu_profit_total: pt.ledger.eu_profit_total(),
            par: load_stats(&pt.trace.load_after()).map_err(metrics_err)?.par,
            final_validation_reward: pt.outcome.log.iter().rev().find_map(|l| l.val_reward),
        };
        w.serialize(&row).map_err(err)?;
        println!("rho {:<4} SP cost {:9.3}  SP profit {:9.3}  EU profit {:9.3}", row.rho, row.sp_cost, row.sp_profit, row.eu_profit_total);
    }
    w.flush().map_err(|source| CliError::from(DataError::Io { path: "sweep_rho.csv".into(), source }))
}
