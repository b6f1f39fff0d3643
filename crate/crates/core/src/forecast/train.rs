use super::features::{FeatureVector, MinMax, MAX_LAG};
use super::model::{first_forecastable_index, Forecaster};
use super::ForecastError;
use crate::data::{HolidayCalendar, HourlySeries, Quantity};
use crate::exec::{self, ExecMode};
use crate::neural::AdamConfig;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Forecaster hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForecastConfig {
    pub lstm_layers: usize,
    pub hidden_units: usize,
    pub dropout: f64,
    pub window: usize,
    /// Steps ahead; only 1 is supported.
    pub horizon: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    /// Trailing share of the training samples held out for early stopping.
    pub validation_fraction: f64,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        Self {
            lstm_layers: 2,
            hidden_units: 64,
            dropout: 0.2,
            window: 24,
            horizon: 1,
            learning_rate: 1e-3,
            batch_size: 32,
            max_epochs: 100,
            patience: 10,
            validation_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub target: Quantity,
    pub epochs_run: usize,
    pub best_epoch: usize,
    /// Normalized MSE over the training samples after each epoch, dropout off.
    pub train_losses: Vec<f64>,
    pub val_losses: Vec<f64>,
    pub final_train_loss: f64,
}

/// Samples per parallel gradient chunk.
const GRAD_CHUNK: usize = 8;

fn mix(seed: u64, a: u64, b: u64) -> u64 {
    // splitmix64 finaliser over a simple combination
    let mut z = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Dataset {
    /// Normalized feature rows; row `i` describes hour `MAX_LAG + i`.
    rows: Vec<Vec<f64>>,
    /// Normalized target per hour index.
    targets: Vec<f64>,
    window: usize,
}

impl Dataset {
    fn window_of(&self, t: usize) -> &[Vec<f64>] {
        let end = t - MAX_LAG + 1;
        &self.rows[end - self.window..end]
    }
}

fn mean_loss(model: &Forecaster, data: &Dataset, samples: &[usize], mode: ExecMode) -> Result<f64, ForecastError> {
    if samples.is_empty() {
        return Ok(f64::NAN);
    }
    let parts = exec::map_chunks(mode, samples, 64, |chunk| -> Result<f64, ForecastError> {
        let mut s = 0.0;
        for &t in chunk {
            let e = model.predict_normalized(data.window_of(t))? - data.targets[t];
            s += e * e;
        }
        Ok(s)
    });
    let mut total = 0.0;
    for p in parts {
        total += p?;
    }
    Ok(total / samples.len() as f64)
}

/// Trains a one-step forecaster of `target` on `train`.
///
/// Normalization bounds come from `train` only. The trailing
/// `validation_fraction` of samples drives early stopping and the parameters
/// of the best validation epoch are returned.
pub fn train_forecaster(
    train: &HourlySeries,
    target: Quantity,
    holidays: &HolidayCalendar,
    cfg: &ForecastConfig,
    seed: u64,
    mode: ExecMode,
) -> Result<(Forecaster, TrainReport), ForecastError> {
    if cfg.horizon != 1 {
        return Err(ForecastError::Invalid(format!("horizon {} is not supported; only one-step forecasts are", cfg.horizon)));
    }
    if cfg.window == 0 || cfg.batch_size == 0 {
        return Err(ForecastError::Invalid("window and batch size must be positive".into()));
    }
    let first_sample = first_forecastable_index(cfg.window);
    if train.len() <= first_sample {
        return Err(ForecastError::InsufficientHistory { index: train.len(), required_lag: first_sample + 1 });
    }
    let raw_rows: Vec<FeatureVector> =
        (MAX_LAG..train.len()).map(|i| super::build_features(train, target, i, holidays)).collect::<Result<_, _>>()?;
    let features = MinMax::fit(raw_rows.iter().map(|r| r.as_slice())).expect("at least one row");
    let raw_targets: Vec<f64> = (0..train.len()).map(|i| train.value(target, i)).collect();
    let target_scale = MinMax::fit(raw_targets[first_sample..].chunks(1)).expect("at least one sample");

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model =
        Forecaster::new(target, cfg.window, cfg.lstm_layers, cfg.hidden_units, cfg.dropout, features.clone(), target_scale.clone(), &mut rng)?;
    let data = Dataset {
        rows: raw_rows.iter().map(|r| features.normalize(r.as_slice())).collect(),
        targets: raw_targets.iter().map(|y| target_scale.normalize_at(0, *y)).collect(),
        window: cfg.window,
    };

    let samples: Vec<usize> = (first_sample..train.len()).collect();
    let n_val = ((samples.len() as f64) * cfg.validation_fraction.clamp(0.0, 0.5)).round() as usize;
    let (fit_samples, val_samples) = samples.split_at(samples.len() - n_val);
    if fit_samples.is_empty() {
        return Err(ForecastError::InsufficientHistory { index: train.len(), required_lag: first_sample + 1 });
    }

    let adam = AdamConfig::with_lr(cfg.learning_rate);
    let mut states = model.optimizer_states();
    let n_params = model.n_params();
    let mut order = fit_samples.to_vec();
    let mut report =
        TrainReport { target, epochs_run: 0, best_epoch: 0, train_losses: Vec::new(), val_losses: Vec::new(), final_train_loss: f64::NAN };
    let mut best: Option<(f64, Vec<f64>)> = None;

    for epoch in 0..cfg.max_epochs {
        order.shuffle(&mut rng);
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            let parts = exec::map_chunks(mode, batch, GRAD_CHUNK, |chunk| -> Result<(f64, Vec<f64>), ForecastError> {
                let mut loss = 0.0;
                let mut grads = vec![0.0; n_params];
                for &t in chunk {
                    let mut mask_rng = ChaCha8Rng::seed_from_u64(mix(seed, epoch as u64, t as u64));
                    let (l, g) = model.sample_gradient(data.window_of(t), data.targets[t], Some(&mut mask_rng))?;
                    loss += l;
                    grads.iter_mut().zip(&g).for_each(|(a, v)| *a += v);
                }
                Ok((loss, grads))
            });
            let mut loss = 0.0;
            let mut grads = Vec::with_capacity(parts.len());
            for p in parts {
                let (l, g) = p?;
                loss += l;
                grads.push(g);
            }
            let mut grads = exec::sum_partials(grads, n_params);
            if !loss.is_finite() || grads.iter().any(|g| !g.is_finite()) {
                return Err(ForecastError::NonFinite {
                    epoch: Some(epoch),
                    detail: format!("{} training loss {loss} in batch {b}", target.label()),
                });
            }
            let scale = 1.0 / batch.len() as f64;
            grads.iter_mut().for_each(|g| *g *= scale);
            model.apply_gradient(&grads, &mut states, &adam)?;
        }
        let train_loss = mean_loss(&model, &data, fit_samples, mode)?;
        if !train_loss.is_finite() {
            return Err(ForecastError::NonFinite { epoch: Some(epoch), detail: format!("{} training loss {train_loss}", target.label()) });
        }
        let val_loss = if val_samples.is_empty() { train_loss } else { mean_loss(&model, &data, val_samples, mode)? };
        report.train_losses.push(train_loss);
        report.val_losses.push(val_loss);
        report.epochs_run = epoch + 1;
        if best.as_ref().is_none_or(|(b, _)| val_loss < *b) {
            best = Some((val_loss, model.params_flat()));
            report.best_epoch = epoch + 1;
        } else if epoch + 1 - report.best_epoch >= cfg.patience {
            break;
        }
    }
    if let Some((_, params)) = best {
        model.set_params_flat(&params)?;
    }
    report.final_train_loss = report.train_losses.get(report.best_epoch.saturating_sub(1)).copied().unwrap_or(f64::NAN);
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{HourlyRecord, SynthConfig};
    use crate::forecast::{evaluate_forecast, forecast_day, OneStepModel, RollMode};
    use chrono::{Duration, NaiveDate};

    fn small_cfg(epochs: usize) -> ForecastConfig {
        ForecastConfig { lstm_layers: 1, hidden_units: 8, window: 6, max_epochs: epochs, learning_rate: 5e-3, ..Default::default() }
    }

    fn constant_series(days: usize, value: f64) -> HourlySeries {
        let start = NaiveDate::from_ymd_opt(2018, 5, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
        let records = (0..days * 24)
            .map(|i| HourlyRecord { timestamp: start + Duration::hours(i as i64), loads: vec![value], price: value })
            .collect();
        HourlySeries::new(vec!["1".into()], records).unwrap()
    }

    #[test]
    fn constant_target_is_learned() {
        let s = constant_series(12, 2.5);
        let cal = HolidayCalendar::default();
        let train = s.slice(0..10 * 24);
        let (model, _) = train_forecaster(&train, Quantity::Price, &cal, &small_cfg(15), 1, ExecMode::Sequential).unwrap();
        let day = s.full_days()[11];
        let f = forecast_day(&model, &s, day, &cal, RollMode::Rolled).unwrap();
        assert!(f.iter().all(|v| (v - 2.5).abs() < 0.025), "{f:?}");
    }

    #[test]
    fn constant_target_loss_never_increases() {
        let s = constant_series(10, 2.5);
        let cfg = ForecastConfig { dropout: 0.0, learning_rate: 1e-3, ..small_cfg(10) };
        let (_, report) = train_forecaster(&s, Quantity::Price, &HolidayCalendar::default(), &cfg, 1, ExecMode::Sequential).unwrap();
        for w in report.train_losses.windows(2) {
            assert!(w[1] <= w[0], "{:?}", report.train_losses);
        }
    }

    #[test]
    fn fixed_seed_is_reproducible_across_modes() {
        let s = constant_series(5, 1.0);
        let cal = HolidayCalendar::default();
        let cfg = ForecastConfig { max_epochs: 2, ..small_cfg(2) };
        let (a, _) = train_forecaster(&s, Quantity::Price, &cal, &cfg, 9, ExecMode::Sequential).unwrap();
        let (b, _) = train_forecaster(&s, Quantity::Price, &cal, &cfg, 9, ExecMode::Parallel).unwrap();
        assert_eq!(a.params_flat(), b.params_flat());
        let (c, _) = train_forecaster(&s, Quantity::Price, &cal, &cfg, 10, ExecMode::Sequential).unwrap();
        assert_ne!(a.params_flat(), c.params_flat());
    }

    #[test]
    fn periodic_signal_forecast_is_accurate_and_causal() {
        let s = crate::data::synth_generate(&SynthConfig { days: 40, noise: 0.0, seed: 5, ..Default::default() });
        let days = s.full_days();
        let cal = HolidayCalendar::default();
        let train = s.slice(0..36 * 24);
        let cfg = ForecastConfig { hidden_units: 12, max_epochs: 30, ..small_cfg(30) };
        let (model, _) = train_forecaster(&train, Quantity::Load(1), &cal, &cfg, 3, ExecMode::Parallel).unwrap();
        let test_day = days[38];
        let rolled = forecast_day(&model, &s, test_day, &cal, RollMode::Rolled).unwrap();
        let actual: Vec<f64> = s.day_range(test_day).unwrap().map(|i| s.value(Quantity::Load(1), i)).collect();
        let acc = evaluate_forecast(&rolled, &actual).unwrap();
        assert!(acc.mape < 5.0, "{acc:?}");
        let forced = forecast_day(&model, &s, test_day, &cal, RollMode::TeacherForced).unwrap();
        assert_ne!(rolled, forced);

        let mut records = s.records().to_vec();
        for r in &mut records[38 * 24..] {
            r.loads[1] *= 3.0;
        }
        let mutated = HourlySeries::new(s.household_ids().to_vec(), records).unwrap();
        assert_eq!(forecast_day(&model, &mutated, test_day, &cal, RollMode::Rolled).unwrap(), rolled);
        assert_eq!(model.target(), Quantity::Load(1));
    }

    #[test]
    fn unsupported_horizon_and_short_series_fail() {
        let s = constant_series(2, 1.0);
        let cal = HolidayCalendar::default();
        let cfg = ForecastConfig { horizon: 2, ..Default::default() };
        assert!(train_forecaster(&s, Quantity::Price, &cal, &cfg, 0, ExecMode::Sequential).is_err());
        let err = train_forecaster(&s, Quantity::Price, &cal, &ForecastConfig::default(), 0, ExecMode::Sequential).unwrap_err();
        assert!(matches!(err, ForecastError::InsufficientHistory { .. }));
    }
}
