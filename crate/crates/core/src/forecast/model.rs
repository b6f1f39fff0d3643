use super::features::{FeatureVector, MinMax, MAX_LAG, N_FEATURES};
use super::ForecastError;
use crate::data::{HolidayCalendar, HourlySeries, Quantity, HOURS_PER_DAY};
use crate::neural::{adam_update, dropout_mask, Activation, AdamConfig, AdamState, DenseNet, LstmCell, LstmStepCache, NeuralError};
use chrono::{Duration, NaiveDate};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Anything that maps a window of feature vectors (oldest first, last entry
/// describing the hour being predicted) to a one-step forecast.
pub trait OneStepModel {
    fn target(&self) -> Quantity;
    fn window(&self) -> usize;
    fn predict(&self, window: &[FeatureVector]) -> Result<f64, ForecastError>;
}

/// Stacked LSTM with a linear read-out of the last hidden state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecaster {
    target: Quantity,
    window: usize,
    dropout: f64,
    layers: Vec<LstmCell>,
    head: DenseNet,
    features: MinMax,
    target_scale: MinMax,
}

struct ForwardTrace {
    caches: Vec<Vec<LstmStepCache>>,
    /// Dropout masks applied to the outputs of every layer but the last.
    between: Vec<Vec<Vec<f64>>>,
    head_mask: Vec<f64>,
    head_cache: crate::neural::DenseCache,
    output: f64,
}

impl Forecaster {
    pub fn new<R: Rng + ?Sized>(
        target: Quantity,
        window: usize,
        n_layers: usize,
        hidden: usize,
        dropout: f64,
        features: MinMax,
        target_scale: MinMax,
        rng: &mut R,
    ) -> Result<Self, ForecastError> {
        if n_layers == 0 || hidden == 0 || window == 0 {
            return Err(NeuralError::Architecture(format!("{n_layers} layers of {hidden} units, window {window}")).into());
        }
        if features.dim() != N_FEATURES || target_scale.dim() != 1 {
            return Err(ForecastError::Invalid("normalization statistics have the wrong dimension".into()));
        }
        let layers = (0..n_layers).map(|l| LstmCell::new(if l == 0 { N_FEATURES } else { hidden }, hidden, rng)).collect();
        let head = DenseNet::new(&[hidden, 1], Activation::Linear, Activation::Linear, rng)?;
        Ok(Self { target, window, dropout, layers, head, features, target_scale })
    }

    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn hidden(&self) -> usize {
        self.layers[0].hidden_dim()
    }

    pub fn features(&self) -> &MinMax {
        &self.features
    }

    pub fn target_scale(&self) -> &MinMax {
        &self.target_scale
    }

    /// Lengths of the parameter blocks (each LSTM layer, then the head).
    pub fn block_lens(&self) -> Vec<usize> {
        self.layers.iter().map(|c| c.n_params()).chain(std::iter::once(self.head.params().len())).collect()
    }

    pub fn n_params(&self) -> usize {
        self.block_lens().iter().sum()
    }

    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for c in &self.layers {
            out.extend_from_slice(c.params());
        }
        out.extend_from_slice(self.head.params());
        out
    }

    pub fn set_params_flat(&mut self, flat: &[f64]) -> Result<(), ForecastError> {
        crate::neural::check_len("forecaster parameters", self.n_params(), flat.len())?;
        let mut off = 0;
        for c in &mut self.layers {
            let n = c.n_params();
            c.params_mut().copy_from_slice(&flat[off..off + n]);
            off += n;
        }
        self.head.params_mut().copy_from_slice(&flat[off..]);
        Ok(())
    }

    /// Normalized feature rows for a raw window.
    pub fn normalize_window(&self, window: &[FeatureVector]) -> Vec<Vec<f64>> {
        window.iter().map(|f| self.features.normalize(f.as_slice())).collect()
    }

    pub fn normalize_target(&self, y: f64) -> f64 {
        self.target_scale.normalize_at(0, y)
    }

    pub fn denormalize_target(&self, z: f64) -> f64 {
        self.target_scale.denormalize_at(0, z)
    }

    fn run<R: Rng + ?Sized>(&self, window: &[Vec<f64>], mut rng: Option<&mut R>) -> Result<ForwardTrace, ForecastError> {
        let hd = self.hidden();
        let mut inputs: Vec<Vec<f64>> = window.to_vec();
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut between = Vec::new();
        for (l, cell) in self.layers.iter().enumerate() {
            let (mut h, mut c) = (vec![0.0; hd], vec![0.0; hd]);
            let mut layer_caches = Vec::with_capacity(inputs.len());
            let mut outs = Vec::with_capacity(inputs.len());
            for x in &inputs {
                let (h2, c2, cache) = cell.step(x, &h, &c)?;
                h = h2;
                c = c2;
                outs.push(h.clone());
                layer_caches.push(cache);
            }
            caches.push(layer_caches);
            if l + 1 < self.layers.len() {
                if let Some(r) = rng.as_deref_mut() {
                    let masks: Vec<Vec<f64>> = outs.iter().map(|_| dropout_mask(r, hd, self.dropout)).collect();
                    for (o, m) in outs.iter_mut().zip(&masks) {
                        o.iter_mut().zip(m).for_each(|(v, k)| *v *= k);
                    }
                    between.push(masks);
                }
            }
            inputs = outs;
        }
        let mut top = inputs.pop().ok_or_else(|| ForecastError::Invalid("empty window".into()))?;
        let head_mask = match rng {
            Some(r) => dropout_mask(r, hd, self.dropout),
            None => vec![1.0; hd],
        };
        top.iter_mut().zip(&head_mask).for_each(|(v, k)| *v *= k);
        let (y, head_cache) = self.head.forward(&top)?;
        Ok(ForwardTrace { caches, between, head_mask, head_cache, output: y[0] })
    }

    /// Normalized one-step output for a normalized window, dropout off.
    pub fn predict_normalized(&self, window: &[Vec<f64>]) -> Result<f64, ForecastError> {
        Ok(self.run::<rand_chacha::ChaCha8Rng>(window, None)?.output)
    }

    /// Squared error on one normalized sample and its gradient over all
    /// parameter blocks (flat, in [`Forecaster::block_lens`] order). Dropout
    /// is applied when `rng` is given.
    pub fn sample_gradient<R: Rng + ?Sized>(&self, window: &[Vec<f64>], target: f64, rng: Option<&mut R>) -> Result<(f64, Vec<f64>), ForecastError> {
        let training = rng.is_some();
        let trace = self.run(window, rng)?;
        let err = trace.output - target;
        let lens = self.block_lens();
        let mut grads = vec![0.0; lens.iter().sum()];
        let head_off = grads.len() - lens[lens.len() - 1];
        let mut d_top = self.head.backward_into(&trace.head_cache, &[2.0 * err], &mut grads[head_off..])?;
        d_top.iter_mut().zip(&trace.head_mask).for_each(|(d, m)| *d *= m);

        let steps = window.len();
        let hd = self.hidden();
        // external gradient arriving at each step's hidden output
        let mut dh_ext: Vec<Vec<f64>> = vec![vec![0.0; hd]; steps];
        dh_ext[steps - 1] = d_top;
        let mut offsets: Vec<usize> = Vec::with_capacity(lens.len());
        let mut acc = 0;
        for n in &lens {
            offsets.push(acc);
            acc += n;
        }
        for l in (0..self.layers.len()).rev() {
            let cell = &self.layers[l];
            let block = &mut grads[offsets[l]..offsets[l] + lens[l]];
            let (mut dh, mut dc) = (vec![0.0; hd], vec![0.0; hd]);
            let mut dx_all = vec![Vec::new(); steps];
            for t in (0..steps).rev() {
                let total: Vec<f64> = dh.iter().zip(&dh_ext[t]).map(|(a, b)| a + b).collect();
                let (dx, dh_prev, dc_prev) = cell.backward_step(&trace.caches[l][t], &total, &dc, block)?;
                dx_all[t] = dx;
                dh = dh_prev;
                dc = dc_prev;
            }
            if l > 0 {
                if training && !trace.between.is_empty() {
                    for (dx, m) in dx_all.iter_mut().zip(&trace.between[l - 1]) {
                        dx.iter_mut().zip(m).for_each(|(d, k)| *d *= k);
                    }
                }
                dh_ext = dx_all;
            }
        }
        Ok((err * err, grads))
    }

    /// One Adam step per parameter block.
    pub fn apply_gradient(&mut self, grads: &[f64], states: &mut [AdamState], cfg: &AdamConfig) -> Result<(), ForecastError> {
        let lens = self.block_lens();
        crate::neural::check_len("forecaster gradient", lens.iter().sum(), grads.len())?;
        crate::neural::check_len("forecaster optimizer blocks", lens.len(), states.len())?;
        let mut off = 0;
        let n_layers = self.layers.len();
        for (b, n) in lens.iter().enumerate() {
            let g = &grads[off..off + n];
            let params = if b < n_layers { self.layers[b].params_mut() } else { self.head.params_mut() };
            adam_update(params, g, &mut states[b], cfg)?;
            off += n;
        }
        Ok(())
    }

    pub fn optimizer_states(&self) -> Vec<AdamState> {
        self.block_lens().into_iter().map(AdamState::new).collect()
    }
}

impl OneStepModel for Forecaster {
    fn target(&self) -> Quantity {
        self.target
    }

    fn window(&self) -> usize {
        self.window
    }

    fn predict(&self, window: &[FeatureVector]) -> Result<f64, ForecastError> {
        if window.len() != self.window {
            return Err(NeuralError::Shape { context: "forecast window", expected: self.window, actual: window.len() }.into());
        }
        let z = self.predict_normalized(&self.normalize_window(window))?;
        let y = self.denormalize_target(z);
        if !y.is_finite() {
            return Err(ForecastError::NonFinite { epoch: None, detail: format!("forecast of {} is {y}", self.target.label()) });
        }
        Ok(y)
    }
}

/// Whether forecasts of earlier hours of the day feed later lag features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RollMode {
    /// Hour h's forecast stands in for its actual value in later features.
    #[default]
    Rolled,
    /// Actual values are used for every lag (needs the day's actuals).
    TeacherForced,
}

/// Earliest hour index (from the start of the series) that a model with
/// this window can forecast.
pub fn first_forecastable_index(window: usize) -> usize {
    MAX_LAG + window.saturating_sub(1)
}

/// The 24 hourly one-step forecasts of `day`.
///
/// In rolled mode only hours strictly before the day are read from
/// `history`; later entries (if any) are ignored.
pub fn forecast_day<M: OneStepModel + ?Sized>(
    model: &M,
    history: &HourlySeries,
    day: NaiveDate,
    holidays: &HolidayCalendar,
    mode: RollMode,
) -> Result<Vec<f64>, ForecastError> {
    if history.is_empty() {
        return Err(ForecastError::InsufficientHistory { index: 0, required_lag: first_forecastable_index(model.window()) });
    }
    let first = history.timestamp(0);
    let midnight = day.and_hms_opt(0, 0, 0).expect("midnight exists");
    let offset = midnight - first;
    if offset < Duration::zero() || offset != Duration::hours(offset.num_hours()) {
        return Err(ForecastError::Invalid(format!("{day} is not aligned with the history starting {first}")));
    }
    let start = offset.num_hours() as usize;
    let needed = first_forecastable_index(model.window());
    if start < needed {
        return Err(ForecastError::InsufficientHistory { index: start, required_lag: needed });
    }
    let known = match mode {
        RollMode::Rolled => start,
        RollMode::TeacherForced => start + HOURS_PER_DAY,
    };
    if history.len() < known {
        return Err(ForecastError::Invalid(format!("history ends {} hours short of {day}", known - history.len())));
    }
    let target = model.target();
    let mut values: Vec<f64> = (0..known).map(|i| history.value(target, i)).collect();
    let mut out = Vec::with_capacity(HOURS_PER_DAY);
    for k in 0..HOURS_PER_DAY {
        let t = start + k;
        let window: Vec<FeatureVector> = (t + 1 - model.window()..=t)
            .map(|u| FeatureVector::assemble(first + Duration::hours(u as i64), holidays, u, |i| values[i]))
            .collect();
        let y = model.predict(&window)?;
        if mode == RollMode::Rolled {
            values.push(y);
        }
        out.push(y);
    }
    Ok(out)
}

/// Mean absolute error and mean absolute percentage error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub mae: f64,
    /// Percent.
    pub mape: f64,
    pub n_terms: usize,
    /// Terms left out of the MAPE because the actual value was zero.
    pub zero_actuals: usize,
}

pub fn evaluate_forecast(pred: &[f64], actual: &[f64]) -> Result<AccuracyReport, ForecastError> {
    if pred.len() != actual.len() || pred.is_empty() {
        return Err(NeuralError::Shape { context: "forecast evaluation", expected: actual.len(), actual: pred.len() }.into());
    }
    let mae = pred.iter().zip(actual).map(|(p, a)| (p - a).abs()).sum::<f64>() / pred.len() as f64;
    let terms: Vec<f64> = pred.iter().zip(actual).filter(|(_, a)| **a != 0.0).map(|(p, a)| ((p - a) / a).abs()).collect();
    if terms.is_empty() {
        return Err(ForecastError::Invalid("MAPE is undefined when every actual value is zero".into()));
    }
    let mape = 100.0 * terms.iter().sum::<f64>() / terms.len() as f64;
    Ok(AccuracyReport { mae, mape, n_terms: pred.len(), zero_actuals: pred.len() - terms.len() })
}
