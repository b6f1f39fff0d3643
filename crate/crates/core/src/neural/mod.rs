//! Small hand-written neural-network toolkit: dense ReLU networks, an LSTM
//! cell with backprop-through-time support, Adam, MSE/Huber losses and a
//! central-difference gradient checker.
//!
//! Every model stores its parameters in one flat `Vec<f64>`; gradients use
//! the same layout, so the optimizer, soft target updates and checkpoints all
//! work on plain slices.

mod adam;
mod checkpoint;
mod dense;
mod gradcheck;
mod loss;
mod lstm;

pub use adam::{adam_update, clip_global_norm, AdamConfig, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use dense::{Activation, DenseCache, DenseNet};
pub use gradcheck::{grad_check, GradCheckReport, FD_STEP};
pub use loss::{huber, mse};
pub use lstm::{Gate, LstmCell, LstmStepCache};

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NeuralError {
    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    Shape { context: &'static str, expected: usize, actual: usize },
    #[error("invalid architecture: {0}")]
    Architecture(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}

pub(crate) fn check_len(context: &'static str, expected: usize, actual: usize) -> Result<(), NeuralError> {
    if expected == actual {
        Ok(())
    } else {
        Err(NeuralError::Shape { context, expected, actual })
    }
}

/// Uniform sample in ±sqrt(6 / (fan_in + fan_out)).
pub(crate) fn glorot<R: Rng + ?Sized>(rng: &mut R, fan_in: usize, fan_out: usize) -> f64 {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    rng.random_range(-limit..=limit)
}

/// Inverted-dropout mask: each unit is kept with probability `1 - rate` and
/// scaled by `1 / (1 - rate)`.
pub fn dropout_mask<R: Rng + ?Sized>(rng: &mut R, len: usize, rate: f64) -> Vec<f64> {
    if rate <= 0.0 {
        return vec![1.0; len];
    }
    let keep = 1.0 - rate;
    (0..len).map(|_| if rng.random::<f64>() < keep { 1.0 / keep } else { 0.0 }).collect()
}

/// Numerically stable logistic function.
#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
