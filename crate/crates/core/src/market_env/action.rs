use super::EnvError;
use serde::{Deserialize, Serialize};

/// Incentive rates never exceed this fraction of the hour's price.
pub const MAX_RATE_FRACTION: f64 = 0.95;

/// Joint discrete actions: one of `levels` rate steps per household.
///
/// The index written in base `levels` lists the households' digits in
/// order, so the first household holds the most significant digit:
/// with 4 levels and 3 households, index 9 = `021` gives digits (0, 2, 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSpace {
    pub levels: usize,
    pub n_eu: usize,
}

impl ActionSpace {
    pub fn new(levels: usize, n_eu: usize) -> Result<Self, EnvError> {
        if levels < 2 || n_eu == 0 {
            return Err(EnvError::Invalid(format!("need at least 2 levels and 1 household, got {levels} and {n_eu}")));
        }
        levels
            .checked_pow(n_eu as u32)
            .filter(|n| *n <= 1 << 20)
            .ok_or_else(|| EnvError::Invalid(format!("{levels}^{n_eu} actions is too many")))?;
        Ok(Self { levels, n_eu })
    }

    pub fn n_actions(&self) -> usize {
        self.levels.pow(self.n_eu as u32)
    }

    pub fn digits(&self, index: usize) -> Result<Vec<usize>, EnvError> {
        if index >= self.n_actions() {
            return Err(EnvError::Action { index, n_actions: self.n_actions() });
        }
        let mut rest = index;
        let mut digits = vec![0; self.n_eu];
        for d in digits.iter_mut().rev() {
            *d = rest % self.levels;
            rest /= self.levels;
        }
        Ok(digits)
    }

    pub fn encode(&self, digits: &[usize]) -> Result<usize, EnvError> {
        if digits.len() != self.n_eu || digits.iter().any(|d| *d >= self.levels) {
            return Err(EnvError::Invalid(format!("digits {digits:?} do not fit {} levels x {} households", self.levels, self.n_eu)));
        }
        Ok(digits.iter().fold(0, |acc, d| acc * self.levels + d))
    }

    /// Per-household rates (¢/kWh) for `index` at price `price`.
    pub fn decode(&self, index: usize, price: f64) -> Result<Vec<f64>, EnvError> {
        let top = (self.levels - 1) as f64;
        Ok(self.digits(index)?.into_iter().map(|d| d as f64 / top * MAX_RATE_FRACTION * price).collect())
    }
}
