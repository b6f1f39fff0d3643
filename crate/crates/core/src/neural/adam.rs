use super::{check_len, NeuralError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        Self { lr, ..Self::default() }
    }
}

/// First and second moment estimates plus the step counter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(n_params: usize) -> Self {
        Self { m: vec![0.0; n_params], v: vec![0.0; n_params], step: 0 }
    }
}

/// One bias-corrected Adam step.
pub fn adam_update(params: &mut [f64], grads: &[f64], state: &mut AdamState, cfg: &AdamConfig) -> Result<(), NeuralError> {
    check_len("adam gradients", params.len(), grads.len())?;
    check_len("adam first moment", params.len(), state.m.len())?;
    check_len("adam second moment", params.len(), state.v.len())?;
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for (((p, g), m), v) in params.iter_mut().zip(grads).zip(&mut state.m).zip(&mut state.v) {
        *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
        *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
    }
    Ok(())
}

/// Rescales `grads` so their L2 norm is at most `max_norm`. Returns the norm
/// before clipping.
pub fn clip_global_norm(grads: &mut [f64], max_norm: f64) -> f64 {
    let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm && norm > 0.0 {
        let scale = max_norm / norm;
        grads.iter_mut().for_each(|g| *g *= scale);
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn first_step_moves_by_learning_rate() {
        // bias correction makes the first step -lr * sign(g) up to eps
        let mut p = [1.0, -2.0, 0.5];
        let g = [0.3, -4.0, 1e-3];
        let mut st = AdamState::new(3);
        let cfg = AdamConfig::with_lr(0.01);
        adam_update(&mut p, &g, &mut st, &cfg).unwrap();
        assert!((p[0] - 0.99).abs() < 1e-9);
        assert!((p[1] + 1.99).abs() < 1e-9);
        assert!((p[2] - 0.49).abs() < 1e-6);
        assert_eq!(st.step, 1);
    }

    #[test]
    fn two_steps_match_reference_recursion() {
        let cfg = AdamConfig::with_lr(0.1);
        let mut p = [0.0];
        let mut st = AdamState::new(1);
        adam_update(&mut p, &[1.0], &mut st, &cfg).unwrap();
        adam_update(&mut p, &[-0.5], &mut st, &cfg).unwrap();
        let m = 0.9 * 0.1 + 0.1 * -0.5;
        let v = 0.999 * 0.001 + 0.001 * 0.25;
        let expected = -0.1 / (1.0 + 1e-8) - 0.1 * (m / (1.0 - 0.81)) / ((v / (1.0 - 0.999f64.powi(2))).sqrt() + 1e-8);
        assert!((p[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn minimises_a_quadratic() {
        let cfg = AdamConfig::with_lr(0.05);
        let mut p = [3.0, -2.0];
        let mut st = AdamState::new(2);
        for _ in 0..2000 {
            let g = [2.0 * (p[0] - 1.0), 2.0 * (p[1] + 0.5)];
            adam_update(&mut p, &g, &mut st, &cfg).unwrap();
        }
        assert!((p[0] - 1.0).abs() < 1e-3 && (p[1] + 0.5).abs() < 1e-3);
    }

    #[test]
    fn zero_gradient_or_zero_rate_leaves_params() {
        let mut p = [0.25, -1.0];
        let mut st = AdamState::new(2);
        adam_update(&mut p, &[0.0, 0.0], &mut st, &AdamConfig::default()).unwrap();
        assert_eq!(p, [0.25, -1.0]);
        for _ in 0..5 {
            adam_update(&mut p, &[3.0, -0.2], &mut st, &AdamConfig::with_lr(0.0)).unwrap();
        }
        assert_eq!(p, [0.25, -1.0]);
        assert_eq!(st.step, 6);
    }

    #[test]
    fn identical_calls_are_deterministic() {
        let run = || {
            let mut p = [0.1, 0.2, 0.3];
            let mut st = AdamState::new(3);
            for k in 0..10 {
                let g = [k as f64, -0.5, 0.01 * k as f64];
                adam_update(&mut p, &g, &mut st, &AdamConfig::with_lr(1e-4)).unwrap();
            }
            p
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let mut st = AdamState::new(2);
        assert!(adam_update(&mut [0.0, 0.0], &[1.0], &mut st, &AdamConfig::default()).is_err());
    }

    proptest! {
        #[test]
        fn clipped_norm_never_exceeds_bound(g in proptest::collection::vec(-100.0f64..100.0, 1..40), bound in 0.1f64..20.0) {
            let mut c = g.clone();
            let before = clip_global_norm(&mut c, bound);
            let after = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!(after <= bound * (1.0 + 1e-12));
            if before <= bound {
                prop_assert_eq!(c, g);
            }
        }
    }
}
