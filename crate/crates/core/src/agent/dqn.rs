use super::replay::{ReplayBuffer, Transition};
use super::AgentError;
use crate::exec::{map_chunks, sum_partials, ExecMode};
use crate::neural::{adam_update, clip_global_norm, huber, AdamConfig, AdamState, DenseNet, NeuralError};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Anything that scores every action of a state.
pub trait QFunction {
    fn n_actions(&self) -> usize;
    fn q_values(&self, state: &[f64]) -> Result<Vec<f64>, NeuralError>;
}

impl QFunction for DenseNet {
    fn n_actions(&self) -> usize {
        self.output_dim()
    }

    fn q_values(&self, state: &[f64]) -> Result<Vec<f64>, NeuralError> {
        self.predict(state)
    }
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// ε-greedy choice. Returns the action and whether it was random.
pub fn select_action<Q: QFunction + ?Sized, R: Rng + ?Sized>(
    q: &Q,
    state: &[f64],
    epsilon: f64,
    rng: &mut R,
) -> Result<(usize, bool), NeuralError> {
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        return Ok((rng.random_range(0..q.n_actions()), true));
    }
    Ok((argmax(&q.q_values(state)?), false))
}

/// Double-DQN targets: the policy net picks the next action, the target net
/// values it.
pub fn ddqn_target<Q: QFunction + ?Sized, T: QFunction + ?Sized>(
    batch: &[&Transition],
    policy: &Q,
    target: &T,
    gamma: f64,
) -> Result<Vec<f64>, NeuralError> {
    batch
        .iter()
        .map(|t| {
            if t.done || gamma == 0.0 {
                return Ok(t.reward);
            }
            let next = argmax(&policy.q_values(&t.next_state)?);
            Ok(t.reward + gamma * target.q_values(&t.next_state)?[next])
        })
        .collect()
}

/// `target <- tau * policy + (1 - tau) * target`, per parameter.
pub fn soft_update(target: &mut DenseNet, policy: &DenseNet, tau: f64) -> Result<(), NeuralError> {
    if !target.same_architecture(policy) {
        return Err(NeuralError::Architecture("soft update between different networks".into()));
    }
    for (t, p) in target.params_mut().iter_mut().zip(policy.params()) {
        *t = tau * p + (1.0 - tau) * *t;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub gamma: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub tau: f64,
    pub huber_delta: f64,
    pub grad_clip: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    pub loss: f64,
    /// Gradient norm before clipping.
    pub grad_norm: f64,
}

/// Policy and target networks with the policy's optimizer state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DqnLearner {
    pub policy: DenseNet,
    pub target: DenseNet,
    adam: AdamState,
    cfg: LearnerConfig,
}

// Transitions per gradient partial; fixed so the sum order never changes.
const GRAD_CHUNK: usize = 32;

impl DqnLearner {
    pub fn new(policy: DenseNet, cfg: LearnerConfig) -> Self {
        Self { target: policy.clone(), adam: AdamState::new(policy.params().len()), policy, cfg }
    }

    pub fn config(&self) -> &LearnerConfig {
        &self.cfg
    }

    /// Huber loss over `batch` and its gradient with respect to the policy
    /// parameters; only the taken action's output carries gradient.
    pub fn loss_and_gradient(&self, batch: &[&Transition], targets: &[f64], mode: ExecMode) -> Result<(f64, Vec<f64>), NeuralError> {
        let n = self.policy.params().len();
        let scale = 1.0 / batch.len() as f64;
        let pairs: Vec<(&Transition, f64)> = batch.iter().copied().zip(targets.iter().copied()).collect();
        let partials = map_chunks(mode, &pairs, GRAD_CHUNK, |chunk| -> Result<(f64, Vec<f64>), NeuralError> {
            let mut grads = vec![0.0; n];
            let mut loss = 0.0;
            for (t, y) in chunk {
                let (q, cache) = self.policy.forward(&t.state)?;
                let (l, g) = huber(&[q[t.action]], &[*y], self.cfg.huber_delta)?;
                let mut grad_out = vec![0.0; q.len()];
                grad_out[t.action] = g[0] * scale;
                self.policy.backward_into(&cache, &grad_out, &mut grads)?;
                loss += l;
            }
            Ok((loss, grads))
        });
        let mut loss = 0.0;
        let mut parts = Vec::with_capacity(partials.len());
        for p in partials {
            let (l, g) = p?;
            loss += l;
            parts.push(g);
        }
        Ok((loss * scale, sum_partials(parts, n)))
    }

    /// One minibatch update followed by the soft target sync. Returns
    /// `None` without touching anything while the buffer is smaller than a
    /// batch.
    pub fn train_step<R: Rng + ?Sized>(&mut self, buffer: &ReplayBuffer, rng: &mut R, mode: ExecMode) -> Result<Option<StepStats>, AgentError> {
        let Some(batch) = buffer.sample(self.cfg.batch_size, rng) else {
            return Ok(None);
        };
        let targets = ddqn_target(&batch, &self.policy, &self.target, self.cfg.gamma)?;
        let (loss, mut grads) = self.loss_and_gradient(&batch, &targets, mode)?;
        if !loss.is_finite() || grads.iter().any(|g| !g.is_finite()) {
            return Err(AgentError::NonFinite(format!("loss {loss}")));
        }
        let grad_norm = clip_global_norm(&mut grads, self.cfg.grad_clip);
        adam_update(self.policy.params_mut(), &grads, &mut self.adam, &AdamConfig::with_lr(self.cfg.learning_rate))?;
        soft_update(&mut self.target, &self.policy, self.cfg.tau)?;
        Ok(Some(StepStats { loss, grad_norm }))
    }
}
