use super::dqn::{select_action, DqnLearner, LearnerConfig};
use super::evaluate::evaluate_days;
use super::replay::{ReplayBuffer, Transition};
use super::AgentError;
use crate::exec::ExecMode;
use crate::market_env::{DayScenario, MarketEnv, STATE_DIM};
use crate::neural::{Activation, DenseNet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub gamma: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub epsilon_start: f64,
    pub epsilon_min: f64,
    /// Multiplicative decay applied once per episode.
    pub epsilon_decay: f64,
    pub tau: f64,
    pub hidden: Vec<usize>,
    pub episodes: usize,
    /// Transitions stored before the first update.
    pub warmup: usize,
    pub huber_delta: f64,
    pub grad_clip: f64,
    /// Greedy validation every this many episodes.
    pub validation_every: usize,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            learning_rate: 1e-4,
            batch_size: 256,
            buffer_capacity: 50_000,
            epsilon_start: 1.0,
            epsilon_min: 0.01,
            epsilon_decay: 0.998,
            tau: 0.003,
            hidden: vec![128, 64],
            episodes: 2500,
            warmup: 1000,
            huber_delta: 1.0,
            grad_clip: 10.0,
            validation_every: 50,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), AgentError> {
        let ok = (0.0..=1.0).contains(&self.gamma)
            && self.tau > 0.0
            && self.tau < 1.0
            && self.epsilon_min <= self.epsilon_start
            && (0.0..=1.0).contains(&self.epsilon_start)
            && self.epsilon_min >= 0.0
            && self.epsilon_decay > 0.0
            && self.epsilon_decay <= 1.0
            && self.learning_rate > 0.0
            && self.batch_size > 0
            && self.buffer_capacity >= self.batch_size
            && self.validation_every > 0
            && !self.hidden.is_empty();
        if ok {
            Ok(())
        } else {
            Err(AgentError::Invalid(format!("inconsistent agent configuration {self:?}")))
        }
    }

    pub fn learner(&self) -> LearnerConfig {
        LearnerConfig {
            gamma: self.gamma,
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            tau: self.tau,
            huber_delta: self.huber_delta,
            grad_clip: self.grad_clip,
        }
    }
}

/// Exploration rate after `k` per-episode decays.
pub fn epsilon_at(cfg: &AgentConfig, k: usize) -> f64 {
    (cfg.epsilon_start * cfg.epsilon_decay.powi(k as i32)).max(cfg.epsilon_min)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    /// 1-based.
    pub episode: usize,
    pub train_reward: f64,
    pub epsilon: f64,
    /// Mean loss of the updates in this episode, if any ran.
    pub loss_mean: Option<f64>,
    /// Mean greedy return over the validation days, on validation episodes.
    pub val_reward: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub learner: DqnLearner,
    pub log: Vec<EpisodeLog>,
    /// Transitions stored over the run.
    pub transitions: usize,
}

/// Trains a fresh policy on days drawn uniformly from `train_days`.
///
/// One update runs per environment step once `warmup` transitions are
/// stored. Everything random (initial weights, days, exploration, batches)
/// comes from one generator seeded with `seed`.
pub fn train_agent(
    env: &mut MarketEnv,
    train_days: &[DayScenario],
    val_days: &[DayScenario],
    cfg: &AgentConfig,
    seed: u64,
    mode: ExecMode,
) -> Result<TrainOutcome, AgentError> {
    cfg.validate()?;
    if train_days.is_empty() {
        return Err(AgentError::Invalid("no training days".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sizes = vec![STATE_DIM];
    sizes.extend(&cfg.hidden);
    sizes.push(env.space().n_actions());
    let net = DenseNet::new(&sizes, Activation::Relu, Activation::Linear, &mut rng)?;
    let mut learner = DqnLearner::new(net, cfg.learner());
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity);
    let mut log = Vec::with_capacity(cfg.episodes);

    for ep in 0..cfg.episodes {
        let epsilon = epsilon_at(cfg, ep);
        let day = &train_days[rng.random_range(0..train_days.len())];
        let mut state = env.reset(day)?.to_vector();
        let (mut total, mut loss_sum, mut updates) = (0.0, 0.0, 0usize);
        loop {
            let (action, _) = select_action(&learner.policy, &state, epsilon, &mut rng)?;
            let step = env.step(action)?;
            let next_state = step.next_state.to_vector();
            buffer.push(Transition { state, action, reward: step.reward, next_state: next_state.clone(), done: step.done });
            total += step.reward;
            if buffer.len() >= cfg.warmup {
                let before = learner.clone();
                match learner.train_step(&buffer, &mut rng, mode) {
                    Ok(Some(stats)) => {
                        loss_sum += stats.loss;
                        updates += 1;
                    }
                    Ok(None) => {}
                    Err(AgentError::NonFinite(reason)) => {
                        return Err(AgentError::Diverged { episode: ep + 1, reason, learner: Box::new(before) });
                    }
                    Err(e) => return Err(e),
                }
            }
            if step.done {
                break;
            }
            state = next_state;
        }
        let val_reward = if (ep + 1) % cfg.validation_every == 0 && !val_days.is_empty() {
            let traces = evaluate_days(&learner.policy, env, val_days, mode)?;
            Some(traces.iter().map(|t| t.total_reward()).sum::<f64>() / traces.len() as f64)
        } else {
            None
        };
        log.push(EpisodeLog {
            episode: ep + 1,
            train_reward: total,
            epsilon,
            loss_mean: (updates > 0).then(|| loss_sum / updates as f64),
            val_reward,
        });
    }
    Ok(TrainOutcome { learner, log, transitions: buffer.inserted() })
}

const LOG_HEADER: [&str; 5] = ["episode", "train_reward", "epsilon", "loss_mean", "val_reward"];

/// CSV with one row per episode; absent values are empty cells.
pub fn write_training_log<W: Write>(writer: W, log: &[EpisodeLog]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(LOG_HEADER)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for e in log {
        w.write_record([e.episode.to_string(), e.train_reward.to_string(), e.epsilon.to_string(), opt(e.loss_mean), opt(e.val_reward)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_training_log<R: Read>(reader: R) -> Result<Vec<EpisodeLog>, AgentError> {
    let bad = |e: String| AgentError::Invalid(format!("training log: {e}"));
    let mut r = csv::Reader::from_reader(reader);
    if r.headers().map_err(|e| bad(e.to_string()))?.iter().ne(LOG_HEADER) {
        return Err(bad("unexpected header".into()));
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let f = |k: usize| rec[k].parse::<f64>().map_err(|e| bad(format!("{}: {e}", LOG_HEADER[k])));
            let opt = |k: usize| if rec[k].is_empty() { Ok(None) } else { f(k).map(Some) };
            Ok(EpisodeLog {
                episode: rec[0].parse().map_err(|e| bad(format!("episode: {e}")))?,
                train_reward: f(1)?,
                epsilon: f(2)?,
                loss_mean: opt(3)?,
                val_reward: opt(4)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::household::{Fleet, FleetConfig};
    use crate::market_env::EnvConfig;
    use chrono::NaiveDate;

    fn env_and_days() -> (MarketEnv, Vec<DayScenario>) {
        let ids: Vec<String> = ["1", "2", "3"].map(String::from).to_vec();
        let fleet = Fleet::sample(&FleetConfig::default(), &ids, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let env = MarketEnv::new(fleet, EnvConfig::default(), 7.0).unwrap();
        let days = (0..4)
            .map(|d| {
                let mut load = [2.0; 24];
                load[20..].fill(3.0 + 0.1 * d as f64);
                let mut price = [5.0; 24];
                price[20..].fill(9.0);
                DayScenario::from_forecast(NaiveDate::from_ymd_opt(2018, 6, 1 + d).unwrap(), price, vec![load; 3])
            })
            .collect();
        (env, days)
    }

    fn tiny(episodes: usize) -> AgentConfig {
        AgentConfig { episodes, hidden: vec![16], batch_size: 16, warmup: 32, buffer_capacity: 500, validation_every: 2, ..AgentConfig::default() }
    }

    #[test]
    fn epsilon_schedule_is_exact() {
        let cfg = AgentConfig::default();
        assert_eq!(epsilon_at(&cfg, 0), 1.0);
        assert_eq!(epsilon_at(&cfg, 10), 0.998f64.powi(10));
        assert_eq!(epsilon_at(&cfg, 5000), 0.01);
    }

    #[test]
    fn one_episode_stores_one_day() {
        let (mut env, days) = env_and_days();
        let out = train_agent(&mut env, &days, &[], &tiny(1), 0, ExecMode::Sequential).unwrap();
        assert_eq!(out.transitions, 24);
        assert_eq!(out.log.len(), 1);
        assert!(out.log[0].loss_mean.is_none());
    }

    #[test]
    fn training_is_reproducible() {
        let (mut env, days) = env_and_days();
        let a = train_agent(&mut env, &days, &days[..1], &tiny(5), 3, ExecMode::Sequential).unwrap();
        let b = train_agent(&mut env, &days, &days[..1], &tiny(5), 3, ExecMode::Parallel).unwrap();
        assert_eq!(a.log, b.log);
        assert_eq!(a.learner.policy.params(), b.learner.policy.params());
        assert!(a.log[1].val_reward.is_some() && a.log[2].val_reward.is_none());
        assert!(a.log[4].loss_mean.is_some());
    }

    #[test]
    fn log_round_trips() {
        let log = vec![
            EpisodeLog { episode: 1, train_reward: -3.25, epsilon: 1.0, loss_mean: None, val_reward: None },
            EpisodeLog { episode: 2, train_reward: 0.1 + 0.2, epsilon: 0.998, loss_mean: Some(1.0 / 3.0), val_reward: Some(-7.0) },
        ];
        let mut buf = Vec::new();
        write_training_log(&mut buf, &log).unwrap();
        assert_eq!(read_training_log(buf.as_slice()).unwrap(), log);
    }

    #[test]
    fn bad_config_is_rejected() {
        let (mut env, days) = env_and_days();
        let cfg = AgentConfig { epsilon_min: 0.5, epsilon_start: 0.1, ..tiny(1) };
        assert!(train_agent(&mut env, &days, &[], &cfg, 0, ExecMode::Sequential).is_err());
        assert!(train_agent(&mut env, &[], &[], &tiny(1), 0, ExecMode::Sequential).is_err());
    }
}
