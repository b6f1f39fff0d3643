//! Double-DQN incentive policy for the service provider.

mod dqn;
mod evaluate;
mod replay;
mod train;

pub use dqn::{argmax, ddqn_target, select_action, soft_update, DqnLearner, LearnerConfig, QFunction, StepStats};
pub use evaluate::{evaluate, evaluate_days, no_dr, rollout};
pub use replay::{ReplayBuffer, Transition};
pub use train::{epsilon_at, read_training_log, train_agent, write_training_log, AgentConfig, EpisodeLog, TrainOutcome};

use crate::market_env::EnvError;
use crate::neural::NeuralError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error("non-finite update: {0}")]
    NonFinite(String),
    /// Training hit a non-finite loss; `learner` holds the last finite state.
    #[error("training diverged in episode {episode}: {reason}")]
    Diverged { episode: usize, reason: String, learner: Box<DqnLearner> },
    #[error("{0}")]
    Invalid(String),
}
