use super::dqn::{argmax, QFunction};
use super::AgentError;
use crate::exec::{map, ExecMode};
use crate::market_env::{DayScenario, EnvState, EpisodeTrace, MarketEnv};

/// Runs one day with `policy` choosing every action.
pub fn rollout<F>(env: &mut MarketEnv, scenario: &DayScenario, mut policy: F) -> Result<EpisodeTrace, AgentError>
where
    F: FnMut(&EnvState) -> Result<usize, AgentError>,
{
    let mut state = env.reset(scenario)?;
    loop {
        let step = env.step(policy(&state)?)?;
        if step.done {
            break;
        }
        state = step.next_state;
    }
    Ok(env.episode_trace().expect("episode ran"))
}

/// Greedy day on a copy of `env`; neither argument is modified.
pub fn evaluate<Q: QFunction + ?Sized>(q: &Q, env: &MarketEnv, scenario: &DayScenario) -> Result<EpisodeTrace, AgentError> {
    let mut env = env.clone();
    rollout(&mut env, scenario, |s| Ok(argmax(&q.q_values(&s.to_vector())?)))
}

/// Greedy days, possibly in parallel; traces come back in input order.
pub fn evaluate_days<Q: QFunction + Sync + ?Sized>(q: &Q, env: &MarketEnv, days: &[DayScenario], mode: ExecMode) -> Result<Vec<EpisodeTrace>, AgentError> {
    map(mode, days, |d| evaluate(q, env, d)).into_iter().collect()
}

/// The day without any incentive.
pub fn no_dr(env: &MarketEnv, scenario: &DayScenario) -> Result<EpisodeTrace, AgentError> {
    let mut env = env.clone();
    rollout(&mut env, scenario, |_| Ok(0))
}
