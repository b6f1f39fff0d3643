mod common;

use common::{episode_violations, fixture, peak_day};
use ibdr::agent::{no_dr, rollout};
use ibdr::market_env::{EnvState, MarketEnv};
use ibdr::pipeline::with_rho;
use proptest::prelude::*;
use std::sync::OnceLock;

fn shared() -> &'static common::Fixture {
    static F: OnceLock<common::Fixture> = OnceLock::new();
    F.get_or_init(fixture)
}

fn run(env: &MarketEnv, day: usize, actions: &[usize]) -> (MarketEnv, ibdr::market_env::EpisodeTrace) {
    let mut env = env.clone();
    let scenario = &shared().days[day];
    let mut h = 0;
    let trace = rollout(&mut env, scenario, |_| {
        h += 1;
        Ok(actions[h - 1])
    })
    .unwrap();
    (env, trace)
}

#[test]
fn maximal_incentive_never_leaves_households_worse_off() {
    let f = shared();
    let peak = peak_day(&f.days);
    let top = f.env.space().n_actions() - 1;
    for rho in [0.5, 0.7, 0.9] {
        let env = with_rho(&f.env, rho).unwrap();
        let (_, trace) = run(&env, peak, &[top; 24]);
        let mut daily = vec![0.0; env.n_eu()];
        for s in &trace.steps {
            for k in 0..env.n_eu() {
                let u = rho * s.lambda[k] * s.delta_e[k] - (1.0 - rho) * s.dis_cost[k];
                daily[k] += u;
                if rho == 0.9 {
                    assert!(u >= -1e-12, "hour {} household {k}: utility {u}", s.hour);
                }
            }
        }
        assert!(daily.iter().all(|u| *u >= 0.0), "rho {rho}: {daily:?}");
        assert!(trace.steps.iter().map(|s| s.achieved).sum::<f64>() > 0.0);
    }
}

#[test]
fn null_policy_leaves_demand_untouched() {
    let f = shared();
    let day = peak_day(&f.days);
    let trace = no_dr(&f.env, &f.days[day]).unwrap();
    assert_eq!(trace.load_before(), trace.load_after());
    for (a, b) in trace.load_after().iter().zip(f.days[day].demand_aggregate()) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
    assert!(trace.steps.iter().all(|s| s.delta_e.iter().all(|d| *d == 0.0) && s.dis_cost.iter().all(|c| *c == 0.0)));
}

fn states(env: &MarketEnv, day: usize, actions: &[usize]) -> Vec<EnvState> {
    let mut env = env.clone();
    let mut out = vec![env.reset(&shared().days[day]).unwrap()];
    for a in actions {
        let step = env.step(*a).unwrap();
        if !step.done {
            out.push(step.next_state);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_episodes_keep_accounting_and_safety(
        day in 4usize..183,
        actions in prop::collection::vec(0usize..64, 24),
        rho in prop::sample::select(vec![0.1, 0.5, 0.9]),
    ) {
        let env = with_rho(&shared().env, rho).unwrap();
        let (env, trace) = run(&env, day, &actions);
        let bad = episode_violations(&env, &trace);
        prop_assert!(bad.is_empty(), "{:?}", bad);
    }

    #[test]
    fn states_do_not_depend_on_later_actions(
        day in 4usize..183,
        prefix in prop::collection::vec(0usize..64, 24),
        suffix in prop::collection::vec(0usize..64, 24),
        cut in 0usize..24,
    ) {
        let env = &shared().env;
        let mut other = prefix.clone();
        other[cut..].copy_from_slice(&suffix[cut..]);
        let a = states(env, day, &prefix);
        let b = states(env, day, &other);
        // the state observed at hour `cut` precedes the first differing action
        prop_assert_eq!(&a[..=cut], &b[..=cut]);
    }
}
