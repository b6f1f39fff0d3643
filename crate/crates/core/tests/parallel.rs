mod common;

use common::fixture;
use ibdr::agent::{evaluate_days, train_agent, AgentConfig};
use ibdr::data::{synth_generate, HolidayCalendar, Quantity, SynthConfig};
use ibdr::exec::ExecMode;
use ibdr::forecast::{train_forecaster, ForecastConfig};

#[test]
fn agent_training_and_evaluation_match_across_modes() {
    let f = fixture();
    let cfg = AgentConfig { episodes: 4, warmup: 48, batch_size: 32, hidden: vec![32, 16], validation_every: 2, ..Default::default() };
    let run = |mode| {
        let mut env = f.env.clone();
        train_agent(&mut env, &f.days[10..40], &f.days[40..43], &cfg, 9, mode).unwrap()
    };
    let (seq, par) = (run(ExecMode::Sequential), run(ExecMode::Parallel));
    assert_eq!(seq.learner.policy, par.learner.policy);
    assert_eq!(seq.log, par.log);

    let days = &f.days[90..121];
    let a = evaluate_days(&seq.learner.policy, &f.env, days, ExecMode::Sequential).unwrap();
    let b = evaluate_days(&seq.learner.policy, &f.env, days, ExecMode::Parallel).unwrap();
    assert_eq!(a, b);
}

#[test]
fn forecaster_training_matches_across_modes() {
    let s = synth_generate(&SynthConfig { days: 12, ..Default::default() });
    let cal = HolidayCalendar::us_federal_2018();
    let cfg = ForecastConfig { lstm_layers: 2, hidden_units: 8, window: 6, max_epochs: 2, ..Default::default() };
    let seq = train_forecaster(&s, Quantity::Load(2), &cal, &cfg, 4, ExecMode::Sequential).unwrap();
    let par = train_forecaster(&s, Quantity::Load(2), &cal, &cfg, 4, ExecMode::Parallel).unwrap();
    assert_eq!(seq.0, par.0);
    assert_eq!(seq.1, par.1);
}
