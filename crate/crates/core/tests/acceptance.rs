//! End-to-end acceptance checks, one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness. Pass criterion numbers to run a subset,
//! e.g. `cargo test --test acceptance -- 1 2 3`.

mod common;

use ibdr::agent::{ddqn_target, epsilon_at, rollout, soft_update, AgentConfig, QFunction, ReplayBuffer, Transition};
use ibdr::benchmark::eblr_reduction;
use ibdr::config::RunConfig;
use ibdr::data::{synth_generate, HolidayCalendar, HourlySeries, Quantity, SynthConfig};
use ibdr::exec::ExecMode;
use ibdr::forecast::{evaluate_forecast, forecast_day, train_forecaster, ForecastConfig, RollMode};
use ibdr::household::{pc_best_response, pc_cost, pc_delta, ts_cost};
use ibdr::market_env::{shaping, ShapingConfig, STATE_DIM};
use ibdr::metrics::{load_stats, par_improvement, LoadStats};
use ibdr::neural::{grad_check, mse, Activation, DenseNet, LstmCell, NeuralError, FD_STEP};
use ibdr::pipeline::{build_env, compare_day, prepare, sweep_rho, train_forecasters, with_rho, Dataset, Prepared};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

const MODE: ExecMode = ExecMode::Parallel;

/// Forecaster epochs for the learning criteria; see the README.
const FORECAST_EPOCHS: usize = 8;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9
}

// ---------------------------------------------------------------- gradients

fn dense_report(sizes: &[usize], rng: &mut ChaCha8Rng) -> f64 {
    let net = DenseNet::new(sizes, Activation::Relu, Activation::Linear, rng).unwrap();
    let x: Vec<f64> = (0..sizes[0]).map(|_| rng.random_range(-1.0..1.0)).collect();
    let target: Vec<f64> = (0..*sizes.last().unwrap()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut probe = net.clone();
    let mut first = true;
    grad_check(net.params(), FD_STEP, |p| {
        probe.params_mut().copy_from_slice(p);
        let (y, cache) = probe.forward(&x).unwrap();
        let (loss, g) = mse(&y, &target).unwrap();
        // only the unperturbed call's gradient is compared
        let grads = if first { probe.backward(&cache, &g).unwrap() } else { Vec::new() };
        first = false;
        (loss, grads)
    })
    .max_rel_error
}

fn lstm_report(input: usize, hidden: usize, rng: &mut ChaCha8Rng) -> f64 {
    let cell = LstmCell::new(input, hidden, rng);
    let x: Vec<f64> = (0..input).map(|_| rng.random_range(-1.0..1.0)).collect();
    let h0: Vec<f64> = (0..hidden).map(|_| rng.random_range(-0.5..0.5)).collect();
    let c0: Vec<f64> = (0..hidden).map(|_| rng.random_range(-0.5..0.5)).collect();
    let (wh, wc): (Vec<f64>, Vec<f64>) = (0..hidden).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).unzip();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut probe = cell.clone();
    let mut first = true;
    grad_check(cell.params(), FD_STEP, |p| {
        probe.params_mut().copy_from_slice(p);
        let (h, c, cache) = probe.step(&x, &h0, &c0).unwrap();
        let loss = dot(&wh, &h) + dot(&wc, &c);
        let mut grads = Vec::new();
        if first {
            grads = vec![0.0; p.len()];
            probe.backward_step(&cache, &wh, &wc, &mut grads).unwrap();
            first = false;
        }
        (loss, grads)
    })
    .max_rel_error
}

fn gradient_fidelity() -> Verdict {
    let start = Instant::now();
    let mut worst = [0.0f64; 3];
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        worst[0] = worst[0].max(dense_report(&[14, 64, 64, 1], &mut rng));
        worst[1] = worst[1].max(dense_report(&[STATE_DIM, 128, 64, 64], &mut rng));
        worst[2] = worst[2].max(lstm_report(14, 64, &mut rng));
    }
    let elapsed = start.elapsed();
    verdict(
        worst.iter().all(|w| *w < 1e-4) && elapsed < Duration::from_secs(30),
        format!("max rel error forecaster head {:.1e}, q-net {:.1e}, lstm cell {:.1e}; {:.1}s", worst[0], worst[1], worst[2], elapsed.as_secs_f64()),
    )
}

// ------------------------------------------------------------------ oracles

struct Stub(Vec<f64>);

impl QFunction for Stub {
    fn n_actions(&self) -> usize {
        self.0.len()
    }
    fn q_values(&self, _: &[f64]) -> Result<Vec<f64>, NeuralError> {
        Ok(self.0.clone())
    }
}

fn formula_oracles() -> Verdict {
    let mut failures = Vec::new();
    let mut points = 0;
    for beta in [0.05, 0.5, 1.0, 3.5, 8.0] {
        for lambda in [0.0, 0.7, 2.5, 6.0, 12.0] {
            for e in [0.4, 1.5] {
                for m in [1u32, 2, 4, 8] {
                    points += 1;
                    let mut best = (0u32, 0.0f64);
                    for q in 0..=m {
                        let d = (q as f64 / m as f64) * e;
                        let cost = beta * d * d;
                        if pc_delta(q, m, e).unwrap() != d || pc_cost(beta, q, m, e).unwrap() != cost {
                            failures.push(format!("pc terms at beta {beta} q {q}/{m} e {e}"));
                        }
                        if lambda * d - cost > best.1 {
                            best = (q, lambda * d - cost);
                        }
                    }
                    if pc_delta(m + 1, m, e).is_ok() {
                        failures.push(format!("level {} of {m} accepted", m + 1));
                    }
                    if pc_best_response(lambda, beta, m, e) != best.0 {
                        failures.push(format!("best response at beta {beta} lambda {lambda} e {e} m {m}"));
                    }
                }
            }
        }
    }

    let mut hand = |ok: bool, what: &str| {
        if !ok {
            failures.push(what.to_string());
        }
    };
    hand(close(ts_cost(0.4, 3.0).unwrap(), 3.6), "ts_cost(0.4, 3)");
    hand(ts_cost(0.4, 0.0).unwrap() == 0.0, "ts_cost at zero delay");
    hand(close(ts_cost(0.7, 5.0).unwrap(), 4.0 * ts_cost(0.7, 2.5).unwrap()), "ts_cost quadratic");
    hand(ts_cost(0.4, -1.0).is_err(), "ts_cost negative delay");
    let sc = ShapingConfig::default();
    hand(close(shaping(&sc, 0.0, 0.0, &[0.0, 0.0, 0.0]).phi, 5.0), "idle bonus");
    hand(close(shaping(&sc, 2.0, 0.0, &[0.0, 0.0, 0.0]).phi, -60.0), "doubled miss penalty");
    hand(close(shaping(&sc, 1.0, 3.0, &[1.0, 0.0, 0.0]).phi, -1.0), "over-reduction penalty");
    let p_min = 4.0;
    hand(close(eblr_reduction(2.0, 0.5, 0.3 * p_min, 0.3 * p_min).unwrap(), 0.0), "eblr at lambda_min");
    hand(close(eblr_reduction(2.0, 0.5, 0.6 * p_min, 0.3 * p_min).unwrap(), 0.6), "eblr clamp");
    hand(close(eblr_reduction(2.0, 0.0, 0.9 * p_min, 0.3 * p_min).unwrap(), 0.0), "eblr zero elasticity");
    hand(eblr_reduction(2.0, 0.5, 0.2 * p_min, 0.3 * p_min).is_err(), "eblr below lambda_min");

    let t = |done| Transition { state: vec![0.0], action: 0, reward: 1.0, next_state: vec![0.0], done };
    let (live, terminal) = (t(false), t(true));
    let (policy, target) = (Stub(vec![1.0, 5.0, 2.0]), Stub(vec![10.0, 20.0, 30.0]));
    let y = ddqn_target(&[&live, &terminal], &policy, &target, 0.99).unwrap();
    hand(close(y[0], 20.8) && close(y[1], 1.0), "ddqn target");
    hand(close(ddqn_target(&[&live], &policy, &target, 0.0).unwrap()[0], 1.0), "ddqn target at gamma 0");

    let mut policy_net = DenseNet::zeros(&[1, 1], Activation::Relu, Activation::Linear).unwrap();
    policy_net.params_mut().fill(1.0);
    let mut target_net = DenseNet::zeros(&[1, 1], Activation::Relu, Activation::Linear).unwrap();
    soft_update(&mut target_net, &policy_net, 0.003).unwrap();
    hand(target_net.params().iter().all(|v| close(*v, 0.003)), "soft update blend");
    let before = target_net.clone();
    soft_update(&mut target_net, &policy_net, 0.0).unwrap();
    hand(target_net == before, "soft update at tau 0");
    soft_update(&mut target_net, &policy_net, 1.0).unwrap();
    hand(target_net.params() == policy_net.params(), "soft update at tau 1");
    let wider = DenseNet::zeros(&[1, 2], Activation::Relu, Activation::Linear).unwrap();
    hand(soft_update(&mut target_net, &wider, 0.5).is_err(), "soft update shape mismatch");

    verdict(points == 200 && failures.is_empty(), format!("{points} grid points, mismatches: {failures:?}"))
}

// ------------------------------------------------------------------ metrics

fn profile(peak: f64, mean: f64) -> Vec<f64> {
    let rest = (24.0 * mean - peak) / 23.0;
    let mut p = vec![rest; 24];
    p[17] = peak;
    p
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn metric_anchors() -> Verdict {
    let base = load_stats(&profile(11.89, 6.46)).unwrap();
    let treated = load_stats(&profile(7.60, 5.34)).unwrap();
    let stats_ok = close(base.peak, 11.89) && close(base.mean, 6.46) && close(treated.peak, 7.60) && close(treated.mean, 5.34);
    let rounded = |s: &LoadStats| LoadStats { peak: s.peak, mean: s.mean, par: round2(s.par) };
    let improvement = par_improvement(&rounded(&base), &rounded(&treated));
    verdict(
        stats_ok && round2(base.par) == 1.84 && round2(treated.par) == 1.42 && (improvement - 22.8).abs() <= 0.1,
        format!("PAR {:.4} and {:.4}, improvement {improvement:.3}%", base.par, treated.par),
    )
}

// ------------------------------------------------------------------- safety

fn conservation_and_safety() -> Verdict {
    let start = Instant::now();
    let f = common::fixture();
    let envs: Vec<_> = [0.1, 0.3, 0.5, 0.7, 0.9].iter().map(|r| with_rho(&f.env, *r).unwrap()).collect();
    let n_actions = f.env.space().n_actions();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut failures = Vec::new();
    let mut shifted = 0usize;
    for episode in 0..1000 {
        let mut env = envs[rng.random_range(0..envs.len())].clone();
        // bias some episodes toward high incentives so shifting is exercised
        let floor = if episode % 2 == 0 { 0 } else { n_actions / 2 };
        let day = &f.days[rng.random_range(4..f.days.len())];
        let trace = rollout(&mut env, day, |_| Ok(rng.random_range(floor..n_actions))).unwrap();
        if trace.load_before().iter().zip(trace.load_after()).any(|(b, a)| (b - a).abs() > 1e-12) {
            shifted += 1;
        }
        let bad = common::episode_violations(&env, &trace);
        if !bad.is_empty() {
            failures.push(format!("episode {episode}: {bad:?}"));
        }
    }

    let mut buffer = ReplayBuffer::new(100);
    for k in 0..250 {
        buffer.push(Transition { state: vec![k as f64], action: 0, reward: k as f64, next_state: vec![], done: false });
    }
    let mut kept: Vec<f64> = buffer.iter().map(|t| t.reward).collect();
    kept.sort_by(f64::total_cmp);
    let expected: Vec<f64> = (150..250).map(|k| k as f64).collect();
    if buffer.len() != 100 || buffer.capacity() != 100 || buffer.inserted() != 250 || kept != expected {
        failures.push("replay buffer does not keep exactly the newest transitions".into());
    }

    let cfg = AgentConfig::default();
    let mut eps = cfg.epsilon_start;
    for k in 0..4000 {
        let got = epsilon_at(&cfg, k);
        if (got - eps.max(cfg.epsilon_min)).abs() > 1e-12 || (k == 0 && got != cfg.epsilon_start) {
            failures.push(format!("epsilon at episode {k}: {got}"));
            break;
        }
        eps *= cfg.epsilon_decay;
    }
    if epsilon_at(&cfg, 3000) != cfg.epsilon_min {
        failures.push("epsilon does not settle at its floor".into());
    }

    let elapsed = start.elapsed();
    verdict(
        failures.is_empty() && elapsed < Duration::from_secs(300),
        format!("1000 episodes ({shifted} with DR), {:.1}s, violations: {:?}", elapsed.as_secs_f64(), &failures[..failures.len().min(3)]),
    )
}

// ----------------------------------------------------------------- learning

struct Learning {
    cfg: RunConfig,
    prepared: Prepared,
    env: ibdr::market_env::MarketEnv,
    forecast_time: Duration,
}

fn learning_setup() -> Learning {
    let start = Instant::now();
    let mut cfg = RunConfig::default();
    cfg.forecast.max_epochs = FORECAST_EPOCHS;
    let ds = Dataset::load(&cfg).unwrap();
    let (bundle, _) = train_forecasters(&ds.training_series(&cfg).unwrap(), &ds.holidays, &cfg, MODE).unwrap();
    let prepared = prepare(&ds, &cfg, Some(&bundle), MODE).unwrap();
    let env = build_env(&cfg, ds.series.household_ids(), prepared.capacity).unwrap();
    Learning { cfg, prepared, env, forecast_time: start.elapsed() }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn learning_and_benchmarks(setup: &Learning) -> (Verdict, Verdict) {
    let start = Instant::now();
    let mut cfg = setup.cfg.clone();
    cfg.agent.episodes = 500;
    let mut env = setup.env.clone();
    let outcome = ibdr::pipeline::train_policy(&mut env, &setup.prepared, &cfg, MODE).unwrap();
    let elapsed = setup.forecast_time + start.elapsed();

    let quintile = cfg.agent.episodes / 5;
    let val = |range: std::ops::Range<usize>| -> Vec<f64> {
        outcome.log.iter().filter(|l| range.contains(&(l.episode - 1))).filter_map(|l| l.val_reward).collect()
    };
    let (early, late) = (val(0..quintile), val(cfg.agent.episodes - quintile..cfg.agent.episodes));
    let rising = !early.is_empty() && !late.is_empty() && mean(&late) > mean(&early);

    let cmp = compare_day(&env, &outcome.learner.policy, &setup.prepared.eval, &cfg).unwrap();
    let [(_, no_dr), (_, eblr), (_, ccrl)] = cmp.stats().unwrap();
    let reduction = par_improvement(&no_dr, &ccrl);
    let after = cmp.ccrl.load_after();
    let max_after = after.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let no_rebound = max_after <= no_dr.peak;
    let c5 = verdict(
        rising && reduction >= 15.0 && no_rebound && elapsed < Duration::from_secs(600),
        format!(
            "validation reward {:.1} -> {:.1}; PAR {:.3} -> {:.3} ({reduction:.2}% reduction); max post-DR load {max_after:.3} vs NoDR peak {:.3}; {:.0}s",
            mean(&early),
            mean(&late),
            no_dr.par,
            ccrl.par,
            no_dr.peak,
            elapsed.as_secs_f64()
        ),
    );

    let eblr_raises = cmp.eblr.load_before().iter().zip(cmp.eblr.load_after()).filter(|(b, a)| a > *b).count();
    let c6 = verdict(
        ccrl.par < eblr.par && eblr.par < no_dr.par && eblr_raises == 0,
        format!("PAR CCRL-DR {:.3} < EBLR {:.3} < NoDR {:.3}; hours EBLR raised: {eblr_raises}", ccrl.par, eblr.par, no_dr.par),
    );
    (c5, c6)
}

fn rho_directionality(setup: &Learning) -> Verdict {
    let start = Instant::now();
    let rhos = [0.1, 0.5, 0.9];
    let points = sweep_rho(&setup.env, &setup.prepared, &setup.cfg, &rhos, MODE).unwrap();
    let elapsed = start.elapsed();
    let cost: Vec<f64> = points.iter().map(|p| p.ledger.sp_cost).collect();
    let profit: Vec<f64> = points.iter().map(|p| p.ledger.eu_profit_total()).collect();
    let monotone = cost.windows(2).all(|w| w[0] <= w[1]);
    verdict(
        monotone && profit[2] > profit[0] && elapsed < Duration::from_secs(1800),
        format!(
            "{} episodes per rho; SP cost {:.2?}; EU profit {:.2?}; {:.0}s",
            setup.cfg.agent.episodes,
            cost,
            profit,
            elapsed.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------- forecasts

fn forecast_sanity() -> Verdict {
    let s = synth_generate(&SynthConfig { days: 40, noise: 0.0, seed: 5, ..Default::default() });
    let days = s.full_days();
    let cal = HolidayCalendar::default();
    let train = s.slice(0..36 * 24);
    let cfg = ForecastConfig { lstm_layers: 1, hidden_units: 12, window: 6, max_epochs: 30, learning_rate: 5e-3, ..Default::default() };
    let target = Quantity::Load(1);
    let (model, _) = train_forecaster(&train, target, &cal, &cfg, 3, MODE).unwrap();
    let test_day = days[38];
    let rolled = forecast_day(&model, &s, test_day, &cal, RollMode::Rolled).unwrap();
    let actual: Vec<f64> = s.day_range(test_day).unwrap().map(|i| s.value(target, i)).collect();
    let acc = evaluate_forecast(&rolled, &actual).unwrap();

    // scaling every hour from the forecast day on must not move the forecast
    let mut records = s.records().to_vec();
    for r in &mut records[38 * 24..] {
        r.loads[1] *= 3.0;
        r.price += 50.0;
    }
    let mutated = HourlySeries::new(s.household_ids().to_vec(), records).unwrap();
    let causal = forecast_day(&model, &mutated, test_day, &cal, RollMode::Rolled).unwrap() == rolled;
    verdict(acc.mape < 5.0 && causal, format!("test MAPE {:.2}%, future mutation leaves forecast unchanged: {causal}", acc.mape))
}

// --------------------------------------------------------------------- main

fn run(n: usize, f: impl FnOnce() -> Verdict) -> bool {
    let v = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default();
        verdict(false, format!("panicked: {msg}"))
    });
    println!("criterion {n}: {} ({})", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    v.pass
}

fn main() {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |n: usize| selected.is_empty() || selected.contains(&n);
    let mut ok = true;
    if wanted(1) {
        ok &= run(1, gradient_fidelity);
    }
    if wanted(2) {
        ok &= run(2, formula_oracles);
    }
    if wanted(3) {
        ok &= run(3, metric_anchors);
    }
    if wanted(4) {
        ok &= run(4, conservation_and_safety);
    }
    if wanted(5) || wanted(6) || wanted(7) {
        match catch_unwind(learning_setup) {
            Ok(setup) => {
                if wanted(5) || wanted(6) {
                    let mut c6 = None;
                    ok &= run(5, || {
                        let (c5, v6) = learning_and_benchmarks(&setup);
                        c6 = Some(v6);
                        c5
                    });
                    let c6 = c6.unwrap_or_else(|| verdict(false, "learning run failed".into()));
                    ok &= run(6, || c6);
                }
                if wanted(7) {
                    ok &= run(7, || rho_directionality(&setup));
                }
            }
            Err(_) => {
                for n in [5, 6, 7].into_iter().filter(|n| wanted(*n)) {
                    ok &= run(n, || verdict(false, "forecaster training failed".into()));
                }
            }
        }
    }
    if wanted(8) {
        ok &= run(8, forecast_sanity);
    }
    std::process::exit(if ok { 0 } else { 1 });
}
