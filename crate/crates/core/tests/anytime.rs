use exp3_core::{
    anytime_eta, block_end, fixed_eta, Backend, DelayedUpdateEngine, DoublingWrapper, EngineConfig,
    FtrlAnytimeEngine, Loss, Policy, StochasticEnv, UniformSource,
};

#[test]
fn delayed_schedule_is_a_step_function() {
    for k in [2usize, 3, 10] {
        let mut e = DelayedUpdateEngine::new(k, Backend::AliasSnapshot, 5).unwrap();
        let mut env = StochasticEnv::with_gap(k, 0.1, 1).unwrap();
        for t in 1..=10_000u64 {
            assert_eq!(e.round(), t);
            let b = block_end(t, k).unwrap();
            assert_eq!(e.eta(), anytime_eta(k, b).unwrap().value(), "K={k} t={t}");
            assert_eq!(e.eta(), DelayedUpdateEngine::scheduled_eta(k, t).unwrap());
            e.step(&mut env).unwrap();
        }
    }
}

#[test]
fn delayed_boundary_weights_follow_ftrl() {
    for backend in Backend::ALL {
        let k = 10;
        let mut e = DelayedUpdateEngine::new(k, backend, 11).unwrap();
        let mut env = StochasticEnv::with_gap(k, 0.1, 2).unwrap();
        for t in 1..=2_000u64 {
            e.step(&mut env).unwrap();
            if t % k as u64 != 0 {
                continue;
            }
            let eta = anytime_eta(k, t + k as u64).unwrap().value();
            let lw: Vec<f64> = e.cum_estimates().iter().map(|l| -eta * l).collect();
            let max = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let want: Vec<f64> = lw.iter().map(|l| (l - max).exp()).collect();
            let total: f64 = want.iter().sum();
            for (p, w) in e.inner().probabilities().iter().zip(&want) {
                let q = w / total;
                assert!((p - q).abs() <= 1e-9 * q, "{backend} t={t}");
            }
        }
    }
}

#[test]
fn delayed_block_matches_ftrl_when_rate_constant() {
    // Inside one block the delayed engine is plain EXP3 with a fixed rate,
    // so its log weights are exactly -eta * Lhat.
    let k = 6;
    let mut e = DelayedUpdateEngine::new(k, Backend::SegTree, 4).unwrap();
    let mut env = StochasticEnv::with_gap(k, 0.2, 9).unwrap();
    for _ in 0..(k * 30 + 3) {
        e.step(&mut env).unwrap();
        let eta = e.eta();
        let max = e
            .state()
            .log_weights()
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let lmin = e
            .cum_estimates()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        for (lw, l) in e.state().log_weights().iter().zip(e.cum_estimates()) {
            assert!(((lw - max) + eta * (l - lmin)).abs() < 1e-9 * (1.0 + eta * l));
        }
    }
}

#[test]
fn doubling_starts_every_block_uniform() {
    let k = 7;
    let cfg = EngineConfig::new(Backend::AliasDoubleBuffered);
    let mut w = DoublingWrapper::new(k, cfg, UniformSource::new(3)).unwrap();
    let mut env = StochasticEnv::with_gap(k, 0.1, 3).unwrap();
    for t in 1..=5_000u64 {
        let block = DoublingWrapper::block_of(t);
        if t == 1u64 << block {
            assert_eq!(w.inner().state().raw(), vec![1.0; k].as_slice(), "t={t}");
            let eta = fixed_eta(k, 1u64 << block).unwrap().value();
            assert_eq!(w.inner().eta().value(), eta);
        }
        w.step(&mut env).unwrap();
    }
}

#[test]
fn ftrl_matches_closed_form_every_round() {
    let k = 4;
    let mut e = FtrlAnytimeEngine::new(k, UniformSource::new(6)).unwrap();
    let mut env = StochasticEnv::with_gap(k, 0.1, 6).unwrap();
    for _ in 0..500 {
        let t = e.round();
        let eta = anytime_eta(k, (t - 1).max(1)).unwrap().value();
        let w: Vec<f64> = e.cum_estimates().iter().map(|l| (-eta * l).exp()).collect();
        let total: f64 = w.iter().sum();
        for (p, wi) in e.probabilities().iter().zip(&w) {
            assert!((p - wi / total).abs() < 1e-12);
        }
        e.step(&mut env).unwrap();
    }
    let _ = Loss::ZERO;
}
