use exp3_core::{
    Backend, Exp3Engine, Exp4Engine, ExpertOracle, IdentityOracle, Loss, PartitionOracle,
    UniformSource,
};

#[test]
fn identity_oracle_reproduces_exp3() {
    let k = 8;
    for backend in Backend::ALL {
        let mut exp3 = Exp3Engine::new(k, 10_000, backend, 1).unwrap();
        let mut exp4 = Exp4Engine::new(k, 10_000, backend, 1).unwrap();
        let oracle = IdentityOracle::new(k);
        let mut script = UniformSource::new(42);
        for _ in 0..10_000 {
            let arm = ((script.next_f64() * k as f64) as usize).min(k - 1);
            let p = exp3.state().prob(arm);
            let loss = Loss::new(script.next_f64() * (k as f64 * p).min(1.0)).unwrap();
            exp3.update(arm, loss).unwrap();
            let group = oracle.group(exp4.round(), arm);
            let q: f64 = group.iter().map(|&j| exp4.state().prob(j)).sum();
            exp4.update(group, loss, q).unwrap();
            assert_eq!(exp4.stats().last_round_touched, group.len());
            for (a, b) in exp3
                .state()
                .log_weights()
                .iter()
                .zip(exp4.state().log_weights())
            {
                assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
            }
        }
    }
}

#[test]
fn same_seed_same_choices() {
    let oracle = IdentityOracle::new(5);
    let mut exp3 = Exp3Engine::new(5, 1000, Backend::SegTree, 9).unwrap();
    let mut exp4 = Exp4Engine::new(5, 1000, Backend::SegTree, 9).unwrap();
    for i in 0..1000 {
        let a = exp3.select_arm().unwrap();
        let b = exp4.select(&oracle).unwrap();
        assert_eq!(a.arm, b.arm);
        assert_eq!(a.prob, b.group_prob);
        let loss = Loss::new((i % 4) as f64 / 3.0).unwrap();
        exp3.update(a.arm, loss).unwrap();
        exp4.update(oracle.group(exp4.round(), b.expert), loss, b.group_prob)
            .unwrap();
    }
}

#[test]
fn touched_count_equals_group_size() {
    let assignment: Vec<usize> = (0..30).map(|j| (j * j) % 4).collect();
    let oracle = PartitionOracle::new(assignment, 4).unwrap();
    let mut e = Exp4Engine::new(30, 5000, Backend::AliasSnapshot, 2).unwrap();
    for _ in 0..5000 {
        let s = e.select(&oracle).unwrap();
        let group = oracle.group(e.round(), s.expert);
        let w_before = e.state().total();
        let renorms = e.stats().renormalizations;
        e.update(group, Loss::new(0.5).unwrap(), s.group_prob)
            .unwrap();
        assert_eq!(e.stats().last_round_touched, group.len());
        if e.stats().renormalizations == renorms {
            let floor = w_before * (1.0 - e.eta() * 0.5);
            assert!(e.state().total() >= floor * (1.0 - 1e-12));
        }
    }
}
