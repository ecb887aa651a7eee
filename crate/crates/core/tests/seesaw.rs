mod common;

use common::{werner_success, QUANTUM};
use eacode::channel::butterfly_channel;
use eacode::optimizer::{
    multi_start, objective_from_scores, random_strategy, score_operators, seesaw, SeesawConfig,
    SeesawInit, Side, MONOTONE_SLACK,
};
use eacode::protocol::{chsh_strategy, exact_success};
use eacode::states::{phi_plus, werner};
use eacode::Exec;

#[test]
fn objective_never_decreases() {
    let ch = butterfly_channel();
    let rho = phi_plus();
    for seed in 0..100 {
        let res = seesaw(&rho, &ch, &SeesawConfig::new(SeesawInit::Random(seed))).unwrap();
        for w in res.trace.windows(2) {
            assert!(w[1] >= w[0] - MONOTONE_SLACK, "seed {seed}: {:?}", res.trace);
        }
        assert!(res.final_objective <= QUANTUM + 1e-9);
        assert_eq!(res.trace.len(), 1 + 2 * res.iterations);
        assert!(res.iterations <= 50);
    }
}

#[test]
fn preset_fixed_point_over_ten_sweeps() {
    // One sweep at a time, so the stopping rule cannot cut the run short.
    let ch = butterfly_channel();
    let mut strat = chsh_strategy();
    for _ in 0..10 {
        let cfg = SeesawConfig {
            max_iters: 1,
            tol: 1e-10,
            init: SeesawInit::Strategy(strat),
        };
        let res = seesaw(&phi_plus(), &ch, &cfg).unwrap();
        for v in &res.trace {
            assert!((v - QUANTUM).abs() < 1e-9);
        }
        strat = res.strategy;
    }
}

#[test]
fn werner_states_reach_their_closed_form() {
    let ch = butterfly_channel();
    for p in [0.5, 0.8, 1.0] {
        let rho = werner(p).unwrap();
        let res = multi_start(&rho, &ch, &[1, 2, 3, 4, 5], 50, 1e-12, Exec::Serial).unwrap();
        let best = res.iter().map(|r| r.final_objective).fold(0.0, f64::max);
        assert!((best - werner_success(p)).abs() < 1e-8, "p = {p}: {best}");
    }
}

#[test]
fn scores_linearize_the_objective() {
    let ch = butterfly_channel();
    let rho = werner(0.9).unwrap();
    for seed in 0..10 {
        let strat = random_strategy(seed);
        let exact = exact_success(&rho, &strat, &ch).unwrap();
        let a = score_operators(&rho, &strat, &ch, Side::Alice).unwrap();
        let b = score_operators(&rho, &strat, &ch, Side::Bob).unwrap();
        assert!((objective_from_scores(&a, &strat.alice) - exact).abs() < 1e-12);
        assert!((objective_from_scores(&b, &strat.bob) - exact).abs() < 1e-12);
    }
}

#[test]
fn multi_start_is_execution_independent() {
    let ch = butterfly_channel();
    let seeds: Vec<u64> = (0..16).collect();
    let a = multi_start(&phi_plus(), &ch, &seeds, 50, 1e-10, Exec::Serial).unwrap();
    let b = multi_start(&phi_plus(), &ch, &seeds, 50, 1e-10, Exec::Parallel).unwrap();
    assert_eq!(a, b);
}

#[test]
fn random_strategies_are_seeded() {
    assert_eq!(random_strategy(4), random_strategy(4));
    assert_ne!(random_strategy(4), random_strategy(5));
    for seed in 0..20 {
        let s = random_strategy(seed);
        for a in s.alice_angles().unwrap().into_iter().chain(s.bob_angles().unwrap()) {
            assert!((0.0..std::f64::consts::PI).contains(&a));
        }
    }
}
