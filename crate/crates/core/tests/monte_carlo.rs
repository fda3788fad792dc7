use qve_core::{
    estimate_extinction, generate_random_mbt, generate_scalar, solve, McConfig, QveProblem,
    SolverConfig, SolverKind,
};

fn cfg(trials: u64, max_population: usize) -> McConfig {
    McConfig {
        trials,
        max_population,
        seed: 11,
        start_state: 0,
    }
}

#[test]
fn scalar_estimate_brackets_the_solution() {
    let p = generate_scalar(0.25).unwrap();
    let r = estimate_extinction(&p, &cfg(20_000, 1_000)).unwrap();
    assert!((r.estimate - 1.0 / 3.0).abs() <= 3.0 * r.stderr + 0.005, "{r:?}");
}

#[test]
fn subcritical_populations_die_out() {
    let p = generate_scalar(0.6).unwrap();
    let r = estimate_extinction(&p, &cfg(100_000, 10_000)).unwrap();
    assert!(r.estimate >= 0.99, "{r:?}");
}

#[test]
fn certain_death_without_splitting() {
    let p = QveProblem::new(vec![1.0; 3], qve_core::BilinearTensor::zeros(3)).unwrap();
    for s in 0..3 {
        let r = estimate_extinction(&p, &McConfig { start_state: s, ..cfg(500, 10) }).unwrap();
        assert_eq!(r.estimate, 1.0);
    }
}

#[test]
fn random_instance_every_start_state() {
    let p = generate_random_mbt(3, 0.5, 2).unwrap();
    let x = solve(&p, SolverKind::Newton, &SolverConfig::default()).unwrap().solution;
    for (s, xs) in x.iter().enumerate() {
        let r = estimate_extinction(&p, &McConfig { start_state: s, ..cfg(20_000, 1_000) }).unwrap();
        assert!((r.estimate - xs).abs() <= 3.0 * r.stderr + 0.005, "state {s}: {r:?} vs {xs}");
    }
}

/// Doubling the cutoff moves the estimate by much less than the 0.005
/// truncation allowance.
#[test]
fn truncation_allowance_calibration() {
    let p = generate_scalar(0.4).unwrap();
    let small = estimate_extinction(&p, &cfg(20_000, 500)).unwrap();
    let large = estimate_extinction(&p, &cfg(20_000, 1_000)).unwrap();
    assert!(large.extinct >= small.extinct);
    assert!(large.estimate - small.estimate < 0.002);
}

#[test]
fn one_trial_is_non_informative() {
    let p = generate_scalar(0.25).unwrap();
    let r = estimate_extinction(&p, &cfg(1, 100)).unwrap();
    assert!(r.estimate == 0.0 || r.estimate == 1.0);
    assert_eq!(r.stderr, 0.0);
}
