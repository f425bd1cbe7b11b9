use kinetic_ar::bench::build_problem;
use kinetic_ar::compute_dt;
use kinetic_ar::config::Overrides;

fn max_drift_over(problem: &str, o: Overrides, steps: usize) -> [f64; 3] {
    let p = build_problem(problem, &o).unwrap();
    let dt = compute_dt(&p.grid, p.spec.config.cfl).unwrap();
    let result = p
        .solver
        .run(
            p.initial_state().unwrap(),
            steps as f64 * dt * (1.0 - 1e-9),
            |_, _| {},
        )
        .unwrap();
    assert_eq!(result.steps(), steps);
    result.max_drift()
}

#[test]
fn periodic_totals_hold_for_a_hundred_steps() {
    for (problem, epsilon) in [
        ("consistent_ic", Some(1e-2)),
        ("consistent_ic", Some(1e-6)),
        ("mixed_regime", None),
    ] {
        let o = Overrides {
            nx: Some(48),
            nv: Some(48),
            epsilon,
            ..Default::default()
        };
        let drift = max_drift_over(problem, o, 100);
        assert!(
            drift.iter().all(|d| *d <= 1e-12),
            "{problem} {epsilon:?}: {drift:?}"
        );
    }
}
