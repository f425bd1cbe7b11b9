mod common;

#[test]
fn backward_euler_step_matches_full_grid() {
    for eps in [1e-2, 1e-6] {
        let gap = common::be_step_gap(eps, 32);
        assert!(gap <= 1e-9, "eps {eps}: max entry error {gap:e}");
    }
}
