mod common;

use common::*;

#[test]
fn value_iteration_matches_closed_form() {
    let q = value_iteration();
    for s in 0..GOAL {
        let right = GAMMA.powi((GOAL - 1 - s) as i32);
        assert!((q[s][1] - right).abs() < 1e-12);
        let left = GAMMA * q[s.saturating_sub(1)][1].max(q[s.saturating_sub(1)][0]);
        assert!((q[s][0] - left).abs() < 1e-12);
    }
}

#[test]
fn ddqn_reaches_tabular_q() {
    let run = train_chain(0, 5000, 0.05);
    assert!(run.max_error < 0.05, "max error {} after {} updates", run.max_error, run.updates);
}
