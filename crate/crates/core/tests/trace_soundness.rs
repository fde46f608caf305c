mod common;

use common::soundness::soundness_case;

#[test]
fn generated_runs_satisfy_their_encodings() {
    let mut transitions = 0;
    for seed in 0..120 {
        transitions += soundness_case(seed).unwrap();
    }
    // The suite is only meaningful if runs actually switch.
    assert!(transitions > 50, "only {transitions} transitions fired");
}
