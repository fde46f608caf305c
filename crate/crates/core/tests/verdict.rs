use ghasmt_core::verdict::{interpret, parse_verdict, BmcAnswer, SolverVerdict};
use proptest::prelude::*;

fn token() -> impl Strategy<Value = Vec<u8>> {
    prop_oneof![
        prop::sample::select(vec!["unsat", "sat", "delta-sat", "unknown", " with delta = ", ":", "[", "]", ",", "\n"])
            .prop_map(|s| s.as_bytes().to_vec()),
        "[a-z_0-9]{1,6}".prop_map(String::into_bytes),
        any::<f64>().prop_map(|x| x.to_string().into_bytes()),
        prop::collection::vec(any::<u8>(), 0..6),
    ]
}

fn output() -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(token(), 0..20).prop_map(|ts| ts.concat())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn every_output_is_classified(out in output(), err in output(), code in prop::option::of(any::<i32>())) {
        let v = parse_verdict(&out, &err, code);
        let _ = v.to_string();
        match (&v, interpret(&v, 3)) {
            (SolverVerdict::Unsat, BmcAnswer::HoldsUpTo(3)) => {}
            (SolverVerdict::DeltaSat { witness, .. }, BmcAnswer::CandidateCounterexample(w)) => {
                prop_assert_eq!(witness, &w);
                for iv in witness.iter().flat_map(|w| w.values()) {
                    prop_assert!(iv.lo <= iv.hi);
                }
            }
            (SolverVerdict::Unknown { .. } | SolverVerdict::Failure { .. }, BmcAnswer::Inconclusive) => {}
            (v, a) => prop_assert!(false, "{v:?} interpreted as {a:?}"),
        }
    }
}

#[test]
fn delta_round_trips() {
    let v = parse_verdict(b"delta-sat with delta = 0.00100000000000000\n", b"", Some(0));
    assert_eq!(v, SolverVerdict::DeltaSat { delta: 0.001, witness: None });
}

#[test]
fn crash_without_output() {
    assert!(matches!(parse_verdict(b"", b"killed", Some(137)), SolverVerdict::Failure { exit_code: Some(137), .. }));
    assert_eq!(interpret(&SolverVerdict::Unsat, 20), BmcAnswer::HoldsUpTo(20));
}
