mod common;

use std::collections::BTreeMap;

use common::rows::{periodic_row, REACH_ROW};
use common::valuation::{random_valuation, SHAPES};

use ghasmt_core::fr::derive_fr;
use ghasmt_core::oracle::{monitor_valuation, trace_steps};
use ghasmt_core::parse::parse_model;
use ghasmt_core::props::{clocks_used, compile_property, negate_for_bmc, parse_properties};
use ghasmt_core::sim::{simulate, Input, SimConfig};
use ghasmt_core::smt::render;
use ghasmt_core::unroll::{unroll, ConstraintSystem};
use ghasmt_core::Gha;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

const USV: &str = include_str!("../../../models/usv-desk/usv.gha");
const USV_PROPS: &str = include_str!("../../../models/usv-desk/usv.props");

fn usv() -> Gha {
    parse_model(USV).unwrap()
}

fn usv_system(k: usize) -> ConstraintSystem {
    let m = usv();
    unroll(&m, &derive_fr(&m).unwrap(), k, 10.0).unwrap()
}

fn compiled(name: &str, k: usize) -> String {
    let file = parse_properties(USV_PROPS).unwrap();
    let mut cs = usv_system(k);
    let req = file.requirement(name).unwrap();
    render(&compile_property(&mut cs, &file, req).unwrap().formula)
}

#[test]
fn reach_row() {
    assert_eq!(compiled("R1", 20), REACH_ROW);
}

#[test]
fn periodic_rows() {
    assert_eq!(compiled("R3", 20), periodic_row("gps_t", 20, "0.04", "0.06"));
    assert_eq!(compiled("R4", 20), periodic_row("acc_t", 20, "0.02", "0.03"));
}

#[test]
fn response_row() {
    let mut parts = Vec::new();
    for i in 1..=20 {
        parts.push(format!(
            "(or (not (> hError_{i}_t 0.01)) (and (= dec_{}_0 1.0) (<= reactT_{i}_t 0.5)))",
            i + 1
        ));
    }
    assert_eq!(compiled("R2", 20), format!("(and {})", parts.join(" ")));
}

#[test]
fn negation_is_exact() {
    let file = parse_properties(SHAPES).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for req in &file.requirements {
        let mut cs = usv_system(4);
        let p = compile_property(&mut cs, &file, req).unwrap().formula;
        let q = negate_for_bmc(&p);
        let (mut holds, mut fails) = (0, 0);
        for _ in 0..1000 {
            let val = random_valuation(&mut rng, &cs, &file, &req.name);
            let a = p.eval_bool(&val.env()).unwrap();
            let b = q.eval_bool(&val.env()).unwrap();
            assert_eq!(b, !a, "{}", req.name);
            if a {
                holds += 1;
            } else {
                fails += 1;
            }
        }
        assert!(holds > 0 && fails > 0, "{}: {holds} hold, {fails} fail", req.name);
    }
}

#[test]
fn compiled_formulas_agree_with_the_monitor() {
    let file = parse_properties(SHAPES).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for req in &file.requirements {
        let mut cs = usv_system(4);
        let p = compile_property(&mut cs, &file, req).unwrap().formula;
        for _ in 0..300 {
            let val = random_valuation(&mut rng, &cs, &file, &req.name);
            assert_eq!(
                p.eval_bool(&val.env()).unwrap(),
                monitor_valuation(&cs, &val, &file, req).unwrap(),
                "{}",
                req.name
            );
        }
    }
}

#[test]
fn compiled_formulas_agree_with_the_monitor_on_runs() {
    let files = [parse_properties(SHAPES).unwrap(), parse_properties(USV_PROPS).unwrap()];
    let m = usv();
    for (run, horizon) in [2.0, 8.0, 14.0, 20.0].into_iter().enumerate() {
        let inputs = BTreeMap::from([("wind".to_string(), Input::Constant(0.05 * run as f64))]);
        let tr = simulate(&m, &inputs, &SimConfig { horizon, dt: 1e-2, ..SimConfig::default() }).unwrap();
        for (file, req) in files.iter().flat_map(|f| f.requirements.iter().map(move |r| (f, r))) {
            let mut cs = usv_system(5);
            let p = compile_property(&mut cs, file, req).unwrap().formula;
            let val = trace_steps(&tr, &cs, &clocks_used(file, req)).unwrap();
            assert_eq!(
                p.eval_bool(&val.env()).unwrap(),
                monitor_valuation(&cs, &val, file, req).unwrap(),
                "{} on run {run}",
                req.name
            );
        }
    }
}
