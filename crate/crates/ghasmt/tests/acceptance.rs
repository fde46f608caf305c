//! Acceptance run: one pass, fail or skip line per criterion. The process
//! exits non-zero when any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use common::hier::compare_hierarchical;
use common::rows::{periodic_row, REACH_ROW};
use common::soundness::soundness_case;
use common::valuation::{random_valuation, SHAPES};
use ghasmt::pipeline::{cmd_check, cmd_translate, RunConfig};
use ghasmt::report::Answer;
use ghasmt::solver::{SolverCommand, SOLVER_ENV};
use ghasmt_core::flatten::flatten_gha;
use ghasmt_core::fr::derive_fr;
use ghasmt_core::parse::{parse_expr, parse_model};
use ghasmt_core::props::{compile_property, negate_for_bmc, parse_properties};
use ghasmt_core::sim::{simulate, SimConfig};
use ghasmt_core::smt::render;
use ghasmt_core::unroll::{unroll, ConstraintSystem};
use ghasmt_core::verdict::{interpret, parse_verdict, SolverVerdict};
use ghasmt_core::{BinaryOp, Expr, Gha};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const ROOT: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../..");

fn path(rel: &str) -> PathBuf {
    Path::new(ROOT).join(rel)
}

fn read(rel: &str) -> String {
    std::fs::read_to_string(path(rel)).unwrap()
}

enum Outcome {
    Pass(String),
    Skip(String),
}

type Check = Result<Outcome, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

/// Orders the operands of `+` so equal sums compare equal.
fn canon(e: &Expr) -> Expr {
    match e {
        Expr::Binary(BinaryOp::Add, a, b) => {
            let (a, b) = (canon(a), canon(b));
            if a.to_prefix() <= b.to_prefix() {
                Expr::binary(BinaryOp::Add, a, b)
            } else {
                Expr::binary(BinaryOp::Add, b, a)
            }
        }
        Expr::Binary(op, a, b) => Expr::binary(*op, canon(a), canon(b)),
        Expr::Unary(op, a) => Expr::unary(*op, canon(a)),
        other => other.clone(),
    }
}

fn same(a: &Expr, b: &str) -> bool {
    canon(a) == canon(&parse_expr(b).unwrap())
}

fn fig1_fidelity() -> Check {
    let start = Instant::now();
    let m = flatten_gha(&parse_model(&read("models/fig1/fig1.gha")).unwrap()).unwrap();
    let flows = derive_fr(&m).map_err(|e| e.to_string())?;
    let (s0, s1) = (&flows[0], &flows[1]);
    ensure(s0.state_name == "S0" && s1.state_name == "S1", || "states".into())?;
    ensure(s0.derivs.len() == 1 && same(&s0.derivs["y1"], "x1 + x2"), || format!("S0 flow {s0}"))?;
    ensure(s0.algebraic.is_empty(), || format!("S0 outputs {s0}"))?;
    ensure(s1.derivs.len() == 1 && same(&s1.derivs["I"], "x1"), || format!("S1 flow {s1}"))?;
    ensure(s1.algebraic.len() == 2, || format!("S1 outputs {s1}"))?;
    ensure(same(&s1.algebraic["y1"], "I") && same(&s1.algebraic["y2"], "x2 + I"), || format!("S1 outputs {s1}"))?;
    let t = &m.transitions[0];
    ensure(t.actions.len() == 1 && t.actions[0].0 == "y1" && same(&t.actions[0].1, "0"), || {
        format!("action {:?}", t.actions)
    })?;
    within(start, Duration::from_secs(1))?;
    Ok(Outcome::Pass("S0 d/dt[y1] = x1 + x2; y1 := 0; S1 d/dt[I] = x1, y1 = I, y2 = x2 + I".into()))
}

const DECAY: &str = "outputs {\n  x\n}\ninitial A\nstate A {\n  vars x\n  block I kind=Integrator init=1\n  block N kind=Gain k=-1\n  block O kind=Outport var=x\n  line I.1 -> O.1, N.1\n  line N.1 -> I.1\n}\n";

fn decay_at(horizon: f64, dt: f64) -> f64 {
    let m = parse_model(DECAY).unwrap();
    let tr = simulate(&m, &BTreeMap::new(), &SimConfig { horizon, dt, ..SimConfig::default() }).unwrap();
    tr.final_value("x").unwrap()
}

fn simulator_accuracy() -> Check {
    let start = Instant::now();
    let err = (decay_at(10.0, 0.01) - (-10f64).exp()).abs();
    ensure(err <= 1e-6, || format!("|x(10) - e^-10| = {err:e}"))?;
    let errs: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|&dt| (decay_at(5.0, dt) - (-5f64).exp()).abs()).collect();
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    ensure(ratios.iter().all(|r| *r >= 8.0), || format!("ratios {ratios:?}"))?;
    within(start, Duration::from_secs(1))?;
    Ok(Outcome::Pass(format!("error {err:.1e}, halving ratios {:.1} {:.1}", ratios[0], ratios[1])))
}

fn trace_soundness() -> Check {
    let start = Instant::now();
    let mut transitions = 0;
    let models = 120;
    for seed in 0..models {
        transitions += soundness_case(seed)?;
    }
    within(start, Duration::from_secs(60))?;
    Ok(Outcome::Pass(format!("{models} models satisfied, {transitions} transitions")))
}

fn golden_emission() -> Check {
    let fig1 = path("models/fig1/fig1.gha");
    let usv = path("models/usv-desk/usv.gha");
    let props = path("models/usv-desk/usv.props");
    for _ in 0..2 {
        let a = cmd_translate(&fig1, None, None, 1, 0.001, 10.0).map_err(|e| e.to_string())?;
        ensure(a == include_str!("golden/fig1_k1.smt2"), || "fig1 k=1 differs from golden".into())?;
        let b = cmd_translate(&usv, Some(&props), Some("R1"), 5, 0.001, 10.0).map_err(|e| e.to_string())?;
        ensure(b == include_str!("golden/usv_desk_k5.smt2"), || "usv-desk k=5 differs from golden".into())?;
    }
    Ok(Outcome::Pass("fig1 k=1 and usv-desk k=5 byte-identical".into()))
}

fn flattening_equivalence() -> Check {
    let mut nested = 0;
    for seed in 0..50 {
        nested += usize::from(compare_hierarchical(seed)?);
    }
    Ok(Outcome::Pass(format!("50 models within 1e-12, {nested} with subsystems")))
}

fn usv() -> Gha {
    parse_model(&read("models/usv-desk/usv.gha")).unwrap()
}

fn usv_system(k: usize) -> ConstraintSystem {
    let m = usv();
    unroll(&m, &derive_fr(&m).unwrap(), k, 10.0).unwrap()
}

fn property_rows() -> Check {
    let file = parse_properties(&read("models/usv-desk/usv.props")).map_err(|e| e.to_string())?;
    let expected = [
        ("R1", REACH_ROW.to_string()),
        ("R3", periodic_row("gps_t", 20, "0.04", "0.06")),
        ("R4", periodic_row("acc_t", 20, "0.02", "0.03")),
    ];
    for (name, row) in expected {
        let mut cs = usv_system(20);
        let req = file.requirement(name).ok_or(format!("no {name}"))?;
        let got = render(&compile_property(&mut cs, &file, req).map_err(|e| e.to_string())?.formula);
        ensure(got == row, || format!("{name}: {got}"))?;
    }
    Ok(Outcome::Pass("R1, R3, R4 at k=20 match".into()))
}

fn negation() -> Check {
    let files = [SHAPES.to_string(), read("models/usv-desk/usv.props")];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut shapes = 0;
    for text in &files {
        let file = parse_properties(text).map_err(|e| e.to_string())?;
        for req in &file.requirements {
            let mut cs = usv_system(4);
            let p = compile_property(&mut cs, &file, req).map_err(|e| e.to_string())?.formula;
            let q = negate_for_bmc(&p);
            for _ in 0..1000 {
                let val = random_valuation(&mut rng, &cs, &file, &req.name);
                let a = p.eval_bool(&val.env()).map_err(|e| e.to_string())?;
                let b = q.eval_bool(&val.env()).map_err(|e| e.to_string())?;
                ensure(a != b, || format!("{}: eval(not p) = eval(p) = {a}", req.name))?;
            }
            shapes += 1;
        }
    }
    Ok(Outcome::Pass(format!("{shapes} shapes x 1000 assignments")))
}

fn end_to_end() -> Check {
    let Some(solver) = std::env::var_os(SOLVER_ENV).filter(|s| !s.is_empty()) else {
        return Ok(Outcome::Skip(format!("{SOLVER_ENV} is not set")));
    };
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cmd = SolverCommand::new(solver);
    cmd.timeout = Duration::from_secs(600);
    let run = |property: &str| {
        let cfg = RunConfig {
            property: Some(property.into()),
            k: 6,
            solver: Some(cmd.clone()),
            ..RunConfig::new(path("models/usv-desk/usv.gha"), path("models/usv-desk/reach.props"), out.path())
        };
        cmd_check(&cfg).map_err(|e| e.to_string()).map(|mut o| o.reports.remove(0))
    };
    // `never reach` negates to the reach itself, so Arrives asks the solver
    // for an arriving run.
    let arrives = run("Arrives")?;
    let too_soon = run("TooSoon")?;
    let timed_out = |r: &ghasmt::report::PropertyReport| r.answer == Answer::Inconclusive && r.verdict.contains("timeout");
    if timed_out(&arrives) || timed_out(&too_soon) {
        return Ok(Outcome::Skip("solver timed out".into()));
    }
    ensure(arrives.answer == Answer::Confirmed, || format!("Arrives: {} ({})", arrives.answer, arrives.verdict))?;
    ensure(too_soon.answer == Answer::HoldsUpTo(6), || format!("TooSoon: {} ({})", too_soon.answer, too_soon.verdict))?;
    Ok(Outcome::Pass("arrival confirmed; deadline below minimum travel time unsat".into()))
}

const FRAGMENTS: [&[u8]; 14] = [
    b"unsat", b"sat", b"delta-sat", b"unknown", b" with delta = ", b"0.001", b"-1e308", b"x_1_t", b" : ",
    b"[", b"]", b", ", b"\n", b"nan",
];

fn fuzz_bytes(rng: &mut ChaCha8Rng) -> Vec<u8> {
    let mut out = Vec::new();
    let pieces = rng.next_u64() % 24;
    for _ in 0..pieces {
        if rng.next_u64() & 1 == 0 {
            out.extend_from_slice(FRAGMENTS[(rng.next_u64() % FRAGMENTS.len() as u64) as usize]);
        } else {
            let n = rng.next_u64() % 8;
            out.extend((0..n).map(|_| rng.next_u64() as u8));
        }
    }
    out
}

fn verdict_fuzz() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut kinds = [0usize; 4];
    for _ in 0..10_000 {
        let stdout = fuzz_bytes(&mut rng);
        let stderr = fuzz_bytes(&mut rng);
        let code = match rng.next_u64() % 3 {
            0 => None,
            1 => Some(0),
            _ => Some(rng.next_u64() as i32),
        };
        let v = parse_verdict(&stdout, &stderr, code);
        let _ = interpret(&v, 20);
        let _ = v.to_string();
        let kind = match &v {
            SolverVerdict::Unsat => 0,
            SolverVerdict::DeltaSat { witness, .. } => {
                for (name, iv) in witness.iter().flatten() {
                    ensure(iv.lo <= iv.hi, || format!("interval for {name} has lo > hi"))?;
                }
                1
            }
            SolverVerdict::Unknown { .. } => 2,
            SolverVerdict::Failure { .. } => 3,
        };
        kinds[kind] += 1;
    }
    Ok(Outcome::Pass(format!(
        "10000 inputs: {} unsat, {} delta-sat, {} unknown, {} failure",
        kinds[0], kinds[1], kinds[2], kinds[3]
    )))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("fig1 fidelity", fig1_fidelity),
        ("simulator accuracy", simulator_accuracy),
        ("trace soundness", trace_soundness),
        ("golden emission", golden_emission),
        ("flattening equivalence", flattening_equivalence),
        ("property compilation", property_rows),
        ("negation", negation),
        ("end to end with solver", end_to_end),
        ("verdict parser fuzz", verdict_fuzz),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(Outcome::Pass(detail)) => println!("criterion {} {name}: pass ({secs:.2} s) {detail}", i + 1),
            Ok(Outcome::Skip(why)) => println!("criterion {} {name}: skip ({why})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({secs:.2} s) {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
