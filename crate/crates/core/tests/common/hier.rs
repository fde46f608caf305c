//! Reference simulation of hierarchical models without flattening.

use std::collections::BTreeMap;

use ghasmt_core::model::{BlockKind, Diagram, Param};
use ghasmt_core::parse::parse_model;
use ghasmt_core::sim::{simulate, Input, SimConfig};
use ghasmt_core::Gha;

use super::Gen;

/// Evaluates the output `port` of block `id` in a hierarchical diagram.
/// `outer` holds the values feeding the enclosing subsystem's in-ports.
fn output(d: &Diagram, id: &str, port: usize, env: &BTreeMap<String, f64>, outer: &[f64]) -> f64 {
    let b = d.block(id).unwrap();
    let num = |key: &str| match &b.params[key] {
        Param::Num(x) => *x,
        Param::Sym(s) => env[s],
    };
    if b.kind == BlockKind::Integrator {
        return env["y1"];
    }
    let ins: Vec<f64> = (1..=b.in_arity()).map(|p| input(d, id, p, env, outer)).collect();
    match b.kind {
        BlockKind::Inport => match b.params.get("var") {
            Some(Param::Sym(v)) => env[v],
            _ => outer[num("port") as usize - 1],
        },
        BlockKind::Constant => num("value"),
        BlockKind::Gain => num("k") * ins[0],
        BlockKind::Sum => {
            let mut acc = 0.0;
            for (c, x) in b.signs().chars().zip(&ins) {
                acc = if c == '-' { acc - x } else { acc + x };
            }
            acc
        }
        BlockKind::Saturation => ins[0].clamp(num("lower"), num("upper")),
        BlockKind::Trigonometry => match b.sym("fn") {
            Some("sin") => ins[0].sin(),
            _ => ins[0].cos(),
        },
        BlockKind::Subsystem => {
            let inner = b.inner.as_ref().unwrap();
            let shell = inner
                .blocks
                .iter()
                .find(|s| s.kind == BlockKind::Outport && s.num("port") == Some(port as f64))
                .unwrap();
            input(inner, &shell.id, 1, env, &ins)
        }
        other => panic!("no evaluator for {other:?}"),
    }
}

fn input(d: &Diagram, id: &str, port: usize, env: &BTreeMap<String, f64>, outer: &[f64]) -> f64 {
    let l = d.lines.iter().find(|l| l.dsts.iter().any(|p| p.block == id && p.port == port)).unwrap();
    output(d, &l.src.block, l.src.port, env, outer)
}

/// Simulates the single-state hierarchical model without flattening it,
/// with the same RK4 scheme as the simulator. Returns `(t, y1, y2)` samples.
fn simulate_hierarchical(m: &Gha, u1: f64, horizon: f64, dt: f64) -> Vec<(f64, f64, f64)> {
    let s = &m.states[0];
    let d = &s.body;
    let mut env = BTreeMap::from([("u1".to_string(), u1), ("p".to_string(), 0.0)]);
    if let Some(ghasmt_core::ParamValue::Fixed(p)) = m.params.get("p") {
        env.insert("p".into(), *p);
    }
    env.insert("y1".into(), d.block("Int").unwrap().num("init").unwrap());
    env.insert("y2".into(), m.inits["y2"]);
    let f = |env: &BTreeMap<String, f64>, y: f64| {
        let mut e = env.clone();
        e.insert("y1".into(), y);
        input(d, "Int", 1, &e, &[])
    };
    let y2 = |env: &BTreeMap<String, f64>| match d.block("Out2") {
        Some(_) => input(d, "Out2", 1, env, &[]),
        None => env["y2"],
    };
    let mut out = Vec::new();
    let first = y2(&env);
    env.insert("y2".into(), first);
    out.push((0.0, env["y1"], first));
    let mut t = 0.0;
    let mut n = 0u64;
    while t < horizon {
        n += 1;
        let t_new = (n as f64 * dt).min(horizon);
        let h = t_new - t;
        let y0 = env["y1"];
        let k1 = f(&env, y0);
        let k2 = f(&env, y0 + h / 2.0 * k1);
        let k3 = f(&env, y0 + h / 2.0 * k2);
        let k4 = f(&env, y0 + h * k3);
        env.insert("y1".into(), y0 + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
        let v2 = y2(&env);
        env.insert("y2".into(), v2);
        t = t_new;
        out.push((t, env["y1"], v2));
    }
    out
}

/// Compares the simulator with the hierarchical reference on one generated
/// model over 2 s. Returns whether the model had subsystems.
pub fn compare_hierarchical(seed: u64) -> Result<bool, String> {
    let g = Gen::new(1000 + seed).hierarchical_model(3);
    let m = parse_model(&g.text).map_err(|e| format!("seed {seed}: {e}\n{}", g.text))?;
    let nested = m.states[0].body.has_subsystems();
    let u1 = g.inputs["u1"];
    let expected = simulate_hierarchical(&m, u1, 2.0, 1e-2);
    let inputs = BTreeMap::from([("u1".to_string(), Input::Constant(u1))]);
    let tr = simulate(&m, &inputs, &SimConfig { horizon: 2.0, dt: 1e-2, ..SimConfig::default() })
        .map_err(|e| format!("seed {seed}: {e}"))?;
    let samples = &tr.segments[0].samples;
    if samples.len() != expected.len() {
        return Err(format!("seed {seed}: {} samples, expected {}", samples.len(), expected.len()));
    }
    let (c1, c2) = (tr.column("y1").unwrap(), tr.column("y2").unwrap());
    for (s, (t, y1, y2)) in samples.iter().zip(&expected) {
        if s.t != *t || (s.values[c1] - y1).abs() > 1e-12 || (s.values[c2] - y2).abs() > 1e-12 {
            return Err(format!("seed {seed} t={t}: ({}, {}) vs ({y1}, {y2})", s.values[c1], s.values[c2]));
        }
    }
    Ok(nested)
}
