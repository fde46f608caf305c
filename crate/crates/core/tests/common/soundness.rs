//! One case of the trace soundness suite: a generated deterministic model
//! is simulated and its run checked against the k-step encoding.

use std::collections::BTreeMap;

use ghasmt_core::fr::derive_fr;
use ghasmt_core::oracle::check_trace;
use ghasmt_core::parse::parse_model;
use ghasmt_core::sim::{simulate, Input, SimConfig};
use ghasmt_core::unroll::unroll;
use ghasmt_core::validate::{has_errors, validate_model};

use super::Gen;

/// Returns the number of transitions the run fired.
pub fn soundness_case(seed: u64) -> Result<usize, String> {
    let g = Gen::new(seed).flat_model();
    let ctx = |e: &dyn std::fmt::Display| format!("seed {seed}: {e}\n{}", g.text);
    let m = parse_model(&g.text).map_err(|e| ctx(&e))?;
    let diags = validate_model(&m);
    if has_errors(&diags) {
        return Err(ctx(&format!("{diags:?}")));
    }
    let flows = derive_fr(&m).map_err(|e| ctx(&e))?;
    let cs = unroll(&m, &flows, g.k, 10.0).map_err(|e| ctx(&e))?;
    let inputs: BTreeMap<String, Input> = g.inputs.iter().map(|(n, x)| (n.clone(), Input::Constant(*x))).collect();
    let cfg = SimConfig { horizon: 3.0, dt: 1e-3, max_transitions: g.k, ..SimConfig::default() };
    let tr = simulate(&m, &inputs, &cfg).map_err(|e| ctx(&e))?;
    let report = check_trace(&tr, &cs, &[], 1e-4).map_err(|e| ctx(&e))?;
    if !report.satisfied {
        return Err(ctx(&format!("{:?}", report.violations)));
    }
    Ok(tr.events.len())
}
