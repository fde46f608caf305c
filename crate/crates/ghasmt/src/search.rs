//! Simulation-based falsification, used when no solver is configured.
//!
//! Each trial fixes the run constants (midpoints, then range corners, then
//! seeded random draws), simulates, and cuts the run at every transition, at
//! its end and at evenly spaced instants. A cut whose prefix fits in `k`
//! steps, violates the requirement and satisfies the encoding is returned.

use std::collections::{BTreeMap, BTreeSet};

use ghasmt_core::oracle::{check_valuation, monitor_valuation, trace_steps};
use ghasmt_core::props::{clocks_used, PropertyFile, Requirement};
use ghasmt_core::sim::{simulate, Input, Sample, SimConfig, Trace};
use ghasmt_core::unroll::ConstraintSystem;
use ghasmt_core::{Gha, ParamValue};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub trials: usize,
    pub seed: u64,
    pub horizon: f64,
    pub dt: f64,
    pub dwell_max: f64,
    pub choose_first: bool,
    /// Residual allowed when checking a candidate against the encoding.
    pub eps: f64,
    /// Evenly spaced cuts per run, on top of transition times.
    pub cuts: usize,
}

#[derive(Debug, Clone)]
pub struct Candidate {
    pub trial: usize,
    /// Values fixed for inputs and ranged parameters.
    pub constants: BTreeMap<String, f64>,
    /// The violating prefix, split into steps of at most `dwell_max`.
    pub trace: Trace,
}

#[derive(Debug, Clone)]
pub enum SearchOutcome {
    Found(Box<Candidate>),
    Exhausted { trials: usize },
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Run constants for one trial. Values in `given` are kept as they are.
fn trial_inputs(
    m: &Gha,
    given: &BTreeMap<String, Input>,
    trial: usize,
    rng: &mut ChaCha8Rng,
) -> Result<BTreeMap<String, Input>, String> {
    let mut out = given.clone();
    let ranges = m
        .inputs
        .iter()
        .map(|(n, r)| (n, r.ok_or_else(|| format!("input {n} has no range; give its value in an inputs file"))))
        .chain(m.params.iter().filter_map(|(n, p)| match p {
            ParamValue::Range(r) => Some((n, Ok(*r))),
            ParamValue::Fixed(_) => None,
        }));
    for (name, r) in ranges {
        if given.contains_key(name) {
            continue;
        }
        let r = r?;
        let x = match trial {
            0 => 0.5 * (r.lo + r.hi),
            1 => r.lo,
            2 => r.hi,
            _ => r.lo + unit(rng) * (r.hi - r.lo),
        };
        out.insert(name.clone(), Input::Constant(x));
    }
    Ok(out)
}

/// The part of `tr` up to time `t`, cut at the last sample not after `t`.
pub fn prefix(tr: &Trace, t: f64) -> Trace {
    let mut out = Trace { segments: Vec::new(), events: Vec::new(), ..tr.clone() };
    for seg in tr.segments.iter().filter(|s| s.t_start <= t) {
        let mut s = seg.clone();
        s.samples.retain(|p| p.t <= t);
        if s.samples.is_empty() {
            s.samples.push(seg.samples[0].clone());
        }
        s.t_end = s.last().t;
        out.segments.push(s);
    }
    out.events = tr.events.iter().filter(|e| e.t <= t).cloned().collect();
    out
}

/// Splits segments longer than `dwell_max` at sample boundaries, so each
/// piece is one step. Pieces after the first are stutter steps.
pub fn split_long_segments(tr: &Trace, dwell_max: f64) -> Trace {
    let mut out = Trace { segments: Vec::new(), ..tr.clone() };
    for seg in &tr.segments {
        let mut piece = seg.clone();
        piece.samples = vec![seg.samples[0].clone()];
        for s in &seg.samples[1..] {
            let start = piece.samples[0].t;
            if s.t - start > dwell_max && piece.samples.len() > 1 {
                let boundary: Sample = piece.last().clone();
                piece.t_end = boundary.t;
                let next = ghasmt_core::sim::Segment {
                    state: seg.state.clone(),
                    t_start: boundary.t,
                    t_end: boundary.t,
                    entry: boundary.values.clone(),
                    samples: vec![boundary],
                };
                out.segments.push(std::mem::replace(&mut piece, next));
            }
            piece.samples.push(s.clone());
        }
        piece.t_end = seg.t_end;
        out.segments.push(piece);
    }
    out
}

fn cut_times(tr: &Trace, cuts: usize) -> Vec<f64> {
    let end = tr.duration();
    let mut ts: Vec<f64> = tr.events.iter().map(|e| e.t).collect();
    ts.extend((1..=cuts).map(|j| end * j as f64 / cuts as f64));
    ts.push(end);
    let set: BTreeSet<u64> = ts.iter().map(|t| t.to_bits()).collect();
    let mut ts: Vec<f64> = set.into_iter().map(f64::from_bits).collect();
    ts.sort_by(f64::total_cmp);
    ts
}

/// Looks for a run prefix violating `req`. `cs` must already carry the
/// requirement's monitor clocks.
pub fn falsify(
    m: &Gha,
    cs: &ConstraintSystem,
    file: &PropertyFile,
    req: &Requirement,
    given: &BTreeMap<String, Input>,
    cfg: &SearchConfig,
) -> Result<SearchOutcome, String> {
    let clocks = clocks_used(file, req);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for trial in 0..cfg.trials {
        let inputs = trial_inputs(m, given, trial, &mut rng)?;
        let sim_cfg = SimConfig {
            horizon: cfg.horizon,
            dt: cfg.dt,
            max_transitions: cs.k,
            choose_first: cfg.choose_first,
            seed: cfg.seed.wrapping_add(trial as u64),
        };
        let tr = simulate(m, &inputs, &sim_cfg).map_err(|e| e.to_string())?;
        for t in cut_times(&tr, cfg.cuts) {
            let p = split_long_segments(&prefix(&tr, t), cfg.dwell_max);
            if p.segments.len() > cs.k + 1 {
                break;
            }
            let val = trace_steps(&p, cs, &clocks).map_err(|e| e.to_string())?;
            if monitor_valuation(cs, &val, file, req).map_err(|e| e.to_string())? {
                continue;
            }
            if check_valuation(cs, &val, cfg.eps).map_err(|e| e.to_string())?.satisfied {
                let constants = p.constants.clone();
                return Ok(SearchOutcome::Found(Box::new(Candidate { trial, constants, trace: p })));
            }
        }
    }
    Ok(SearchOutcome::Exhausted { trials: cfg.trials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ghasmt_core::parse::parse_model;

    fn decay() -> Trace {
        let m = parse_model(
            "outputs {\n  x\n}\ninitial A\nstate A {\n  vars x\n  block I kind=Integrator init=1\n  block N kind=Gain k=-1\n  block O kind=Outport var=x\n  line I.1 -> O.1, N.1\n  line N.1 -> I.1\n}\n",
        )
        .unwrap();
        simulate(&m, &BTreeMap::new(), &SimConfig { horizon: 1.0, dt: 0.1, ..SimConfig::default() }).unwrap()
    }

    #[test]
    fn prefixes_end_on_samples() {
        let tr = decay();
        let p = prefix(&tr, 0.45);
        assert_eq!(p.segments.len(), 1);
        assert!((p.duration() - 0.4).abs() < 1e-12);
        assert_eq!(prefix(&tr, 1.0), tr);
    }

    #[test]
    fn long_segments_become_stutter_steps() {
        let tr = decay();
        let s = split_long_segments(&tr, 0.25);
        let bounds: Vec<(f64, f64)> = s.segments.iter().map(|g| (g.t_start, g.t_end)).collect();
        assert_eq!(s.segments.len(), 5, "{bounds:?}");
        for w in s.segments.windows(2) {
            assert_eq!(w[0].t_end, w[1].t_start);
            assert_eq!(w[0].last().values, w[1].entry);
        }
        assert!(s.segments.iter().all(|g| g.dwell() <= 0.25 + 1e-12));
        assert_eq!(split_long_segments(&tr, 5.0), tr);
    }
}
