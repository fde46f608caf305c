//! Reference simulator: fixed-step RK4 per state, bisection on guard
//! crossings, actions applied in order.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::diagram::{CompiledDiagram, DiagramError};
use crate::flatten::{flatten_gha, FlattenError};
use crate::model::{Gha, ParamValue};

/// Crossing times are located to this width.
pub const BISECTION_TOL: f64 = 1e-9;

/// A piecewise-constant input signal.
#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Constant(f64),
    /// `(from, value)` pairs sorted by time; before the first change the
    /// first value holds.
    Piecewise(Vec<(f64, f64)>),
}

impl Input {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            Input::Constant(c) => *c,
            Input::Piecewise(steps) => {
                let mut v = steps.first().map_or(0.0, |s| s.1);
                for &(from, x) in steps {
                    if from <= t {
                        v = x;
                    } else {
                        break;
                    }
                }
                v
            }
        }
    }

    fn check(&self) -> Result<(), String> {
        match self {
            Input::Constant(c) if c.is_finite() => Ok(()),
            Input::Constant(_) => Err("value is not finite".into()),
            Input::Piecewise(steps) => {
                if steps.is_empty() {
                    return Err("empty signal".into());
                }
                if steps.iter().any(|(t, x)| !t.is_finite() || !x.is_finite()) {
                    return Err("signal has non-finite entries".into());
                }
                if steps.windows(2).any(|w| w[0].0 >= w[1].0) {
                    return Err("change times must be strictly increasing".into());
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub horizon: f64,
    pub dt: f64,
    pub max_transitions: usize,
    /// Fire the first enabled transition (model order) instead of failing
    /// when several guards hold together.
    pub choose_first: bool,
    /// Seeds the draw of parameters declared with a range.
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { horizon: 10.0, dt: 1e-3, max_transitions: 200, choose_first: false, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    /// One value per trace column.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub state: String,
    pub t_start: f64,
    pub t_end: f64,
    /// Values on entry, before the state's outputs are recomputed.
    pub entry: Vec<f64>,
    pub samples: Vec<Sample>,
}

impl Segment {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("segments hold at least one sample")
    }

    pub fn dwell(&self) -> f64 {
        self.t_end - self.t_start
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub t: f64,
    /// Index into the model's transition list.
    pub transition: usize,
    pub src: String,
    pub dst: String,
    pub effects: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    /// Inputs and tracked variables, sorted.
    pub columns: Vec<String>,
    /// Values of inputs at time zero and of all parameters.
    pub constants: BTreeMap<String, f64>,
    pub segments: Vec<Segment>,
    pub events: Vec<Event>,
}

impl Trace {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn duration(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.t_end)
    }

    /// Value of `name` at the end of the run.
    pub fn final_value(&self, name: &str) -> Option<f64> {
        let i = self.column(name)?;
        Some(self.segments.last()?.last().values[i])
    }

    /// Value of `name` at time `t`, from the last sample at or before `t`.
    pub fn value_at(&self, name: &str, t: f64) -> Option<f64> {
        let i = self.column(name)?;
        let mut found = None;
        for s in self.segments.iter().flat_map(|g| &g.samples) {
            if s.t <= t {
                found = Some(s.values[i]);
            } else {
                break;
            }
        }
        found
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    Flatten(FlattenError),
    Diagram(DiagramError),
    NoInitialState,
    UnknownState(String),
    MissingInput(String),
    BadInput { name: String, message: String },
    BadConfig(String),
    Eval { what: String, message: String },
    NonFinite { state: String, var: String, t: f64 },
    Nondeterministic { state: String, t: f64, transitions: Vec<usize> },
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::Flatten(e) => write!(f, "{e}"),
            SimError::Diagram(e) => write!(f, "{e}"),
            SimError::NoInitialState => f.write_str("model has no initial state"),
            SimError::UnknownState(s) => write!(f, "unresolved state {s}"),
            SimError::MissingInput(v) => write!(f, "missing input {v}"),
            SimError::BadInput { name, message } => write!(f, "input {name}: {message}"),
            SimError::BadConfig(m) => f.write_str(m),
            SimError::Eval { what, message } => write!(f, "{what}: {message}"),
            SimError::NonFinite { state, var, t } => {
                write!(f, "non-finite value of {var} in state {state} at t = {t}")
            }
            SimError::Nondeterministic { state, t, transitions } => {
                let list: Vec<String> = transitions.iter().map(|i| format!("{}", i + 1)).collect();
                write!(f, "nondeterministic choice in state {state} at t = {t}: transitions {} are enabled", list.join(", "))
            }
        }
    }
}

impl core::error::Error for SimError {}

impl From<DiagramError> for SimError {
    fn from(e: DiagramError) -> Self {
        SimError::Diagram(e)
    }
}

/// Draws a uniform number in `[0, 1)` from 53 random bits.
fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Resolves run constants: inputs at time zero and parameters. Entries of
/// `inputs` that name a parameter override it.
pub fn run_constants(
    m: &Gha,
    inputs: &BTreeMap<String, Input>,
    seed: u64,
) -> Result<BTreeMap<String, f64>, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = BTreeMap::new();
    for name in m.inputs.keys() {
        let sig = inputs.get(name).ok_or_else(|| SimError::MissingInput(name.clone()))?;
        sig.check().map_err(|message| SimError::BadInput { name: name.clone(), message })?;
        out.insert(name.clone(), sig.at(0.0));
    }
    for (name, p) in &m.params {
        // Draw even when overridden so the stream does not depend on overrides.
        let drawn = match p {
            ParamValue::Fixed(x) => *x,
            ParamValue::Range(r) => r.lo + unit(&mut rng) * (r.hi - r.lo),
        };
        let x = match inputs.get(name) {
            Some(Input::Constant(x)) if x.is_finite() => *x,
            Some(_) => {
                return Err(SimError::BadInput { name: name.clone(), message: "parameters take one finite value".into() })
            }
            None => drawn,
        };
        out.insert(name.clone(), x);
    }
    Ok(out)
}

struct Runner {
    m: Gha,
    diagrams: BTreeMap<String, CompiledDiagram>,
    /// Variables integrated in each state, sorted.
    state_vars: BTreeMap<String, Vec<usize>>,
    index: BTreeMap<String, usize>,
    columns: Vec<String>,
    vals: Vec<f64>,
    signals: Vec<(usize, Input)>,
    choose_first: bool,
}

impl Runner {
    fn new(m: &Gha, inputs: &BTreeMap<String, Input>, seed: u64, choose_first: bool) -> Result<Self, SimError> {
        let flat = flatten_gha(m).map_err(SimError::Flatten)?;
        let constants = run_constants(&flat, inputs, seed)?;
        let tracked = flat.tracked_vars();
        let cols: BTreeSet<String> = flat.inputs.keys().cloned().chain(tracked.iter().cloned()).collect();
        let columns: Vec<String> = cols.into_iter().collect();
        let mut index = BTreeMap::new();
        let mut vals = Vec::new();
        let init = flat.initial_values();
        for c in &columns {
            index.insert(c.clone(), vals.len());
            vals.push(constants.get(c).or_else(|| init.get(c)).copied().unwrap_or(0.0));
        }
        for p in flat.params.keys() {
            index.insert(p.clone(), vals.len());
            vals.push(constants[p]);
        }
        let mut diagrams = BTreeMap::new();
        let mut state_vars = BTreeMap::new();
        for s in &flat.states {
            diagrams.insert(s.name.clone(), CompiledDiagram::new(s)?);
            let vars: BTreeSet<String> = s.integrator_vars().into_values().collect();
            state_vars.insert(s.name.clone(), vars.iter().map(|v| index[v]).collect());
        }
        let signals = flat.inputs.keys().map(|n| (index[n], inputs[n].clone())).collect();
        Ok(Runner { m: flat, diagrams, state_vars, index, columns, vals, signals, choose_first })
    }

    fn constants(&self) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        for n in self.m.inputs.keys().chain(self.m.params.keys()) {
            out.insert(n.clone(), self.vals[self.index[n]]);
        }
        out
    }

    fn set_inputs(&self, vals: &mut [f64], t: f64) {
        for (i, sig) in &self.signals {
            vals[*i] = sig.at(t);
        }
    }

    fn diagram(&self, state: &str) -> Result<&CompiledDiagram, SimError> {
        self.diagrams.get(state).ok_or_else(|| SimError::UnknownState(state.into()))
    }

    fn lookup<'a>(&'a self, vals: &'a [f64]) -> impl Fn(&str) -> Option<f64> + 'a {
        move |n: &str| self.index.get(n).map(|&i| vals[i])
    }

    /// Recomputes the values the state's out-ports write.
    fn algebraic(&self, state: &str, vals: &mut [f64], t: f64) -> Result<(), SimError> {
        let ev = self.diagram(state)?.eval(&self.lookup(vals))?;
        for (v, x) in ev.outports {
            if !x.is_finite() {
                return Err(SimError::NonFinite { state: state.into(), var: v, t });
            }
            if let Some(&i) = self.index.get(&v) {
                vals[i] = x;
            }
        }
        Ok(())
    }

    fn derivs(&self, state: &str, vals: &[f64], t: f64) -> Result<Vec<f64>, SimError> {
        let ev = self.diagram(state)?.eval(&self.lookup(vals))?;
        let mut out = Vec::new();
        for &i in &self.state_vars[state] {
            let x = ev.derivs.get(&self.columns[i]).copied().unwrap_or(0.0);
            if !x.is_finite() {
                return Err(SimError::NonFinite { state: state.into(), var: format!("d/dt[{}]", self.columns[i]), t });
            }
            out.push(x);
        }
        Ok(out)
    }

    /// One classical RK4 step of size `h` from `t`, then the out-ports.
    fn rk4(&self, state: &str, vals: &mut [f64], t: f64, h: f64) -> Result<(), SimError> {
        let idx = &self.state_vars[state];
        let y0: Vec<f64> = idx.iter().map(|&i| vals[i]).collect();
        let mut scratch = vals.to_vec();
        let stage = |scratch: &mut Vec<f64>, ts: f64, y: &[f64]| -> Result<Vec<f64>, SimError> {
            for (j, &i) in idx.iter().enumerate() {
                scratch[i] = y[j];
            }
            self.set_inputs(scratch, ts);
            self.derivs(state, scratch, ts)
        };
        let k1 = stage(&mut scratch, t, &y0)?;
        let y: Vec<f64> = y0.iter().zip(&k1).map(|(y, k)| y + h / 2.0 * k).collect();
        let k2 = stage(&mut scratch, t + h / 2.0, &y)?;
        let y: Vec<f64> = y0.iter().zip(&k2).map(|(y, k)| y + h / 2.0 * k).collect();
        let k3 = stage(&mut scratch, t + h / 2.0, &y)?;
        let y: Vec<f64> = y0.iter().zip(&k3).map(|(y, k)| y + h * k).collect();
        let k4 = stage(&mut scratch, t + h, &y)?;
        for (j, &i) in idx.iter().enumerate() {
            let x = y0[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            if !x.is_finite() {
                return Err(SimError::NonFinite { state: state.into(), var: self.columns[i].clone(), t: t + h });
            }
            vals[i] = x;
        }
        self.set_inputs(vals, t + h);
        self.algebraic(state, vals, t + h)
    }

    /// Outgoing transitions of `state` whose guard holds, in model order.
    fn enabled(&self, state: &str, vals: &[f64]) -> Result<Vec<usize>, SimError> {
        let env = self.lookup(vals);
        let mut out = Vec::new();
        for (i, tr) in self.m.transitions.iter().enumerate() {
            if tr.src != state {
                continue;
            }
            let holds = tr.cond.eval_bool(&|v: &String| env(v)).map_err(|e| SimError::Eval {
                what: format!("guard of transition {}", i + 1),
                message: e.to_string(),
            })?;
            if holds {
                out.push(i);
            }
        }
        Ok(out)
    }

    /// Residual of each outgoing guard of `state`; zero means it holds.
    fn guard_residuals(&self, state: &str, vals: &[f64]) -> Result<Vec<(usize, f64)>, SimError> {
        let env = self.lookup(vals);
        let mut out = Vec::new();
        for (i, tr) in self.m.transitions.iter().enumerate() {
            if tr.src == state {
                let r = tr.cond.residual(&|v: &String| env(v)).map_err(|e| SimError::Eval {
                    what: format!("guard of transition {}", i + 1),
                    message: e.to_string(),
                })?;
                out.push((i, r));
            }
        }
        Ok(out)
    }

    fn pick(&self, state: &str, t: f64, enabled: Vec<usize>) -> Result<usize, SimError> {
        if enabled.len() > 1 && !self.choose_first {
            return Err(SimError::Nondeterministic { state: state.into(), t, transitions: enabled });
        }
        Ok(enabled[0])
    }

    fn fire(&self, tr: usize, vals: &mut [f64], t: f64) -> Result<Event, SimError> {
        let transition = &self.m.transitions[tr];
        let mut effects = Vec::new();
        for (target, e) in &transition.actions {
            let x = e.eval_real(&|v: &String| self.index.get(v).map(|&i| vals[i])).map_err(|err| SimError::Eval {
                what: format!("action `{target}` of transition {}", tr + 1),
                message: err.to_string(),
            })?;
            if !x.is_finite() {
                return Err(SimError::NonFinite { state: transition.src.clone(), var: target.clone(), t });
            }
            let i = *self.index.get(target).ok_or_else(|| SimError::Eval {
                what: format!("transition {}", tr + 1),
                message: format!("action on undeclared variable `{target}`"),
            })?;
            vals[i] = x;
            effects.push((target.clone(), x));
        }
        Ok(Event { t, transition: tr, src: transition.src.clone(), dst: transition.dst.clone(), effects })
    }

    fn sample(&self, t: f64, vals: &[f64]) -> Sample {
        Sample { t, values: vals[..self.columns.len()].to_vec() }
    }

    /// Opens a segment: records entry values and recomputes the out-ports.
    fn open(&self, state: &str, vals: &mut [f64], t: f64) -> Result<Segment, SimError> {
        let entry = vals[..self.columns.len()].to_vec();
        self.set_inputs(vals, t);
        self.algebraic(state, vals, t)?;
        Ok(Segment { state: state.into(), t_start: t, t_end: t, entry, samples: alloc::vec![self.sample(t, vals)] })
    }

    fn trace(&self, segments: Vec<Segment>, events: Vec<Event>) -> Trace {
        Trace { columns: self.columns.clone(), constants: self.constants(), segments, events }
    }
}

fn check_config(cfg: &SimConfig) -> Result<(), SimError> {
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return Err(SimError::BadConfig(format!("time step must be positive, got {}", cfg.dt)));
    }
    if !(cfg.horizon >= 0.0 && cfg.horizon.is_finite()) {
        return Err(SimError::BadConfig(format!("horizon must be finite and non-negative, got {}", cfg.horizon)));
    }
    Ok(())
}

/// Simulates `m` from its initial state, firing transitions as soon as a
/// guard holds.
pub fn simulate(m: &Gha, inputs: &BTreeMap<String, Input>, cfg: &SimConfig) -> Result<Trace, SimError> {
    check_config(cfg)?;
    let r = Runner::new(m, inputs, cfg.seed, cfg.choose_first)?;
    let mut state = r.m.initial.clone().ok_or(SimError::NoInitialState)?;
    let mut vals = r.vals.clone();
    let mut segments = Vec::new();
    let mut events = Vec::new();
    let mut t = 0.0;
    loop {
        let mut seg = r.open(&state, &mut vals, t)?;
        let mut next = None;
        let enabled = r.enabled(&state, &vals)?;
        if !enabled.is_empty() {
            next = Some(r.pick(&state, t, enabled)?);
        } else {
            let t0 = t;
            let mut n = 0u64;
            while t < cfg.horizon {
                n += 1;
                let t_new = (t0 + n as f64 * cfg.dt).min(cfg.horizon);
                let h = t_new - t;
                let saved = vals.clone();
                r.rk4(&state, &mut vals, t, h)?;
                if r.enabled(&state, &vals)?.is_empty() {
                    t = t_new;
                    seg.samples.push(r.sample(t, &vals));
                    continue;
                }
                let (mut lo, mut hi) = (0.0, h);
                let mut at_hi = core::mem::take(&mut vals);
                while hi - lo > BISECTION_TOL {
                    let mid = lo + (hi - lo) / 2.0;
                    let mut probe = saved.clone();
                    r.rk4(&state, &mut probe, t, mid)?;
                    if r.enabled(&state, &probe)?.is_empty() {
                        lo = mid;
                    } else {
                        hi = mid;
                        at_hi = probe;
                    }
                }
                vals = at_hi;
                t += hi;
                seg.samples.push(r.sample(t, &vals));
                next = Some(r.pick(&state, t, r.enabled(&state, &vals)?)?);
                break;
            }
        }
        seg.t_end = t;
        segments.push(seg);
        let Some(tr) = next else { break };
        let ev = r.fire(tr, &mut vals, t)?;
        state = ev.dst.clone();
        events.push(ev);
        if events.len() >= cfg.max_transitions {
            let seg = r.open(&state, &mut vals, t)?;
            segments.push(seg);
            break;
        }
    }
    Ok(r.trace(segments, events))
}

/// Why a scheduled replay could not follow its mode sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum ReplayError {
    Sim(SimError),
    /// After `step`, no transition to the scheduled next mode is enabled;
    /// `residual` is the smallest guard residual among the candidates.
    Diverged { step: usize, from: String, to: String, residual: f64 },
}

impl fmt::Display for ReplayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReplayError::Sim(e) => write!(f, "{e}"),
            ReplayError::Diverged { step, from, to, residual } => {
                write!(f, "step {step}: no enabled transition from {from} to {to} (guard residual {residual})")
            }
        }
    }
}

impl From<SimError> for ReplayError {
    fn from(e: SimError) -> Self {
        ReplayError::Sim(e)
    }
}

/// Replays a fixed schedule: `modes[i]` is held for `dwells[i]`, then the
/// run moves to `modes[i + 1]` through a transition whose guard holds within
/// `tol`, or stays by stuttering. Produces one segment per step plus a
/// terminal segment for the last mode.
pub fn replay(
    m: &Gha,
    inputs: &BTreeMap<String, Input>,
    modes: &[String],
    dwells: &[f64],
    dt: f64,
    tol: f64,
) -> Result<Trace, ReplayError> {
    check_config(&SimConfig { dt, ..SimConfig::default() })?;
    if modes.len() != dwells.len() + 1 {
        return Err(SimError::BadConfig(format!("{} modes for {} dwells", modes.len(), dwells.len())).into());
    }
    let r = Runner::new(m, inputs, 0, true)?;
    let initial = r.m.initial.clone().ok_or(SimError::NoInitialState)?;
    if modes[0] != initial {
        return Err(ReplayError::Diverged { step: 0, from: initial, to: modes[0].clone(), residual: f64::INFINITY });
    }
    let mut vals = r.vals.clone();
    let mut segments = Vec::new();
    let mut events = Vec::new();
    let mut t = 0.0;
    for (i, &d) in dwells.iter().enumerate() {
        let state = &modes[i];
        if !(d >= 0.0 && d.is_finite()) {
            return Err(SimError::BadConfig(format!("dwell {} is not a finite non-negative number", i + 1)).into());
        }
        let mut seg = r.open(state, &mut vals, t)?;
        let steps = libm::ceil(d / dt).max(1.0) as u64;
        let t0 = t;
        if d > 0.0 {
            for n in 1..=steps {
                let t_new = if n == steps { t0 + d } else { t0 + n as f64 * d / steps as f64 };
                r.rk4(state, &mut vals, t, t_new - t)?;
                t = t_new;
                seg.samples.push(r.sample(t, &vals));
            }
        }
        seg.t_end = t;
        segments.push(seg);
        let next = &modes[i + 1];
        let mut candidates: Vec<(usize, f64)> = r
            .guard_residuals(state, &vals)?
            .into_iter()
            .filter(|(tr, _)| &r.m.transitions[*tr].dst == next)
            .collect();
        candidates.sort_by(|a, b| a.1.total_cmp(&b.1));
        match candidates.first() {
            Some(&(tr, res)) if res <= tol => events.push(r.fire(tr, &mut vals, t)?),
            _ if next == state => {}
            best => {
                return Err(ReplayError::Diverged {
                    step: i + 1,
                    from: state.clone(),
                    to: next.clone(),
                    residual: best.map_or(f64::INFINITY, |c| c.1),
                })
            }
        }
    }
    let seg = r.open(modes.last().expect("at least one mode"), &mut vals, t)?;
    segments.push(seg);
    Ok(r.trace(segments, events))
}
