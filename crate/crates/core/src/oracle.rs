//! Checks simulated traces against constraint systems and properties, and
//! replays solver witnesses.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::expr::Expr;
use crate::model::Gha;
use crate::props::{
    compile_property, negate_for_bmc, MonitorClock, MonitorKind, PropError, PropertyFile, Requirement,
    TimingConstraint, REACTION_CLOCK,
};
use crate::sim::{replay, Input, ReplayError, Trace};
use crate::unroll::{Assertion, Body, ConstDecl, ConstraintSystem, StepVar};
use crate::model::ParamValue;
use crate::verdict::Witness;

/// Integration step used when re-integrating a flow over a step's dwell.
pub const CHECK_DT: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    /// More segments than the system has steps.
    Arity { segments: usize, k: usize },
    MissingColumn(String),
    MissingMonitor(String),
    UnknownState(String),
    Eval { what: String, message: String },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::Arity { segments, k } => {
                write!(f, "trace has {segments} segments but the system has {} steps", k + 1)
            }
            OracleError::MissingColumn(v) => write!(f, "trace has no column for {v}"),
            OracleError::MissingMonitor(c) => write!(f, "no definition for monitor clock {c}"),
            OracleError::UnknownState(s) => write!(f, "unresolved state {s}"),
            OracleError::Eval { what, message } => write!(f, "{what}: {message}"),
        }
    }
}

impl core::error::Error for OracleError {}

/// Values for the step variables of a constraint system.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepValuation {
    pub values: BTreeMap<StepVar, f64>,
}

impl StepValuation {
    pub fn get(&self, sv: &StepVar) -> Option<f64> {
        self.values.get(sv).copied()
    }

    pub fn set(&mut self, sv: StepVar, x: f64) {
        self.values.insert(sv, x);
    }

    pub fn env(&self) -> impl Fn(&StepVar) -> Option<f64> + '_ {
        move |sv| self.get(sv)
    }
}

fn eval_err(what: impl Into<String>) -> impl FnOnce(crate::expr::EvalError) -> OracleError {
    let what = what.into();
    move |e| OracleError::Eval { what, message: e.to_string() }
}

/// Maps a trace onto step variables: segment `j` becomes step `j + 1`. A
/// trace shorter than the bound is padded with zero-length stutter steps.
/// `clocks` defines the system's monitor clocks.
pub fn trace_steps(tr: &Trace, cs: &ConstraintSystem, clocks: &[MonitorClock]) -> Result<StepValuation, OracleError> {
    let k = cs.k;
    let n = tr.segments.len();
    if n > k + 1 {
        return Err(OracleError::Arity { segments: n, k });
    }
    let mut val = StepValuation::default();
    for name in cs.constants.keys() {
        let x = tr.constants.get(name).ok_or_else(|| OracleError::MissingColumn(name.clone()))?;
        val.set(StepVar::Const(name.clone()), *x);
    }
    val.set(StepVar::Clock(0), 0.0);
    if n == 0 {
        return Ok(val);
    }
    let cols: Vec<(String, usize)> = cs
        .tracked
        .iter()
        .map(|v| tr.column(v).map(|i| (v.clone(), i)).ok_or_else(|| OracleError::MissingColumn(v.clone())))
        .collect::<Result<_, _>>()?;
    let mode = |state: &str| {
        cs.mode_index(state).map(|i| i as f64).ok_or_else(|| OracleError::UnknownState(state.into()))
    };
    for i in 1..=k + 1 {
        if let Some(seg) = tr.segments.get(i - 1) {
            val.set(StepVar::Mode(i), mode(&seg.state)?);
            for (v, c) in &cols {
                val.set(StepVar::Begin(v.clone(), i), seg.entry[*c]);
            }
            if i <= k {
                for (v, c) in &cols {
                    val.set(StepVar::End(v.clone(), i), seg.last().values[*c]);
                }
                val.set(StepVar::Dwell(i), seg.dwell());
                val.set(StepVar::Clock(i), seg.t_end);
            }
        } else {
            let prev_mode = val.get(&StepVar::Mode(i - 1)).unwrap_or(0.0);
            val.set(StepVar::Mode(i), prev_mode);
            for (v, _) in &cols {
                let x = val.get(&StepVar::End(v.clone(), i - 1)).unwrap_or(0.0);
                val.set(StepVar::Begin(v.clone(), i), x);
                if i <= k {
                    val.set(StepVar::End(v.clone(), i), x);
                }
            }
            if i <= k {
                let tau = val.get(&StepVar::Clock(i - 1)).unwrap_or(0.0);
                val.set(StepVar::Dwell(i), 0.0);
                val.set(StepVar::Clock(i), tau);
            }
        }
    }
    for name in &cs.monitors {
        let clock = clocks.iter().find(|c| &c.name == name).ok_or_else(|| OracleError::MissingMonitor(name.clone()))?;
        add_clock_values(&mut val, cs, clock)?;
    }
    Ok(val)
}

/// Runs a monitor clock's update rule over the valuation.
pub fn add_clock_values(val: &mut StepValuation, cs: &ConstraintSystem, clock: &MonitorClock) -> Result<(), OracleError> {
    let c = &clock.name;
    val.set(StepVar::Begin(c.clone(), 1), 0.0);
    for i in 1..=cs.k {
        let begin = val.get(&StepVar::Begin(c.clone(), i)).unwrap_or(0.0);
        let d = val.get(&StepVar::Dwell(i)).unwrap_or(0.0);
        let holds = |e: &Expr, val: &StepValuation| {
            cs.at_end(e, i).eval_bool(&val.env()).map_err(eval_err(format!("condition of clock {c}")))
        };
        let (end, next) = match &clock.kind {
            MonitorKind::Elapsed => (begin + d, begin + d),
            MonitorKind::Since(trig) => (begin + d, if holds(trig, val)? { begin + d } else { 0.0 }),
            MonitorKind::Event(ev) => {
                let tau = val.get(&StepVar::Clock(i)).unwrap_or(0.0);
                (begin, if holds(ev, val)? { tau } else { begin })
            }
        };
        val.set(StepVar::End(c.clone(), i), end);
        val.set(StepVar::Begin(c.clone(), i + 1), next);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// `<class> step <i> <subject>`, or `bound step <i> <variable>`.
    pub label: String,
    pub step: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TraceReport {
    pub satisfied: bool,
    pub violations: Vec<Violation>,
    pub max_residual: f64,
}

/// Integrates a state's flow relation from the begin values of `vars` over
/// the step's dwell.
fn integrate_flow(
    cs: &ConstraintSystem,
    val: &StepValuation,
    state: &str,
    step: usize,
    vars: &[String],
) -> Result<Vec<f64>, OracleError> {
    let fs = cs.flow(state).ok_or_else(|| OracleError::UnknownState(state.into()))?;
    let d = val.get(&StepVar::Dwell(step)).unwrap_or(0.0);
    let mut y: Vec<f64> = vars.iter().map(|v| val.get(&StepVar::Begin(v.clone(), step)).unwrap_or(0.0)).collect();
    let derivs: Vec<&Expr> = vars
        .iter()
        .map(|v| fs.derivs.get(v).ok_or_else(|| OracleError::MissingColumn(v.clone())))
        .collect::<Result<_, _>>()?;
    let f = |y: &[f64]| -> Result<Vec<f64>, OracleError> {
        let env = |name: &String| {
            vars.iter().position(|v| v == name).map(|j| y[j]).or_else(|| val.get(&StepVar::Const(name.clone())))
        };
        derivs.iter().map(|e| e.eval_real(&env).map_err(eval_err(format!("flow of state {state}")))).collect()
    };
    if d <= 0.0 {
        return Ok(y);
    }
    let n = libm::ceil(d / CHECK_DT).max(1.0) as usize;
    let h = d / n as f64;
    let axpy = |y: &[f64], k: &[f64], s: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    for _ in 0..n {
        let k1 = f(&y)?;
        let k2 = f(&axpy(&y, &k1, h / 2.0))?;
        let k3 = f(&axpy(&y, &k2, h / 2.0))?;
        let k4 = f(&axpy(&y, &k3, h))?;
        for j in 0..y.len() {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    Ok(y)
}

/// Residual of one assertion under a valuation; zero when the hypothesis fails.
pub fn assertion_residual(cs: &ConstraintSystem, val: &StepValuation, a: &Assertion) -> Result<f64, OracleError> {
    let env = val.env();
    if let Some(h) = &a.hypothesis {
        if !h.eval_bool(&env).map_err(eval_err(a.to_string()))? {
            return Ok(0.0);
        }
    }
    match &a.body {
        Body::Formula(f) => f.residual(&env).map_err(eval_err(a.to_string())),
        Body::Flow { state, step, vars } => {
            let y = integrate_flow(cs, val, state, *step, vars)?;
            let mut worst: f64 = 0.0;
            for (v, x) in vars.iter().zip(y) {
                let end = val.get(&StepVar::End(v.clone(), *step)).unwrap_or(f64::NAN);
                let r = libm::fabs(end - x);
                worst = if r.is_nan() { f64::INFINITY } else { worst.max(r) };
            }
            Ok(worst)
        }
    }
}

/// Evaluates every assertion of `cs`, plus the dwell and output bounds, on
/// the valuation of a trace.
pub fn check_trace(
    tr: &Trace,
    cs: &ConstraintSystem,
    clocks: &[MonitorClock],
    eps: f64,
) -> Result<TraceReport, OracleError> {
    if tr.segments.is_empty() {
        if cs.k == 0 {
            return Ok(TraceReport { satisfied: true, ..TraceReport::default() });
        }
        return Err(OracleError::Arity { segments: 0, k: cs.k });
    }
    let val = trace_steps(tr, cs, clocks)?;
    check_valuation(cs, &val, eps)
}

pub fn check_valuation(cs: &ConstraintSystem, val: &StepValuation, eps: f64) -> Result<TraceReport, OracleError> {
    let mut report = TraceReport { satisfied: true, ..TraceReport::default() };
    let mut record = |label: String, step: usize, residual: f64| {
        report.max_residual = report.max_residual.max(residual);
        if residual.is_nan() || residual > eps {
            report.satisfied = false;
            report.violations.push(Violation { label, step, residual });
        }
    };
    for a in &cs.assertions {
        record(a.to_string(), a.step, assertion_residual(cs, val, a)?);
    }
    for i in 1..=cs.k {
        let d = val.get(&StepVar::Dwell(i)).unwrap_or(0.0);
        let r = (-d).max(d - cs.d_max).max(0.0);
        record(format!("bound step {i} d_{i}"), i, r);
    }
    for (v, range) in &cs.output_ranges {
        for i in 1..=cs.k + 1 {
            let mut vals = alloc::vec![val.get(&StepVar::Begin(v.clone(), i))];
            if i <= cs.k {
                vals.push(val.get(&StepVar::End(v.clone(), i)));
            }
            for x in vals.into_iter().flatten() {
                let r = (range.lo - x).max(x - range.hi).max(0.0);
                record(format!("bound step {i} {v}"), i, r);
            }
        }
    }
    Ok(report)
}

/// Looks a monitor clock up by name; `reactT` in a response requirement is
/// the time its trigger has been pending.
fn clock_definition(file: &PropertyFile, req: &Requirement, name: &str) -> Option<MonitorKind> {
    if name == REACTION_CLOCK {
        if let TimingConstraint::Response { trigger, .. } = &req.constraint {
            return Some(MonitorKind::Since(trigger.clone()));
        }
    }
    file.clock(name).map(|c| c.kind.clone())
}

/// Per-step view used by the property monitor.
struct Steps<'a> {
    cs: &'a ConstraintSystem,
    val: &'a StepValuation,
}

impl Steps<'_> {
    fn tau(&self, i: usize) -> f64 {
        self.val.get(&StepVar::Clock(i)).unwrap_or(0.0)
    }

    /// Environment of model variables at the end (`end = true`) or the
    /// beginning of step `i`.
    fn model_value(&self, name: &str, i: usize, end: bool) -> Option<f64> {
        if self.cs.is_constant(name) {
            return self.val.get(&StepVar::Const(name.into()));
        }
        let sv = if end { StepVar::End(name.into(), i) } else { StepVar::Begin(name.into(), i) };
        self.val.get(&sv)
    }

    fn holds_at_end(&self, e: &Expr, i: usize) -> Result<bool, OracleError> {
        e.eval_bool(&|v: &String| self.model_value(v, i, true)).map_err(eval_err("monitor condition"))
    }

    /// Value of a clock at the beginning or end of step `i`, computed from
    /// the step times directly.
    fn clock(&self, kind: &MonitorKind, i: usize, end: bool) -> Result<f64, OracleError> {
        match kind {
            MonitorKind::Elapsed => Ok(if end { self.tau(i) } else { self.tau(i - 1) }),
            MonitorKind::Since(trig) => {
                let mut reset = 0;
                for j in 1..i {
                    if !self.holds_at_end(trig, j)? {
                        reset = j;
                    }
                }
                let now = if end { self.tau(i) } else { self.tau(i - 1) };
                Ok(now - self.tau(reset))
            }
            MonitorKind::Event(ev) => {
                let mut last = 0.0;
                for j in 1..i {
                    if self.holds_at_end(ev, j)? {
                        last = self.tau(j);
                    }
                }
                Ok(last)
            }
        }
    }

    fn holds(&self, file: &PropertyFile, req: &Requirement, e: &Expr, i: usize, end: bool) -> Result<bool, OracleError> {
        let mut clock_vals = BTreeMap::new();
        for v in e.free_vars() {
            if self.model_value(&v, i, end).is_none() {
                if let Some(kind) = clock_definition(file, req, &v) {
                    clock_vals.insert(v.clone(), self.clock(&kind, i, end)?);
                }
            }
        }
        e.eval_bool(&|v: &String| self.model_value(v, i, end).or_else(|| clock_vals.get(v).copied()))
            .map_err(eval_err(format!("requirement {}", req.name)))
    }
}

/// Decides a requirement on a trace mapped to `cs.k` steps, without going
/// through the compiled formula.
pub fn monitor_property(
    tr: &Trace,
    cs: &ConstraintSystem,
    file: &PropertyFile,
    req: &Requirement,
) -> Result<bool, OracleError> {
    let mut base = cs.clone();
    base.monitors.clear();
    let val = trace_steps(tr, &base, &[])?;
    monitor_valuation(cs, &val, file, req)
}

pub fn monitor_valuation(
    cs: &ConstraintSystem,
    val: &StepValuation,
    file: &PropertyFile,
    req: &Requirement,
) -> Result<bool, OracleError> {
    let k = cs.k;
    let steps = Steps { cs, val };
    let holds = match &req.constraint {
        TimingConstraint::Reach { mode, predicate, deadline } => {
            let in_mode = match mode {
                Some(m) => {
                    let idx = cs.mode_index(m).ok_or_else(|| OracleError::UnknownState(m.clone()))?;
                    val.get(&StepVar::Mode(k)) == Some(idx as f64)
                }
                None => true,
            };
            in_mode && steps.holds(file, req, predicate, k, true)? && steps.tau(k) <= *deadline
        }
        TimingConstraint::Response { trigger, response, deadline } => {
            let mut ok = true;
            for i in 1..=k {
                if steps.holds(file, req, trigger, i, true)? {
                    let pending = steps.clock(&MonitorKind::Since(trigger.clone()), i, true)?;
                    if !(steps.holds(file, req, response, i + 1, false)? && pending <= *deadline) {
                        ok = false;
                    }
                }
            }
            ok
        }
        TimingConstraint::Periodic { event_clock, min, max } => {
            let at = |i: usize| -> Result<f64, OracleError> {
                match steps.model_value(event_clock, i, false) {
                    Some(x) => Ok(x),
                    None => {
                        let kind = clock_definition(file, req, event_clock)
                            .ok_or_else(|| OracleError::MissingMonitor(event_clock.clone()))?;
                        steps.clock(&kind, i, false)
                    }
                }
            };
            let mut ok = true;
            for i in 1..=k {
                let gap = at(i + 1)? - at(i)?;
                ok &= *min <= gap && gap <= *max;
            }
            ok
        }
    };
    Ok(holds != req.negated)
}

#[derive(Debug, Clone, PartialEq)]
pub enum WitnessError {
    Missing(String),
    Invalid(String),
    Property(PropError),
    Oracle(OracleError),
}

impl fmt::Display for WitnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WitnessError::Missing(v) => write!(f, "witness has no value for {v}"),
            WitnessError::Invalid(m) => f.write_str(m),
            WitnessError::Property(e) => write!(f, "{e}"),
            WitnessError::Oracle(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for WitnessError {}

#[derive(Debug, Clone, PartialEq)]
pub enum WitnessCheck {
    /// The replayed run violates the requirement.
    Confirmed(Trace),
    /// The replay does not violate it; `residual` says how far it is from
    /// doing so (or from following the witness).
    Spurious { residual: f64, reason: String },
}

/// Replays a δ-sat witness with its constants, dwells and modes (interval
/// midpoints), then decides the requirement on the replayed run.
/// `tol` is the slack allowed on guards when following the mode sequence.
pub fn validate_witness(
    w: &Witness,
    m: &Gha,
    cs: &ConstraintSystem,
    file: &PropertyFile,
    req: &Requirement,
    tol: f64,
) -> Result<WitnessCheck, WitnessError> {
    let get = |name: &str| w.get(name).map(|iv| iv.mid()).ok_or_else(|| WitnessError::Missing(name.into()));
    let mut inputs = BTreeMap::new();
    for (name, decl) in &cs.constants {
        let x = match decl {
            ConstDecl::Param(ParamValue::Fixed(x)) => *x,
            _ => get(name)?,
        };
        inputs.insert(name.clone(), Input::Constant(x));
    }
    let mut modes = Vec::new();
    for i in 1..=cs.k + 1 {
        let x = libm::round(get(&StepVar::Mode(i).to_string())?);
        let idx = if x >= 0.0 { x as usize } else { usize::MAX };
        let name = cs.modes.get(idx).ok_or_else(|| WitnessError::Invalid(format!("s_{i} = {x} is not a mode")))?;
        modes.push(name.clone());
    }
    let dwells: Vec<f64> = (1..=cs.k).map(|i| get(&StepVar::Dwell(i).to_string())).collect::<Result<_, _>>()?;
    let tr = match replay(m, &inputs, &modes, &dwells, CHECK_DT, tol) {
        Ok(tr) => tr,
        Err(ReplayError::Diverged { step, from, to, residual }) => {
            return Ok(WitnessCheck::Spurious {
                residual,
                reason: format!("replay leaves the witness after step {step}: no enabled transition {from} -> {to}"),
            })
        }
        Err(ReplayError::Sim(e)) => return Err(WitnessError::Invalid(format!("replay failed: {e}"))),
    };
    let mut sys = cs.clone();
    sys.monitors.clear();
    sys.assertions.retain(|a| !file.clocks.iter().any(|c| c.name == a.subject) && a.subject != REACTION_CLOCK);
    let compiled = compile_property(&mut sys, file, req).map_err(WitnessError::Property)?;
    let clocks = crate::props::clocks_used(file, req);
    let val = trace_steps(&tr, &sys, &clocks).map_err(WitnessError::Oracle)?;
    if !monitor_valuation(&sys, &val, file, req).map_err(WitnessError::Oracle)? {
        return Ok(WitnessCheck::Confirmed(tr));
    }
    let query = negate_for_bmc(&compiled.formula);
    let residual = query.residual(&val.env()).map_err(|e| WitnessError::Invalid(e.to_string()))?;
    Ok(WitnessCheck::Spurious { residual, reason: "the replayed run satisfies the requirement".into() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fr::derive_fr;
    use crate::parse::parse_model;
    use crate::props::parse_properties;
    use crate::sim::{simulate, SimConfig};
    use crate::unroll::{unroll, AssertionClass};
    use crate::verdict::Interval;

    fn fig1() -> Gha {
        parse_model(include_str!("../../../models/fig1/fig1.gha")).unwrap()
    }

    fn fig1_run(horizon: f64) -> Trace {
        let inputs = [("x1", 1.0), ("x2", 2.0)].iter().map(|(n, x)| (n.to_string(), Input::Constant(*x))).collect();
        simulate(&fig1(), &inputs, &SimConfig { horizon, ..SimConfig::default() }).unwrap()
    }

    fn fig1_system(k: usize) -> ConstraintSystem {
        let m = fig1();
        unroll(&m, &derive_fr(&m).unwrap(), k, 10.0).unwrap()
    }

    #[test]
    fn fig1_run_satisfies_its_encoding() {
        let report = check_trace(&fig1_run(10.0), &fig1_system(3), &[], 1e-4).unwrap();
        assert!(report.satisfied, "{:?}", report.violations);
    }

    #[test]
    fn corrupted_frame_is_reported() {
        let mut cs = fig1_system(3);
        let a = cs
            .assertions
            .iter_mut()
            .find(|a| a.class == AssertionClass::Stutter && a.step == 2 && a.subject == "S1")
            .expect("a stutter assertion at step 2");
        let Body::Formula(f) = &a.body else { unreachable!() };
        let v = StepVar::Begin("y2".into(), 3);
        a.body = Body::Formula(Expr::and([
            f.clone(),
            Expr::eq(
                Expr::Var(v),
                Expr::binary(crate::expr::BinaryOp::Add, Expr::Var(StepVar::End("y2".into(), 2)), Expr::Const(1.0)),
            ),
        ]));
        let report = check_trace(&fig1_run(10.0), &cs, &[], 1e-4).unwrap();
        assert!(!report.satisfied);
        assert_eq!(report.violations.len(), 1);
        assert!((report.violations[0].residual - 1.0).abs() < 1e-9);
        assert_eq!(report.violations[0].label, "stutter step 2 S1");
    }

    #[test]
    fn empty_trace_is_vacuous_for_k0() {
        let tr = Trace { columns: Vec::new(), constants: BTreeMap::new(), segments: Vec::new(), events: Vec::new() };
        assert!(check_trace(&tr, &fig1_system(0), &[], 1e-4).unwrap().satisfied);
    }

    #[test]
    fn too_many_segments() {
        let err = check_trace(&fig1_run(10.0), &fig1_system(0), &[], 1e-4).unwrap_err();
        assert_eq!(err, OracleError::Arity { segments: 2, k: 0 });
    }

    #[test]
    fn witness_replay() {
        let file = parse_properties("Avoid: never reach mode=S1 within 10\n").unwrap();
        let negated = file.requirement("Avoid").unwrap().clone();
        let mut cs = fig1_system(2);
        compile_property(&mut cs, &file, &negated).unwrap();
        let mut w = Witness::new();
        let pin = |w: &mut Witness, n: &str, x: f64| {
            w.insert(n.into(), Interval { lo: x, hi: x });
        };
        pin(&mut w, "x1", 1.0);
        pin(&mut w, "x2", 2.0);
        pin(&mut w, "s_1", 0.0);
        pin(&mut w, "s_2", 1.0);
        pin(&mut w, "s_3", 1.0);
        pin(&mut w, "d_1", 20.0 / 3.0);
        pin(&mut w, "d_2", 1.0);
        // `never reach S1` is violated by a run that reaches S1.
        let check = validate_witness(&w, &fig1(), &cs, &file, &negated, 1e-3).unwrap();
        assert!(matches!(check, WitnessCheck::Confirmed(_)), "{check:?}");
        // Leaving S0 early does not follow any transition.
        pin(&mut w, "d_1", 5.0);
        let check = validate_witness(&w, &fig1(), &cs, &file, &negated, 1e-3).unwrap();
        let WitnessCheck::Spurious { residual, .. } = check else { panic!("expected spurious") };
        assert!((residual - 5.0).abs() < 1e-6);
        w.remove("x2");
        assert_eq!(
            validate_witness(&w, &fig1(), &cs, &file, &negated, 1e-3).unwrap_err(),
            WitnessError::Missing("x2".into())
        );
    }
}
