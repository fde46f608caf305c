//! k-step unrolling of a flattened model into a solver-independent
//! constraint system.
//!
//! Steps are numbered from 1. Step `i` (1 ≤ i ≤ k) has begin values
//! `v_i_0`, end values `v_i_t`, mode `s_i` and dwell `d_i`; the clock reads
//! `tau_i` at its end. Transition `t_i` leads from step `i` to step `i + 1`,
//! and the terminal step `k + 1` only carries begin values and its mode.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::expr::Expr;
use crate::fr::FlowSystem;
use crate::model::{Gha, ParamValue, Range};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StepVar {
    /// Value of a variable at the beginning of a step.
    Begin(String, usize),
    /// Value of a variable at the end of a step.
    End(String, usize),
    Mode(usize),
    Dwell(usize),
    /// Global clock at the end of a step; `Clock(0)` is the start.
    Clock(usize),
    /// Input or parameter, constant over the run.
    Const(String),
}

impl fmt::Display for StepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepVar::Begin(v, i) => write!(f, "{v}_{i}_0"),
            StepVar::End(v, i) => write!(f, "{v}_{i}_t"),
            StepVar::Mode(i) => write!(f, "s_{i}"),
            StepVar::Dwell(i) => write!(f, "d_{i}"),
            StepVar::Clock(i) => write!(f, "tau_{i}"),
            StepVar::Const(c) => f.write_str(c),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AssertionClass {
    Init,
    ContinuousUpdate,
    AlgebraicUpdate,
    Frame,
    Transition,
    Stutter,
    Clock,
}

impl AssertionClass {
    pub const ALL: [AssertionClass; 7] = [
        AssertionClass::Init,
        AssertionClass::ContinuousUpdate,
        AssertionClass::AlgebraicUpdate,
        AssertionClass::Frame,
        AssertionClass::Transition,
        AssertionClass::Stutter,
        AssertionClass::Clock,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AssertionClass::Init => "init",
            AssertionClass::ContinuousUpdate => "continuous-update",
            AssertionClass::AlgebraicUpdate => "algebraic-update",
            AssertionClass::Frame => "frame",
            AssertionClass::Transition => "transition",
            AssertionClass::Stutter => "stutter",
            AssertionClass::Clock => "clock",
        }
    }
}

impl fmt::Display for AssertionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Formula(Expr<StepVar>),
    /// End values of `vars` are the solution of the state's ODE system after
    /// `d_step` time units, starting from their begin values.
    Flow { state: String, step: usize, vars: Vec<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub class: AssertionClass,
    pub step: usize,
    /// Variable, state, transition or clock the assertion is about.
    pub subject: String,
    pub hypothesis: Option<Expr<StepVar>>,
    pub body: Body,
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} step {} {}", self.class, self.step, self.subject)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConstDecl {
    Input(Option<Range>),
    Param(ParamValue),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    pub k: usize,
    pub d_max: f64,
    /// State names sorted; a mode's number is its index.
    pub modes: Vec<String>,
    pub initial: String,
    /// Model variables with begin/end values, sorted.
    pub tracked: Vec<String>,
    /// Monitor clocks added by property compilation, in insertion order.
    pub monitors: Vec<String>,
    pub constants: BTreeMap<String, ConstDecl>,
    /// Declared ranges of outputs, bounding all their step values.
    pub output_ranges: BTreeMap<String, Range>,
    pub init_values: BTreeMap<String, f64>,
    pub flows: Vec<FlowSystem>,
    pub assertions: Vec<Assertion>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum UnrollError {
    NoInitialState,
    MissingFlow(String),
    UnknownActionTarget { transition: usize, var: String },
    UnknownState(String),
}

impl fmt::Display for UnrollError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnrollError::NoInitialState => f.write_str("model has no initial state"),
            UnrollError::MissingFlow(s) => write!(f, "no flow relation for state {s}"),
            UnrollError::UnknownActionTarget { transition, var } => {
                write!(f, "transition {}: action on undeclared variable `{var}`", transition + 1)
            }
            UnrollError::UnknownState(s) => write!(f, "unresolved state {s}"),
        }
    }
}

impl core::error::Error for UnrollError {}

pub fn mode_eq(step: usize, idx: usize) -> Expr<StepVar> {
    Expr::eq(Expr::Var(StepVar::Mode(step)), Expr::Const(idx as f64))
}

impl ConstraintSystem {
    pub fn mode_index(&self, state: &str) -> Option<usize> {
        self.modes.iter().position(|m| m == state)
    }

    pub fn flow(&self, state: &str) -> Option<&FlowSystem> {
        self.flows.iter().find(|f| f.state_name == state)
    }

    /// Variables with begin/end values: tracked model variables, then monitors.
    pub fn step_tracked(&self) -> impl Iterator<Item = &String> {
        self.tracked.iter().chain(self.monitors.iter())
    }

    pub fn is_constant(&self, v: &str) -> bool {
        self.constants.contains_key(v)
    }

    /// Rewrites a model expression to read end-of-step `i` values.
    pub fn at_end(&self, e: &Expr, i: usize) -> Expr<StepVar> {
        e.map_vars(&mut |v| {
            if self.is_constant(v) {
                StepVar::Const(v.clone())
            } else {
                StepVar::End(v.clone(), i)
            }
        })
    }

    /// Rewrites a model expression to read beginning-of-step `i` values.
    pub fn at_begin(&self, e: &Expr, i: usize) -> Expr<StepVar> {
        e.map_vars(&mut |v| {
            if self.is_constant(v) {
                StepVar::Const(v.clone())
            } else {
                StepVar::Begin(v.clone(), i)
            }
        })
    }

    /// Every declared step variable, in declaration order: constants, the
    /// start clock, then per step mode, dwell, clock and begin/end values.
    pub fn declared(&self) -> Vec<StepVar> {
        let mut out: Vec<StepVar> = self.constants.keys().map(|c| StepVar::Const(c.clone())).collect();
        out.push(StepVar::Clock(0));
        let mut vars: Vec<&String> = self.step_tracked().collect();
        vars.sort();
        for i in 1..=self.k + 1 {
            out.push(StepVar::Mode(i));
            if i <= self.k {
                out.push(StepVar::Dwell(i));
                out.push(StepVar::Clock(i));
            }
            for v in &vars {
                out.push(StepVar::Begin((*v).clone(), i));
                if i <= self.k {
                    out.push(StepVar::End((*v).clone(), i));
                }
            }
        }
        out
    }

    pub fn is_declared(&self, sv: &StepVar) -> bool {
        let tracked = |v: &String| self.step_tracked().any(|t| t == v);
        match sv {
            StepVar::Const(c) => self.is_constant(c),
            StepVar::Clock(i) => *i <= self.k,
            StepVar::Dwell(i) => (1..=self.k).contains(i),
            StepVar::Mode(i) => (1..=self.k + 1).contains(i),
            StepVar::Begin(v, i) => tracked(v) && (1..=self.k + 1).contains(i),
            StepVar::End(v, i) => tracked(v) && (1..=self.k).contains(i),
        }
    }

    /// The assertion as a single formula. Flow bodies have no expression
    /// form and yield `None`.
    pub fn formula(a: &Assertion) -> Option<Expr<StepVar>> {
        let Body::Formula(body) = &a.body else { return None };
        Some(match &a.hypothesis {
            Some(h) => Expr::implies(h.clone(), body.clone()),
            None => body.clone(),
        })
    }

    pub fn count(&self, class: AssertionClass) -> usize {
        self.assertions.iter().filter(|a| a.class == class).count()
    }
}

/// Builds the k-step constraint system of a flattened, validated model.
pub fn unroll(m: &Gha, flows: &[FlowSystem], k: usize, d_max: f64) -> Result<ConstraintSystem, UnrollError> {
    let initial = m.initial.clone().ok_or(UnrollError::NoInitialState)?;
    let modes = m.state_names();
    if !modes.contains(&initial) {
        return Err(UnrollError::UnknownState(initial));
    }
    let mut sorted_flows = Vec::new();
    for s in &modes {
        let f = flows.iter().find(|f| &f.state_name == s).ok_or_else(|| UnrollError::MissingFlow(s.clone()))?;
        sorted_flows.push(f.clone());
    }
    let mut constants = BTreeMap::new();
    for (name, r) in &m.inputs {
        constants.insert(name.clone(), ConstDecl::Input(*r));
    }
    for (name, p) in &m.params {
        constants.insert(name.clone(), ConstDecl::Param(*p));
    }
    let tracked = m.tracked_vars();
    for (j, t) in m.transitions.iter().enumerate() {
        for s in [&t.src, &t.dst] {
            if !modes.contains(s) {
                return Err(UnrollError::UnknownState(s.clone()));
            }
        }
        for (v, _) in &t.actions {
            if !tracked.contains(v) {
                return Err(UnrollError::UnknownActionTarget { transition: j, var: v.clone() });
            }
        }
    }
    let mut cs = ConstraintSystem {
        k,
        d_max,
        modes,
        initial,
        tracked,
        monitors: Vec::new(),
        constants,
        output_ranges: m.outputs.iter().filter_map(|(n, r)| r.map(|r| (n.clone(), r))).collect(),
        init_values: m.initial_values(),
        flows: sorted_flows,
        assertions: Vec::new(),
    };
    let mut out = Vec::new();
    let formula = |class, step, subject: &str, hypothesis, body| Assertion {
        class,
        step,
        subject: subject.to_string(),
        hypothesis,
        body: Body::Formula(body),
    };

    // Initial step.
    let init_idx = cs.mode_index(&cs.initial).expect("checked above");
    out.push(formula(AssertionClass::Init, 1, "mode", None, mode_eq(1, init_idx)));
    out.push(formula(AssertionClass::Init, 0, "tau", None, Expr::eq(Expr::Var(StepVar::Clock(0)), Expr::Const(0.0))));
    for v in &cs.tracked {
        let x = cs.init_values.get(v).copied().unwrap_or(0.0);
        out.push(formula(AssertionClass::Init, 1, v, None, Expr::eq(Expr::Var(StepVar::Begin(v.clone(), 1)), Expr::Const(x))));
    }

    for i in 1..=k {
        out.push(formula(
            AssertionClass::Clock,
            i,
            "tau",
            None,
            Expr::eq(
                Expr::Var(StepVar::Clock(i)),
                Expr::binary(crate::expr::BinaryOp::Add, Expr::Var(StepVar::Clock(i - 1)), Expr::Var(StepVar::Dwell(i))),
            ),
        ));
        // Updates within step i.
        for (idx, f) in cs.flows.iter().enumerate() {
            let hyp = || Some(mode_eq(i, idx));
            if !f.state_vars.is_empty() {
                out.push(Assertion {
                    class: AssertionClass::ContinuousUpdate,
                    step: i,
                    subject: f.state_name.clone(),
                    hypothesis: hyp(),
                    body: Body::Flow { state: f.state_name.clone(), step: i, vars: f.state_vars.clone() },
                });
            }
            for v in &cs.tracked {
                if f.is_state_var(v) {
                    continue;
                }
                let end = Expr::Var(StepVar::End(v.clone(), i));
                let subject = format!("{} {v}", f.state_name);
                if let Some(phi) = f.algebraic.get(v) {
                    out.push(formula(AssertionClass::AlgebraicUpdate, i, &subject, hyp(), Expr::eq(end, cs.at_end(phi, i))));
                } else {
                    let begin = Expr::Var(StepVar::Begin(v.clone(), i));
                    out.push(formula(AssertionClass::Frame, i, &subject, hyp(), Expr::eq(end, begin)));
                }
            }
        }
        // Transitions from step i to step i + 1.
        for (j, t) in m.transitions.iter().enumerate() {
            let src = cs.mode_index(&t.src).expect("checked above");
            let hyp = Expr::and([mode_eq(i, src), cs.at_end(&t.cond, i)]);
            let siblings: Vec<_> = m.transitions.iter().filter(|u| u.src == t.src).collect();
            let body = if siblings.len() == 1 {
                transition_post(&cs, t, i)
            } else {
                Expr::or(siblings.iter().map(|u| Expr::and([cs.at_end(&u.cond, i), transition_post(&cs, u, i)])))
            };
            out.push(formula(AssertionClass::Transition, i, &format!("{}: {} -> {}", j + 1, t.src, t.dst), Some(hyp), body));
        }
        // Stutter: no outgoing guard holds at the end of step i.
        for (idx, s) in cs.modes.iter().enumerate() {
            let guards: Vec<_> = m.transitions.iter().filter(|t| &t.src == s).map(|t| cs.at_end(&t.cond, i)).collect();
            let hyp = if guards.is_empty() {
                mode_eq(i, idx)
            } else {
                Expr::and([mode_eq(i, idx), Expr::not(Expr::or(guards))])
            };
            let mut parts = alloc::vec![mode_eq(i + 1, idx)];
            for v in &cs.tracked {
                parts.push(Expr::eq(Expr::Var(StepVar::Begin(v.clone(), i + 1)), Expr::Var(StepVar::End(v.clone(), i))));
            }
            out.push(formula(AssertionClass::Stutter, i, s, Some(hyp), Expr::and(parts)));
        }
    }
    cs.assertions = out;
    Ok(cs)
}

/// Destination mode and begin values of step `i + 1` after taking `t`.
fn transition_post(cs: &ConstraintSystem, t: &crate::model::Transition, i: usize) -> Expr<StepVar> {
    let mut env: BTreeMap<&str, Expr<StepVar>> =
        cs.tracked.iter().map(|v| (v.as_str(), Expr::Var(StepVar::End(v.clone(), i)))).collect();
    for (x, e) in &t.actions {
        let value = e.subst(&mut |v: &String| match env.get(v.as_str()) {
            Some(cur) => cur.clone(),
            None => Expr::Var(StepVar::Const(v.clone())),
        });
        if let Some(slot) = env.get_mut(x.as_str()) {
            *slot = value;
        }
    }
    let dst = cs.mode_index(&t.dst).expect("checked by unroll");
    let mut parts = alloc::vec![mode_eq(i + 1, dst)];
    for v in &cs.tracked {
        parts.push(Expr::eq(Expr::Var(StepVar::Begin(v.clone(), i + 1)), env[v.as_str()].clone()));
    }
    Expr::and(parts)
}
