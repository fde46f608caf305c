//! Timing requirements: property files, monitor clocks, and compilation to
//! formulas over step variables.
//!
//! ```text
//! # comments start with '#'
//! clock gps_t on gps_on >= 1
//! clock busy since load > 2
//! clock runT elapsed
//! R1: reach mode=Stop (50 - x <= 0.8) && (50 - y <= 0.8) within 20
//! R2: respond hError > 0.01 -> dec == 1 within 0.5
//! R3: periodic gps_t in [0.04, 0.06]
//! never reach mode=Stop within 10
//! ```

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::expr::{BinaryOp, CmpOp, Expr};
use crate::parse::{tokenize, ExprParser, ParseError, ParseErrorKind, Tok};
use crate::unroll::{mode_eq, Assertion, AssertionClass, Body, ConstraintSystem, StepVar};

/// Name of the clock measuring how long a response trigger has been pending.
pub const REACTION_CLOCK: &str = "reactT";

#[derive(Debug, Clone, PartialEq)]
pub enum MonitorKind {
    /// Time since the start of the run.
    Elapsed,
    /// Time since the trigger became true at a step end; restarts at zero
    /// after every step end where it is false.
    Since(Expr),
    /// Global time of the last step end where the event held.
    Event(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorClock {
    pub name: String,
    pub kind: MonitorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TimingConstraint {
    /// At the last step the chart is in `mode` with `predicate` true, and no
    /// more than `deadline` seconds have passed.
    Reach { mode: Option<String>, predicate: Expr, deadline: f64 },
    /// Whenever `trigger` holds at a step end, `response` holds when the next
    /// step begins and the trigger has been pending at most `deadline`.
    Response { trigger: Expr, response: Expr, deadline: f64 },
    /// Consecutive values of `event_clock` are between `min` and `max` apart.
    Periodic { event_clock: String, min: f64, max: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Requirement {
    pub name: String,
    /// `never <constraint>`: the requirement is the negation of the constraint.
    pub negated: bool,
    pub constraint: TimingConstraint,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PropertyFile {
    pub clocks: Vec<MonitorClock>,
    pub requirements: Vec<Requirement>,
}

impl PropertyFile {
    pub fn clock(&self, name: &str) -> Option<&MonitorClock> {
        self.clocks.iter().find(|c| c.name == name)
    }

    pub fn requirement(&self, name: &str) -> Option<&Requirement> {
        self.requirements.iter().find(|r| r.name == name)
    }
}

impl fmt::Display for TimingConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimingConstraint::Reach { mode, predicate, deadline } => {
                f.write_str("reach")?;
                if let Some(m) = mode {
                    write!(f, " mode={m}")?;
                }
                if !predicate.is_true() {
                    write!(f, " {predicate}")?;
                }
                if deadline.is_finite() {
                    write!(f, " within {deadline}")?;
                }
                Ok(())
            }
            TimingConstraint::Response { trigger, response, deadline } => {
                write!(f, "respond {trigger} -> {response} within {deadline}")
            }
            TimingConstraint::Periodic { event_clock, min, max } => {
                write!(f, "periodic {event_clock} in [{min}, {max}]")
            }
        }
    }
}

impl fmt::Display for Requirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.name)?;
        if self.negated {
            f.write_str("never ")?;
        }
        write!(f, "{}", self.constraint)
    }
}

// ---------------------------------------------------------------------------
// Parsing

fn col(text: &str, byte: usize) -> usize {
    text[..byte.min(text.len())].chars().count() + 1
}

pub fn parse_properties(text: &str) -> Result<PropertyFile, ParseError> {
    let mut file = PropertyFile::default();
    for (no, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(c) => &raw[..c],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let err = |(at, msg): (usize, String)| ParseError::syntax_at(no + 1, col(line, at), msg);
        let toks = tokenize(line).map_err(err)?;
        let mut p = ExprParser::new(&toks, line.len());
        let mut name = None;
        if matches!(toks.get(1).map(|t| &t.tok), Some(Tok::Punct(":"))) {
            name = Some(p.ident().map_err(err)?);
            p.expect(":").map_err(err)?;
        }
        if p.eat_ident("clock") {
            if name.is_some() {
                return Err(err((0, "clock declarations take no label".into())));
            }
            let at = p.here();
            let cname = p.ident().map_err(err)?;
            let kind = if p.eat_ident("elapsed") {
                MonitorKind::Elapsed
            } else if p.eat_ident("since") {
                MonitorKind::Since(p.expr().map_err(err)?)
            } else if p.eat_ident("on") {
                MonitorKind::Event(p.expr().map_err(err)?)
            } else {
                return Err(err((p.here(), "expected `elapsed`, `since <expr>` or `on <expr>`".into())));
            };
            if file.clock(&cname).is_some() {
                return Err(ParseError { line: no + 1, col: col(line, at), kind: ParseErrorKind::DuplicateKey(cname) });
            }
            file.clocks.push(MonitorClock { name: cname, kind });
        } else {
            let negated = p.eat_ident("never");
            let constraint = constraint(&mut p).map_err(err)?;
            let name = name.unwrap_or_else(|| format!("P{}", file.requirements.len() + 1));
            if file.requirement(&name).is_some() {
                return Err(ParseError { line: no + 1, col: 1, kind: ParseErrorKind::DuplicateKey(name) });
            }
            file.requirements.push(Requirement { name, negated, constraint });
        }
        if !p.at_end() {
            return Err(err((p.here(), "trailing input".into())));
        }
    }
    Ok(file)
}

fn constraint(p: &mut ExprParser<'_>) -> Result<TimingConstraint, (usize, String)> {
    if p.eat_ident("reach") {
        let mut mode = None;
        if matches!(p.peek(), Some(Tok::Ident(w)) if w == "mode")
            && matches!(p.toks.get(p.pos + 1).map(|t| &t.tok), Some(Tok::Punct("=")))
        {
            p.pos += 2;
            mode = Some(p.ident()?);
        }
        let predicate = if p.at_end() || matches!(p.peek(), Some(Tok::Ident(w)) if w == "within") {
            Expr::tt()
        } else {
            p.expr()?
        };
        let deadline = if p.eat_ident("within") { p.number()? } else { f64::INFINITY };
        return Ok(TimingConstraint::Reach { mode, predicate, deadline });
    }
    if p.eat_ident("respond") {
        let trigger = p.expr()?;
        p.expect("->")?;
        let response = p.expr()?;
        if !p.eat_ident("within") {
            return Err((p.here(), "expected `within <seconds>`".into()));
        }
        let deadline = p.number()?;
        return Ok(TimingConstraint::Response { trigger, response, deadline });
    }
    if p.eat_ident("periodic") {
        let event_clock = p.ident()?;
        if !p.eat_ident("in") {
            return Err((p.here(), "expected `in [min, max]`".into()));
        }
        p.expect("[")?;
        let min = p.number()?;
        p.expect(",")?;
        let max = p.number()?;
        p.expect("]")?;
        return Ok(TimingConstraint::Periodic { event_clock, min, max });
    }
    Err((p.here(), "expected `reach`, `respond`, `periodic`, `never` or `clock`".into()))
}

// ---------------------------------------------------------------------------
// Compilation

#[derive(Debug, Clone, PartialEq)]
pub enum PropError {
    UnknownVariable(String),
    UnknownState(String),
    UnknownRequirement(String),
    BoundTooSmall { requirement: String },
    Invalid { requirement: String, message: String },
}

impl fmt::Display for PropError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropError::UnknownVariable(v) => write!(f, "unknown variable {v}"),
            PropError::UnknownState(s) => write!(f, "unresolved state {s}"),
            PropError::UnknownRequirement(r) => write!(f, "no requirement named {r}"),
            PropError::BoundTooSmall { requirement } => {
                write!(f, "{requirement}: k = 0 with a property referencing step >= 1")
            }
            PropError::Invalid { requirement, message } => write!(f, "{requirement}: {message}"),
        }
    }
}

impl core::error::Error for PropError {}

#[derive(Debug, Clone, PartialEq)]
pub struct Compiled {
    /// The requirement φ over step variables.
    pub formula: Expr<StepVar>,
    pub warnings: Vec<String>,
}

/// Monitor clocks a requirement reads, in dependency order.
pub fn clocks_used(file: &PropertyFile, req: &Requirement) -> Vec<MonitorClock> {
    let mut names = BTreeSet::new();
    let mut add = |e: &Expr| {
        for v in e.free_vars() {
            if file.clock(&v).is_some() {
                names.insert(v);
            }
        }
    };
    match &req.constraint {
        TimingConstraint::Reach { predicate, .. } => add(predicate),
        TimingConstraint::Response { trigger, response, .. } => {
            add(trigger);
            add(response);
        }
        TimingConstraint::Periodic { event_clock, .. } => {
            if file.clock(event_clock).is_some() {
                names.insert(event_clock.clone());
            }
        }
    }
    let mut out: Vec<MonitorClock> = file.clocks.iter().filter(|c| names.contains(&c.name)).cloned().collect();
    if let TimingConstraint::Response { trigger, .. } = &req.constraint {
        out.retain(|c| c.name != REACTION_CLOCK);
        out.push(MonitorClock { name: REACTION_CLOCK.into(), kind: MonitorKind::Since(trigger.clone()) });
    }
    out
}

fn check_vars(cs: &ConstraintSystem, e: &Expr, clocks: &[MonitorClock], allow_clocks: bool) -> Result<(), PropError> {
    for v in e.free_vars() {
        let known = cs.tracked.contains(&v)
            || cs.is_constant(&v)
            || (allow_clocks && clocks.iter().any(|c| c.name == v));
        if !known {
            return Err(PropError::UnknownVariable(v));
        }
    }
    Ok(())
}

/// Adds the update assertions of a monitor clock to `cs` (once).
pub fn add_monitor(cs: &mut ConstraintSystem, clock: &MonitorClock) {
    if cs.monitors.contains(&clock.name) {
        return;
    }
    cs.monitors.push(clock.name.clone());
    let c = &clock.name;
    let var = |sv: StepVar| Expr::Var(sv);
    cs.assertions.push(Assertion {
        class: AssertionClass::Init,
        step: 1,
        subject: c.clone(),
        hypothesis: None,
        body: Body::Formula(Expr::eq(var(StepVar::Begin(c.clone(), 1)), Expr::Const(0.0))),
    });
    for i in 1..=cs.k {
        let begin = var(StepVar::Begin(c.clone(), i));
        let end = var(StepVar::End(c.clone(), i));
        let next = var(StepVar::Begin(c.clone(), i + 1));
        let advanced = Expr::binary(BinaryOp::Add, begin.clone(), var(StepVar::Dwell(i)));
        let (end_value, next_value) = match &clock.kind {
            MonitorKind::Elapsed => (advanced, end.clone()),
            MonitorKind::Since(trigger) => {
                (advanced, Expr::ite(cs.at_end(trigger, i), end.clone(), Expr::Const(0.0)))
            }
            MonitorKind::Event(ev) => (begin, Expr::ite(cs.at_end(ev, i), var(StepVar::Clock(i)), end.clone())),
        };
        cs.assertions.push(Assertion {
            class: AssertionClass::Clock,
            step: i,
            subject: c.clone(),
            hypothesis: None,
            body: Body::Formula(Expr::and([Expr::eq(end, end_value), Expr::eq(next, next_value)])),
        });
    }
}

/// Compiles a requirement against `cs`, adding the monitor clocks it needs.
pub fn compile_property(
    cs: &mut ConstraintSystem,
    file: &PropertyFile,
    req: &Requirement,
) -> Result<Compiled, PropError> {
    let k = cs.k;
    let name = &req.name;
    let invalid = |message: &str| PropError::Invalid { requirement: name.clone(), message: message.into() };
    if k == 0 {
        return Err(PropError::BoundTooSmall { requirement: name.clone() });
    }
    let clocks = clocks_used(file, req);
    for c in &clocks {
        if cs.tracked.contains(&c.name) || cs.is_constant(&c.name) {
            return Err(invalid(&format!("clock `{}` collides with a model variable", c.name)));
        }
        match &c.kind {
            MonitorKind::Elapsed => {}
            MonitorKind::Since(e) | MonitorKind::Event(e) => {
                check_vars(cs, e, &clocks, false)?;
                if !e.well_sorted(crate::expr::Sort::Bool) {
                    return Err(invalid(&format!("clock `{}` needs a boolean condition", c.name)));
                }
            }
        }
    }
    let mut warnings = Vec::new();
    let horizon = k as f64 * cs.d_max;
    let v = |sv: StepVar| Expr::Var(sv);
    let formula = match &req.constraint {
        TimingConstraint::Reach { mode, predicate, deadline } => {
            check_vars(cs, predicate, &clocks, true)?;
            if !predicate.well_sorted(crate::expr::Sort::Bool) {
                return Err(invalid("reach predicate must be boolean"));
            }
            if *deadline <= 0.0 {
                return Err(invalid("deadline must be positive"));
            }
            let mut parts = Vec::new();
            if let Some(m) = mode {
                let idx = cs.mode_index(m).ok_or_else(|| PropError::UnknownState(m.clone()))?;
                parts.push(mode_eq(k, idx));
            }
            if !predicate.is_true() {
                parts.push(cs.at_end(predicate, k));
            }
            if deadline.is_finite() {
                if *deadline > horizon {
                    warnings.push(format!("{name}: deadline {deadline} exceeds k * d_max = {horizon}; the bound cannot witness it"));
                }
                parts.push(Expr::cmp(CmpOp::Le, v(StepVar::Clock(k)), Expr::Const(*deadline)));
            }
            Expr::and(parts)
        }
        TimingConstraint::Response { trigger, response, deadline } => {
            check_vars(cs, trigger, &clocks, true)?;
            check_vars(cs, response, &clocks, true)?;
            if !trigger.well_sorted(crate::expr::Sort::Bool) || !response.well_sorted(crate::expr::Sort::Bool) {
                return Err(invalid("trigger and response must be boolean"));
            }
            if *deadline <= 0.0 {
                return Err(invalid("deadline must be positive"));
            }
            if *deadline > horizon {
                warnings.push(format!("{name}: deadline {deadline} exceeds k * d_max = {horizon}; the bound cannot witness it"));
            }
            Expr::and((1..=k).map(|i| {
                Expr::implies(
                    cs.at_end(trigger, i),
                    Expr::and([
                        cs.at_begin(response, i + 1),
                        Expr::cmp(CmpOp::Le, v(StepVar::End(REACTION_CLOCK.into(), i)), Expr::Const(*deadline)),
                    ]),
                )
            }))
        }
        TimingConstraint::Periodic { event_clock, min, max } => {
            if !(0.0 <= *min && min <= max) {
                return Err(invalid("periodic bounds need 0 <= min <= max"));
            }
            if !clocks.iter().any(|c| &c.name == event_clock) && !cs.tracked.contains(event_clock) {
                return Err(PropError::UnknownVariable(event_clock.clone()));
            }
            Expr::and((1..=k).map(|i| {
                let gap = Expr::binary(
                    BinaryOp::Sub,
                    v(StepVar::Begin(event_clock.clone(), i + 1)),
                    v(StepVar::Begin(event_clock.clone(), i)),
                );
                Expr::and([
                    Expr::cmp(CmpOp::Ge, gap.clone(), Expr::Const(*min)),
                    Expr::cmp(CmpOp::Le, gap, Expr::Const(*max)),
                ])
            }))
        }
    };
    for c in &clocks {
        add_monitor(cs, c);
    }
    let formula = if req.negated { Expr::not(formula) } else { formula };
    Ok(Compiled { formula, warnings })
}

/// The BMC query formula: the negation of `p`, with negations pushed to the atoms.
pub fn negate_for_bmc<V: Clone>(p: &Expr<V>) -> Expr<V> {
    p.nnf(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fr::derive_fr;
    use crate::parse::parse_model;
    use crate::unroll::unroll;
    use alloc::string::ToString;

    fn fig1(k: usize) -> ConstraintSystem {
        let m = parse_model(include_str!("../../../models/fig1/fig1.gha")).unwrap();
        unroll(&m, &derive_fr(&m).unwrap(), k, 10.0).unwrap()
    }

    #[test]
    fn parses_all_shapes() {
        let f = parse_properties(
            "# timing\nclock gps_t on y1 >= 1\nR1: reach mode=S1 (50 - y1 <= 0.8) within 20\nR2: respond y1 > 0.01 -> y2 == 1 within 0.5\nperiodic gps_t in [0.04, 0.06]\nnever reach mode=S1\n",
        )
        .unwrap();
        assert_eq!(f.clocks.len(), 1);
        assert_eq!(f.requirements.len(), 4);
        assert_eq!(f.requirements[2].name, "P3");
        assert!(f.requirements[3].negated);
        assert_eq!(f.requirements[0].to_string(), "R1: reach mode=S1 50 - y1 <= 0.8 within 20");
        assert!(matches!(
            &f.requirements[3].constraint,
            TimingConstraint::Reach { predicate, deadline, .. } if predicate.is_true() && deadline.is_infinite()
        ));
    }

    #[test]
    fn property_syntax_errors() {
        let e = parse_properties("reach mode=S1 within\n").unwrap_err();
        assert_eq!(e.line, 1);
        let e = parse_properties("\nrespond y1 > 1 within 3\n").unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn vacuous_reach_is_only_a_mode_constraint() {
        let mut cs = fig1(1);
        let f = parse_properties("reach mode=S1\n").unwrap();
        let c = compile_property(&mut cs, &f, &f.requirements[0]).unwrap();
        assert_eq!(c.formula, mode_eq(1, 1));
    }

    #[test]
    fn unknown_variables_and_states() {
        let mut cs = fig1(2);
        let f = parse_properties("reach z > 1\nreach mode=Nowhere\n").unwrap();
        let e = compile_property(&mut cs, &f, &f.requirements[0]).unwrap_err();
        assert_eq!(e.to_string(), "unknown variable z");
        let e = compile_property(&mut cs, &f, &f.requirements[1]).unwrap_err();
        assert_eq!(e.to_string(), "unresolved state Nowhere");
    }

    #[test]
    fn zero_bound_rejected() {
        let mut cs = fig1(0);
        let f = parse_properties("reach mode=S1\n").unwrap();
        assert!(matches!(compile_property(&mut cs, &f, &f.requirements[0]), Err(PropError::BoundTooSmall { .. })));
    }

    #[test]
    fn response_injects_reaction_clock() {
        let mut cs = fig1(3);
        let f = parse_properties("respond y1 >= 20 -> y1 == 0 within 1\n").unwrap();
        compile_property(&mut cs, &f, &f.requirements[0]).unwrap();
        assert_eq!(cs.monitors, [REACTION_CLOCK]);
        assert_eq!(cs.assertions.iter().filter(|a| a.subject == REACTION_CLOCK).count(), 1 + 3);
    }

    #[test]
    fn deadline_warning() {
        let mut cs = fig1(2);
        let f = parse_properties("reach mode=S1 within 50\n").unwrap();
        let c = compile_property(&mut cs, &f, &f.requirements[0]).unwrap();
        assert_eq!(c.warnings.len(), 1);
    }

    #[test]
    fn never_flips_the_query() {
        let mut cs = fig1(1);
        let f = parse_properties("never reach mode=S1\n").unwrap();
        let c = compile_property(&mut cs, &f, &f.requirements[0]).unwrap();
        assert_eq!(negate_for_bmc(&c.formula), mode_eq(1, 1));
    }
}
