//! Static checks on parsed models.
//!
//! Every rule is checked and all findings are returned, errors and warnings,
//! sorted by location so the output is stable.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::expr::{BinaryOp, Expr, Sort, UnaryOp};
use crate::flatten::flatten_state;
use crate::model::{Block, BlockKind, Diagram, Gha, Param, ParamValue, PortRef, Range, SlState};
use crate::parse::TEMPORAL_OPERATORS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Location {
    Model,
    Declaration(String),
    State(String),
    Block { state: String, block: String },
    Transition { index: usize, src: String, dst: String },
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Model => f.write_str("model"),
            Location::Declaration(name) => write!(f, "declaration {name}"),
            Location::State(s) => write!(f, "state {s}"),
            Location::Block { state, block } => write!(f, "state {state}, block {block}"),
            Location::Transition { index, src, dst } => write!(f, "transition {} ({src} -> {dst})", index + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Diagnostic {
    pub location: Location,
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}: {}: {}", self.location, self.message)
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}

/// Words that cannot name variables, states or monitors.
pub const KEYWORDS: [&str; 29] = [
    "and", "or", "not", "ite", "true", "false", "let", "exp", "log", "sin", "cos", "tan", "sqrt", "abs", "min",
    "max", "pow", "in", "when", "do", "within", "mode", "reach", "respond", "periodic", "clock", "never",
    "integral", "reactT",
];

fn is_identifier(name: &str) -> bool {
    let mut cs = name.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

fn all_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

/// Why `name` cannot be used, if it collides with the names the encoder
/// generates (`s_3`, `d_3`, `tau_3`, `x_3_0`, `x_3_t`, `flow_S`) or with a keyword.
pub fn reserved_reason(name: &str) -> Option<&'static str> {
    if KEYWORDS.contains(&name) || TEMPORAL_OPERATORS.contains(&name) {
        return Some("is a keyword");
    }
    for prefix in ["s_", "d_", "tau_"] {
        if name.strip_prefix(prefix).is_some_and(all_digits) {
            return Some("collides with a generated step variable");
        }
    }
    if name.starts_with("flow_") {
        return Some("collides with a generated flow name");
    }
    if let Some(rest) = name.strip_suffix("_0").or_else(|| name.strip_suffix("_t")) {
        if let Some((_, idx)) = rest.rsplit_once('_') {
            if all_digits(idx) {
                return Some("collides with a generated step variable");
            }
        }
    }
    None
}

struct Ctx<'a> {
    m: &'a Gha,
    out: Vec<Diagnostic>,
}

impl Ctx<'_> {
    fn push(&mut self, location: Location, severity: Severity, message: impl Into<String>) {
        self.out.push(Diagnostic { location, severity, message: message.into() });
    }

    fn error(&mut self, location: Location, message: impl Into<String>) {
        self.push(location, Severity::Error, message);
    }

    fn warn(&mut self, location: Location, message: impl Into<String>) {
        self.push(location, Severity::Warning, message);
    }
}

fn check_range(cx: &mut Ctx<'_>, name: &str, r: &Range) {
    if !(r.lo.is_finite() && r.hi.is_finite() && r.lo <= r.hi) {
        cx.error(Location::Declaration(name.into()), format!("invalid range [{}, {}]", r.lo, r.hi));
    }
}

fn check_declarations(cx: &mut Ctx<'_>) {
    let m = cx.m;
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for name in m.inputs.keys().chain(m.outputs.keys()).chain(m.params.keys()) {
        *seen.entry(name).or_default() += 1;
    }
    for (name, n) in seen {
        if n > 1 {
            cx.error(Location::Declaration(name.into()), "declared more than once among inputs, outputs and params");
        }
        if !is_identifier(name) || name.contains('.') {
            cx.error(Location::Declaration(name.into()), "not a valid identifier");
        }
        if let Some(why) = reserved_reason(name) {
            cx.error(Location::Declaration(name.into()), format!("reserved name `{name}` {why}"));
        }
    }
    for (name, r) in m.inputs.iter().chain(m.outputs.iter()) {
        if let Some(r) = r {
            check_range(cx, name, r);
        }
    }
    for (name, p) in &m.params {
        match p {
            ParamValue::Range(r) => check_range(cx, name, r),
            ParamValue::Fixed(x) if !x.is_finite() => {
                cx.error(Location::Declaration(name.clone()), "parameter value must be finite")
            }
            ParamValue::Fixed(_) => {}
        }
    }
}

fn sym_or_num(cx: &mut Ctx<'_>, loc: &Location, b: &Block, key: &str) {
    match b.params.get(key) {
        None => cx.error(loc.clone(), format!("missing parameter `{key}`")),
        Some(Param::Num(_)) => {}
        Some(Param::Sym(s)) => {
            if !cx.m.params.contains_key(s) {
                cx.error(loc.clone(), format!("unknown variable `{s}` in parameter `{key}`"));
            }
        }
    }
}

fn check_block(cx: &mut Ctx<'_>, state: &str, b: &Block, nested: bool) {
    let loc = Location::Block { state: state.into(), block: b.id.clone() };
    match b.kind {
        BlockKind::Constant => sym_or_num(cx, &loc, b, "value"),
        BlockKind::Gain => sym_or_num(cx, &loc, b, "k"),
        BlockKind::Sum => {
            let s = b.signs();
            if s.is_empty() || !s.chars().all(|c| c == '+' || c == '-') {
                cx.error(loc, format!("`signs` must be a non-empty string of + and -, found `{s}`"));
            }
        }
        BlockKind::Product => {
            let s = b.product_ops();
            if s.is_empty() || !s.chars().all(|c| c == '*' || c == '/') {
                cx.error(loc, format!("`ops` must be a non-empty string of * and /, found `{s}`"));
            } else if s.contains('/') {
                cx.warn(loc, "division: the divisor may reach zero");
            }
        }
        BlockKind::Integrator => match b.params.get("init") {
            Some(Param::Num(_)) => {}
            Some(Param::Sym(_)) => cx.error(loc, "`init` must be a number"),
            None => cx.error(loc, "missing parameter `init`"),
        },
        BlockKind::Trigonometry => {
            if !matches!(b.sym("fn"), Some("sin" | "cos" | "tan")) {
                cx.error(loc, "`fn` must be sin, cos or tan");
            }
        }
        BlockKind::Sqrt | BlockKind::Exp => {}
        BlockKind::Saturation => {
            sym_or_num(cx, &loc, b, "lower");
            sym_or_num(cx, &loc, b, "upper");
            if let (Some(lo), Some(hi)) = (b.num("lower"), b.num("upper")) {
                if lo > hi {
                    cx.error(loc, "`lower` exceeds `upper`");
                }
            }
        }
        BlockKind::Switch => sym_or_num(cx, &loc, b, "threshold"),
        BlockKind::Relational => {
            if !matches!(b.sym("op"), Some("<" | "<=" | "==" | "=" | "!=" | ">=" | ">")) {
                cx.error(loc, "`op` must be one of < <= == != >= >");
            }
        }
        BlockKind::Logical => {
            if !matches!(b.sym("op"), Some("and" | "or" | "not")) {
                cx.error(loc.clone(), "`op` must be and, or or not");
            }
            if let Some(n) = b.params.get("inputs") {
                if !matches!(n.as_num(), Some(x) if x >= 1.0 && libm::trunc(x) == x) {
                    cx.error(loc, "`inputs` must be a positive integer");
                }
            }
        }
        BlockKind::Inport | BlockKind::Outport => {
            if nested {
                if !matches!(b.num("port"), Some(x) if x >= 1.0 && libm::trunc(x) == x) {
                    cx.error(loc, "subsystem port blocks need `port=<n>`, n >= 1");
                }
            } else if b.port_var().is_none() {
                cx.error(loc, "missing parameter `var`");
            }
        }
        BlockKind::Subsystem => {}
    }
}

fn check_diagram(cx: &mut Ctx<'_>, state: &str, d: &Diagram, prefix: &str, nested: bool, slash_banned: bool) {
    let mut ids = BTreeSet::new();
    for b in &d.blocks {
        let full = format!("{prefix}{}", b.id);
        let loc = Location::Block { state: state.into(), block: full.clone() };
        if !ids.insert(b.id.as_str()) {
            cx.error(loc.clone(), "duplicate block id");
        }
        if slash_banned && b.id.contains('/') {
            cx.error(loc.clone(), "block ids must not contain `/` in states with subsystems");
        }
        check_block(cx, state, b, nested);
        if let Some(inner) = &b.inner {
            for kind in [BlockKind::Inport, BlockKind::Outport] {
                let mut ports: Vec<usize> = inner
                    .blocks
                    .iter()
                    .filter(|x| x.kind == kind)
                    .filter_map(|x| x.num("port"))
                    .map(|x| x as usize)
                    .collect();
                ports.sort_unstable();
                if ports.iter().enumerate().any(|(i, p)| *p != i + 1) {
                    cx.error(loc.clone(), format!("{kind} ports must be numbered 1..n without gaps"));
                }
            }
            check_diagram(cx, state, inner, &format!("{full}/"), true, slash_banned);
        }
    }
    let mut driven: BTreeMap<PortRef, usize> = BTreeMap::new();
    for l in &d.lines {
        match d.block(&l.src.block) {
            None => cx.error(
                Location::State(state.into()),
                format!("line from unknown block `{prefix}{}`", l.src.block),
            ),
            Some(b) if l.src.port > b.out_arity() => cx.error(
                Location::Block { state: state.into(), block: format!("{prefix}{}", b.id) },
                format!("no out-port {}", l.src.port),
            ),
            Some(_) => {}
        }
        for dst in &l.dsts {
            match d.block(&dst.block) {
                None => cx.error(
                    Location::State(state.into()),
                    format!("line to unknown block `{prefix}{}`", dst.block),
                ),
                Some(b) if dst.port > b.in_arity() => cx.error(
                    Location::Block { state: state.into(), block: format!("{prefix}{}", b.id) },
                    format!("no in-port {}", dst.port),
                ),
                Some(_) => *driven.entry(dst.clone()).or_default() += 1,
            }
        }
    }
    for b in &d.blocks {
        for port in 1..=b.in_arity() {
            let n = driven.get(&PortRef::new(b.id.clone(), port)).copied().unwrap_or(0);
            let loc = Location::Block { state: state.into(), block: format!("{prefix}{}", b.id) };
            if n == 0 {
                cx.error(loc, format!("in-port {port} is not connected"));
            } else if n > 1 {
                cx.error(loc, format!("in-port {port} has {n} drivers"));
            }
        }
    }
}

fn diagram_has_subsystems(d: &Diagram) -> bool {
    d.has_subsystems()
}

/// Checks one state; returns its integrator variables when it is sound
/// enough to flatten.
fn check_state(cx: &mut Ctx<'_>, s: &SlState) -> Option<BTreeMap<String, String>> {
    let before = cx.out.len();
    let sloc = Location::State(s.name.clone());
    if !is_identifier(&s.name) || s.name.contains('.') {
        cx.error(sloc.clone(), "state name is not a valid identifier");
    }
    check_diagram(cx, &s.name, &s.body, "", false, diagram_has_subsystems(&s.body));
    if has_errors(&cx.out[before..]) {
        return None;
    }
    let flat = match flatten_state(s) {
        Ok(f) => f,
        Err(e) => {
            cx.error(sloc, e.message);
            return None;
        }
    };
    let m = cx.m;
    let ivars = flat.integrator_vars();
    let mut carriers: BTreeMap<&str, &str> = BTreeMap::new();
    for (block, v) in &ivars {
        let loc = Location::Block { state: s.name.clone(), block: block.clone() };
        if carriers.insert(v, block).is_some() {
            cx.error(loc.clone(), format!("variable `{v}` is carried by two integrators"));
        }
        if m.is_constant(v) {
            cx.error(loc.clone(), format!("integrator variable `{v}` is an input or parameter"));
        }
        if let Some(why) = reserved_reason(v) {
            cx.error(loc.clone(), format!("reserved name `{v}` {why}"));
        }
        let named = flat.body.block(block).and_then(|b| b.sym("out")).is_some() || m.outputs.contains_key(v);
        if named && !s.vars.contains(v) {
            cx.error(loc, format!("variable `{v}` is missing from the state's variable set"));
        }
    }
    let drivers = flat.body.drivers();
    let mut written = BTreeSet::new();
    for b in flat.blocks() {
        let loc = Location::Block { state: s.name.clone(), block: b.id.clone() };
        let Some(v) = b.port_var() else { continue };
        match b.kind {
            BlockKind::Inport => {
                if !m.inputs.contains_key(v) && !m.params.contains_key(v) {
                    cx.error(loc.clone(), format!("Inport variable `{v}` must be an input or a parameter"));
                }
            }
            BlockKind::Outport => {
                if !m.outputs.contains_key(v) {
                    cx.error(loc.clone(), format!("Outport variable `{v}` is not an output"));
                }
                if !written.insert(v) {
                    cx.error(loc.clone(), format!("output `{v}` is written twice"));
                }
                if let Some((carrier, _)) = ivars.iter().find(|(_, n)| *n == v) {
                    let src = drivers.get(&PortRef::new(b.id.clone(), 1));
                    if src.map(|p| &p.block) != Some(carrier) {
                        cx.error(loc.clone(), format!("`{v}` is an integrator variable but is driven by another block"));
                    }
                }
            }
            _ => continue,
        }
        if !s.vars.contains(v) {
            cx.error(loc, format!("variable `{v}` is missing from the state's variable set"));
        }
    }
    for v in &s.vars {
        let known = m.inputs.contains_key(v)
            || m.outputs.contains_key(v)
            || m.params.contains_key(v)
            || ivars.values().any(|n| n == v);
        if !known {
            cx.error(sloc.clone(), format!("unknown variable `{v}`"));
        }
    }
    Some(ivars)
}

fn check_expr(cx: &mut Ctx<'_>, loc: &Location, e: &Expr, sort: Sort, known: &BTreeSet<String>, what: &str) {
    if !e.well_sorted(sort) {
        let want = if sort == Sort::Bool { "boolean" } else { "real" };
        cx.error(loc.clone(), format!("{what} must be a {want} expression"));
    }
    for v in e.free_vars() {
        if !known.contains(&v) {
            cx.error(loc.clone(), format!("unknown variable `{v}` in {what}"));
        }
    }
    let mut risky = false;
    e.visit(&mut |n| {
        risky |= matches!(n, Expr::Binary(BinaryOp::Div, ..) | Expr::Unary(UnaryOp::Log, _));
    });
    if risky {
        cx.warn(loc.clone(), format!("{what} divides or takes a logarithm; its argument may leave the domain"));
    }
}

/// Runs every check and returns the findings sorted by location.
pub fn validate_model(m: &Gha) -> Vec<Diagnostic> {
    let mut cx = Ctx { m, out: Vec::new() };
    check_declarations(&mut cx);
    let names: BTreeSet<&str> = m.states.iter().map(|s| s.name.as_str()).collect();
    if names.len() != m.states.len() {
        for n in &names {
            if m.states.iter().filter(|s| s.name == *n).count() > 1 {
                cx.error(Location::State(n.to_string()), "duplicate state");
            }
        }
    }
    match &m.initial {
        None if !m.states.is_empty() => cx.error(Location::Model, "no initial state"),
        Some(s) if !names.contains(s.as_str()) => cx.error(Location::Model, format!("unresolved state {s}")),
        _ => {}
    }
    let mut ivars_all: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
    for s in &m.states {
        if let Some(ivars) = check_state(&mut cx, s) {
            let flat = flatten_state(s).expect("checked above");
            for (block, v) in ivars {
                let init = flat.body.block(&block).and_then(|b| b.num("init")).unwrap_or(0.0);
                ivars_all.entry(v).or_default().push((s.name.clone(), init));
            }
        }
    }
    for (v, inits) in &ivars_all {
        let distinct = inits.iter().any(|(_, x)| *x != inits[0].1);
        if distinct && !m.inits.contains_key(v) {
            let states: Vec<&str> = inits.iter().map(|(s, _)| s.as_str()).collect();
            cx.warn(
                Location::Declaration(v.clone()),
                format!("integrators in {} give `{v}` different initial values", states.join(", ")),
            );
        }
    }
    let tracked: BTreeSet<String> = m.outputs.keys().cloned().chain(ivars_all.keys().cloned()).collect();
    let known: BTreeSet<String> =
        tracked.iter().cloned().chain(m.inputs.keys().cloned()).chain(m.params.keys().cloned()).collect();
    for (i, t) in m.transitions.iter().enumerate() {
        let loc = Location::Transition { index: i, src: t.src.clone(), dst: t.dst.clone() };
        for end in [&t.src, &t.dst] {
            if !names.contains(end.as_str()) {
                cx.error(loc.clone(), format!("unresolved state {end}"));
            }
        }
        if let Some(raw) = &t.temporal {
            cx.error(loc.clone(), format!("temporal guard `{raw}` is not supported"));
        }
        check_expr(&mut cx, &loc, &t.cond, Sort::Bool, &known, "guard");
        for (v, e) in &t.actions {
            if !tracked.contains(v) {
                cx.error(loc.clone(), format!("action target `{v}` is not a tracked variable"));
            }
            check_expr(&mut cx, &loc, e, Sort::Real, &known, &format!("action on `{v}`"));
        }
    }
    for (v, x) in &m.inits {
        let loc = Location::Declaration(v.clone());
        if !tracked.contains(v) {
            cx.error(loc.clone(), format!("init of unknown variable `{v}`"));
        }
        if !x.is_finite() {
            cx.error(loc, "initial value must be finite");
        }
    }
    cx.out.sort();
    cx.out.dedup();
    cx.out
}
