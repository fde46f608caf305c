//! SMT-LIB2 rendering of constraint systems in the ODE dialect
//! (`define-ode` / `integral`), and a small reader used to re-check emitted
//! documents.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write};

use crate::expr::{write_real, BoolOp, Expr};
use crate::model::{ParamValue, Range};
use crate::unroll::{Body, ConstDecl, ConstraintSystem, StepVar};

pub const LOGIC: &str = "QF_NRA_ODE";

fn write_expr(out: &mut String, e: &Expr<StepVar>) -> fmt::Result {
    match e {
        Expr::Cmp(op, a, b) => {
            // Mode numbers are integers.
            if let (Expr::Var(sv @ StepVar::Mode(_)), Expr::Const(c)) = (&**a, &**b) {
                return write!(out, "({} {sv} {})", op.smt_name(), *c as i64);
            }
            write!(out, "({} ", op.smt_name())?;
            write_expr(out, a)?;
            out.push(' ');
            write_expr(out, b)?;
            out.push(')');
            Ok(())
        }
        Expr::Const(c) => write_real(out, *c),
        Expr::Var(v) => write!(out, "{v}"),
        Expr::Unary(op, a) => {
            write!(out, "({} ", op.name())?;
            write_expr(out, a)?;
            out.push(')');
            Ok(())
        }
        Expr::Binary(op, a, b) => {
            write!(out, "({} ", op.smt_name())?;
            write_expr(out, a)?;
            out.push(' ');
            write_expr(out, b)?;
            out.push(')');
            Ok(())
        }
        Expr::Bool(op, args) => {
            if args.is_empty() {
                out.push_str(if *op == BoolOp::And { "true" } else { "false" });
                return Ok(());
            }
            if args.len() == 1 && *op != BoolOp::Not {
                return write_expr(out, &args[0]);
            }
            out.push_str(match op {
                BoolOp::And => "(and",
                BoolOp::Or => "(or",
                BoolOp::Not => "(not",
            });
            for a in args {
                out.push(' ');
                write_expr(out, a)?;
            }
            out.push(')');
            Ok(())
        }
        Expr::Ite(c, a, b) => {
            out.push_str("(ite ");
            write_expr(out, c)?;
            out.push(' ');
            write_expr(out, a)?;
            out.push(' ');
            write_expr(out, b)?;
            out.push(')');
            Ok(())
        }
    }
}

/// Renders a step-variable expression in prefix form.
pub fn render(e: &Expr<StepVar>) -> String {
    let mut s = String::new();
    write_expr(&mut s, e).expect("writing to a String");
    s
}

fn declare(out: &mut String, name: &str, sort: &str) {
    let _ = writeln!(out, "(declare-fun {name} () {sort})");
}

fn bound(out: &mut String, name: &str, r: &Range) {
    let _ = write!(out, "(assert (and (<= ");
    let _ = write_real(out, r.lo);
    let _ = write!(out, " {name}) (<= {name} ");
    let _ = write_real(out, r.hi);
    out.push_str(")))\n");
}

/// Renders the document for `cs`, optionally asserting `query` (normally
/// the negated property). Output is byte-stable for equal inputs.
pub fn emit_smt(cs: &ConstraintSystem, query: Option<&Expr<StepVar>>, precision: f64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(set-logic {LOGIC})");
    out.push_str("(set-option :precision ");
    let _ = write_real(&mut out, precision);
    out.push_str(")\n");

    let ode_vars: BTreeSet<&String> = cs.flows.iter().flat_map(|f| f.state_vars.iter()).collect();
    for sv in cs.declared() {
        if let StepVar::Const(c) = &sv {
            if ode_vars.contains(c) {
                continue;
            }
        }
        let sort = if matches!(sv, StepVar::Mode(_)) { "Int" } else { "Real" };
        if matches!(sv, StepVar::Clock(0)) {
            for v in &ode_vars {
                declare(&mut out, v, "Real");
            }
        }
        declare(&mut out, &sv.to_string(), sort);
    }

    for f in &cs.flows {
        if f.state_vars.is_empty() {
            continue;
        }
        let _ = write!(out, "(define-ode flow_{} (", f.state_name);
        for (j, v) in f.state_vars.iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            let _ = write!(out, "(= d/dt[{v}] {})", f.derivs[v].to_prefix());
        }
        out.push_str("))\n");
    }

    // With k = 0 the only mode is fixed by the initial condition.
    let n = cs.modes.len();
    for i in (1..=cs.k + 1).filter(|_| cs.k > 0) {
        let _ = writeln!(out, "(assert (and (<= 0 s_{i}) (<= s_{i} {})))", n.saturating_sub(1));
    }
    for i in 1..=cs.k {
        bound(&mut out, &format!("d_{i}"), &Range::new(0.0, cs.d_max));
    }
    for (name, decl) in &cs.constants {
        match decl {
            ConstDecl::Input(Some(r)) | ConstDecl::Param(ParamValue::Range(r)) => bound(&mut out, name, r),
            ConstDecl::Param(ParamValue::Fixed(x)) => {
                let _ = write!(out, "(assert (= {name} ");
                let _ = write_real(&mut out, *x);
                out.push_str("))\n");
            }
            ConstDecl::Input(None) => {}
        }
    }
    for (name, r) in &cs.output_ranges {
        for i in 1..=cs.k + 1 {
            bound(&mut out, &StepVar::Begin(name.clone(), i).to_string(), r);
            if i <= cs.k {
                bound(&mut out, &StepVar::End(name.clone(), i).to_string(), r);
            }
        }
    }

    for a in &cs.assertions {
        let _ = writeln!(out, "; {} {} {}", a.class, a.step, a.subject);
        out.push_str("(assert ");
        let body = match &a.body {
            Body::Formula(e) => render(e),
            Body::Flow { state, step, vars } => {
                let ends: Vec<String> = vars.iter().map(|v| StepVar::End(v.clone(), *step).to_string()).collect();
                let begins: Vec<String> = vars.iter().map(|v| StepVar::Begin(v.clone(), *step).to_string()).collect();
                format!(
                    "(= [{}] (integral 0. d_{step} [{}] flow_{state}))",
                    ends.join(" "),
                    begins.join(" ")
                )
            }
        };
        match &a.hypothesis {
            Some(h) => {
                let _ = write!(out, "(=> {} {body})", render(h));
            }
            None => out.push_str(&body),
        }
        out.push_str(")\n");
    }
    if let Some(q) = query {
        out.push_str("; query\n(assert ");
        out.push_str(&render(q));
        out.push_str(")\n");
    }
    out.push_str("(check-sat)\n(exit)\n");
    out
}

// ---------------------------------------------------------------------------
// Reader

#[derive(Debug, Clone, PartialEq)]
pub enum SExpr {
    Atom(String),
    List(Vec<SExpr>),
    /// `[a b c]`, the dialect's variable vectors.
    Vector(Vec<SExpr>),
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let seq = |f: &mut fmt::Formatter<'_>, open: char, xs: &[SExpr], close: char| {
            f.write_char(open)?;
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    f.write_char(' ')?;
                }
                write!(f, "{x}")?;
            }
            f.write_char(close)
        };
        match self {
            SExpr::Atom(a) => f.write_str(a),
            SExpr::List(xs) => seq(f, '(', xs, ')'),
            SExpr::Vector(xs) => seq(f, '[', xs, ']'),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadError {
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for ReadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "offset {}: {}", self.offset, self.message)
    }
}

impl core::error::Error for ReadError {}

/// Reads a sequence of s-expressions. `;` starts a comment; `d/dt[x]` is a
/// single atom.
pub fn read_sexprs(text: &str) -> Result<Vec<SExpr>, ReadError> {
    let bytes = text.as_bytes();
    let mut stack: Vec<(u8, usize, Vec<SExpr>)> = Vec::new();
    let mut top = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b';' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            b' ' | b'\t' | b'\r' | b'\n' => {}
            b'(' | b'[' => stack.push((c, i, Vec::new())),
            b')' | b']' => {
                let want = if c == b')' { b'(' } else { b'[' };
                let (open, _, items) =
                    stack.pop().ok_or(ReadError { offset: i, message: "unbalanced closing bracket".into() })?;
                if open != want {
                    return Err(ReadError { offset: i, message: "mismatched brackets".into() });
                }
                let node = if open == b'(' { SExpr::List(items) } else { SExpr::Vector(items) };
                match stack.last_mut() {
                    Some((_, _, parent)) => parent.push(node),
                    None => top.push(node),
                }
            }
            _ => {
                let start = i;
                if text[i..].starts_with("d/dt[") {
                    let close = text[i..]
                        .find(']')
                        .ok_or(ReadError { offset: i, message: "unterminated d/dt[".into() })?;
                    i += close + 1;
                } else {
                    while i < bytes.len() && !b" \t\r\n()[];".contains(&bytes[i]) {
                        i += 1;
                    }
                }
                let atom = SExpr::Atom(text[start..i].to_string());
                match stack.last_mut() {
                    Some((_, _, parent)) => parent.push(atom),
                    None => top.push(atom),
                }
                continue;
            }
        }
        i += 1;
    }
    if let Some((_, at, _)) = stack.last() {
        return Err(ReadError { offset: *at, message: "unclosed bracket".into() });
    }
    Ok(top)
}

/// Facts about a document accepted by [`check_document`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DocumentSummary {
    pub declared: BTreeSet<String>,
    pub flows: BTreeSet<String>,
    pub asserts: usize,
}

const OPERATORS: [&str; 27] = [
    "and", "or", "not", "=>", "ite", "=", "<", "<=", ">", ">=", "+", "-", "*", "/", "^", "sin", "cos", "tan", "exp",
    "log", "sqrt", "abs", "min", "max", "integral", "true", "false",
];

fn is_number(a: &str) -> bool {
    !a.is_empty() && a.bytes().all(|b| b.is_ascii_digit() || b == b'.') && a.bytes().next().unwrap().is_ascii_digit()
}

/// Re-reads an emitted document: every command is known, every symbol used
/// is declared (or an operator, literal or flow name), and printing the
/// parsed form reads back identically.
pub fn check_document(text: &str) -> Result<DocumentSummary, String> {
    let items = read_sexprs(text).map_err(|e| e.to_string())?;
    let reprinted: Vec<String> = items.iter().map(|x| x.to_string()).collect();
    let again = read_sexprs(&reprinted.join("\n")).map_err(|e| e.to_string())?;
    if again != items {
        return Err("document does not round-trip through the reader".into());
    }
    let mut sum = DocumentSummary::default();
    let mut pending: Vec<&SExpr> = Vec::new();
    let mut saw_check = false;
    for item in &items {
        let SExpr::List(xs) = item else {
            return Err(format!("stray atom `{item}` at top level"));
        };
        let head = match xs.first() {
            Some(SExpr::Atom(h)) => h.as_str(),
            _ => return Err("command without a name".into()),
        };
        match (head, xs.len()) {
            ("set-logic", 2) | ("set-option", 3) | ("exit", 1) => {}
            ("check-sat", 1) => saw_check = true,
            ("declare-fun", 4) => {
                let SExpr::Atom(name) = &xs[1] else { return Err("bad declare-fun".into()) };
                if !matches!(&xs[3], SExpr::Atom(s) if s == "Real" || s == "Int") {
                    return Err(format!("unsupported sort for `{name}`"));
                }
                if !sum.declared.insert(name.clone()) {
                    return Err(format!("`{name}` declared twice"));
                }
            }
            ("define-ode", 3) => {
                let SExpr::Atom(name) = &xs[1] else { return Err("bad define-ode".into()) };
                sum.flows.insert(name.clone());
                pending.push(&xs[2]);
            }
            ("assert", 2) => {
                sum.asserts += 1;
                pending.push(&xs[1]);
            }
            _ => return Err(format!("unknown or malformed command `{head}`")),
        }
    }
    if !saw_check {
        return Err("missing (check-sat)".into());
    }
    fn scan(x: &SExpr, sum: &DocumentSummary) -> Result<(), String> {
        match x {
            SExpr::Atom(a) => {
                let known = is_number(a)
                    || OPERATORS.contains(&a.as_str())
                    || sum.declared.contains(a)
                    || sum.flows.contains(a)
                    || a.strip_prefix("d/dt[").and_then(|r| r.strip_suffix(']')).is_some_and(|v| sum.declared.contains(v));
                if known {
                    Ok(())
                } else {
                    Err(format!("undeclared symbol `{a}`"))
                }
            }
            SExpr::List(xs) | SExpr::Vector(xs) => xs.iter().try_for_each(|x| scan(x, sum)),
        }
    }
    for p in pending {
        scan(p, &sum)?;
    }
    Ok(sum)
}
