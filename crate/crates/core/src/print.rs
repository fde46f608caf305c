//! Canonical rendering of models in the document format read by
//! [`crate::parse::parse_model`].

use alloc::collections::BTreeMap;
use alloc::string::String;
use core::fmt::{self, Write};

use crate::model::{Diagram, Gha, ParamValue, Range};

fn range(out: &mut String, r: &Option<Range>) -> fmt::Result {
    if let Some(r) = r {
        write!(out, " in [{}, {}]", r.lo, r.hi)?;
    }
    Ok(())
}

fn decls(out: &mut String, head: &str, vars: &BTreeMap<String, Option<Range>>) -> fmt::Result {
    if vars.is_empty() {
        return Ok(());
    }
    writeln!(out, "{head} {{")?;
    for (name, r) in vars {
        write!(out, "  {name}")?;
        range(out, r)?;
        out.push('\n');
    }
    out.push_str("}\n");
    Ok(())
}

fn diagram(out: &mut String, d: &Diagram, depth: usize) -> fmt::Result {
    let pad = "  ".repeat(depth);
    for b in &d.blocks {
        write!(out, "{pad}block {} kind={}", b.id, b.kind)?;
        for (k, v) in &b.params {
            write!(out, " {k}={v}")?;
        }
        match &b.inner {
            Some(inner) => {
                out.push_str(" {\n");
                diagram(out, inner, depth + 1)?;
                writeln!(out, "{pad}}}")?;
            }
            None => out.push('\n'),
        }
    }
    for l in &d.lines {
        write!(out, "{pad}line {} ->", l.src)?;
        for (i, dst) in l.dsts.iter().enumerate() {
            write!(out, "{} {dst}", if i == 0 { "" } else { "," })?;
        }
        out.push('\n');
    }
    Ok(())
}

/// Renders `m` so that parsing the result gives back an equal model.
pub fn print_model(m: &Gha) -> String {
    let mut out = String::new();
    write_model(&mut out, m).expect("writing to a String");
    out
}

fn write_model(out: &mut String, m: &Gha) -> fmt::Result {
    decls(out, "inputs", &m.inputs)?;
    decls(out, "outputs", &m.outputs)?;
    if !m.params.is_empty() {
        out.push_str("params {\n");
        for (name, p) in &m.params {
            match p {
                ParamValue::Fixed(x) => writeln!(out, "  {name} = {x}")?,
                ParamValue::Range(r) => writeln!(out, "  {name} in [{}, {}]", r.lo, r.hi)?,
            }
        }
        out.push_str("}\n");
    }
    for (name, x) in &m.inits {
        writeln!(out, "init {name} = {x}")?;
    }
    if let Some(init) = &m.initial {
        writeln!(out, "initial {init}")?;
    }
    for s in &m.states {
        writeln!(out, "state {} {{", s.name)?;
        if !s.vars.is_empty() {
            out.push_str("  vars ");
            for (i, v) in s.vars.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(v);
            }
            out.push('\n');
        }
        diagram(out, &s.body, 1)?;
        out.push_str("}\n");
    }
    for t in &m.transitions {
        write!(out, "transition {} -> {}", t.src, t.dst)?;
        if let Some(raw) = &t.temporal {
            write!(out, " when {raw}")?;
        } else if !t.cond.is_true() {
            write!(out, " when {}", t.cond)?;
        }
        for (i, (v, e)) in t.actions.iter().enumerate() {
            write!(out, "{} {v} := {e}", if i == 0 { " do" } else { ";" })?;
        }
        out.push('\n');
    }
    Ok(())
}
