//! Removal of `Subsystem` blocks.
//!
//! Inner blocks are lifted to the sl-state level with ids prefixed by the
//! enclosing subsystem path (`Sub/Inner/G`). The `Inport`/`Outport` shells of
//! each subsystem disappear: every in-port is rewired to the block that
//! ultimately drives it.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::model::{Block, BlockKind, Diagram, Gha, Line, PortRef, SlState};

#[derive(Debug, Clone, PartialEq)]
pub struct FlattenError {
    pub state: String,
    pub message: String,
}

impl fmt::Display for FlattenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "state {}: {}", self.state, self.message)
    }
}

impl core::error::Error for FlattenError {}

struct Node {
    block: Block,
    /// Full id of the enclosing subsystem, `None` at sl-state level.
    parent: Option<String>,
}

struct Collected {
    nodes: BTreeMap<String, Node>,
    /// Real blocks in pre-order.
    order: Vec<String>,
    /// Driver of each in-port, both in full ids, before resolution.
    drivers: BTreeMap<PortRef, PortRef>,
}

fn collect(d: &Diagram, prefix: &str, parent: Option<&str>, out: &mut Collected) {
    for b in &d.blocks {
        let id = format!("{prefix}{}", b.id);
        let mut lifted = b.clone();
        lifted.id = id.clone();
        lifted.inner = None;
        let is_shell = parent.is_some() && matches!(b.kind, BlockKind::Inport | BlockKind::Outport);
        if b.kind == BlockKind::Subsystem {
            if let Some(inner) = &b.inner {
                collect(inner, &format!("{id}/"), Some(&id), out);
            }
        } else if !is_shell {
            out.order.push(id.clone());
        }
        out.nodes.insert(id, Node { block: lifted, parent: parent.map(String::from) });
    }
    for l in &d.lines {
        let src = PortRef::new(format!("{prefix}{}", l.src.block), l.src.port);
        for dst in &l.dsts {
            out.drivers.insert(PortRef::new(format!("{prefix}{}", dst.block), dst.port), src.clone());
        }
    }
}

impl Collected {
    /// Follows shells and subsystem ports back to a real block output.
    fn resolve(&self, src: &PortRef, state: &str) -> Result<PortRef, FlattenError> {
        let err = |message: String| FlattenError { state: state.into(), message };
        let mut cur = src.clone();
        for _ in 0..=self.nodes.len() {
            let node = self
                .nodes
                .get(&cur.block)
                .ok_or_else(|| err(format!("line from unknown block `{}`", cur.block)))?;
            let next = match (node.block.kind, &node.parent) {
                (BlockKind::Subsystem, _) => {
                    let shell = self
                        .nodes
                        .iter()
                        .find(|(_, n)| {
                            n.parent.as_deref() == Some(cur.block.as_str())
                                && n.block.kind == BlockKind::Outport
                                && n.block.num("port") == Some(cur.port as f64)
                        })
                        .map(|(id, _)| id.clone())
                        .ok_or_else(|| err(format!("subsystem `{}` has no output {}", cur.block, cur.port)))?;
                    self.driver(&PortRef::new(shell, 1), state)?
                }
                (BlockKind::Inport, Some(parent)) => {
                    let port = node.block.num("port").unwrap_or(0.0) as usize;
                    self.driver(&PortRef::new(parent.clone(), port), state)?
                }
                _ => return Ok(cur),
            };
            cur = next;
        }
        Err(err(format!("cyclic port wiring through `{}`", src.block)))
    }

    fn driver(&self, port: &PortRef, state: &str) -> Result<PortRef, FlattenError> {
        self.drivers.get(port).cloned().ok_or_else(|| FlattenError {
            state: state.into(),
            message: format!("in-port {port} is not connected"),
        })
    }
}

/// Flattens one sl-state. States without subsystems are returned unchanged.
pub fn flatten_state(s: &SlState) -> Result<SlState, FlattenError> {
    if !s.body.has_subsystems() {
        return Ok(s.clone());
    }
    let mut c = Collected { nodes: BTreeMap::new(), order: Vec::new(), drivers: BTreeMap::new() };
    collect(&s.body, "", None, &mut c);
    let mut grouped: BTreeMap<PortRef, BTreeSet<PortRef>> = BTreeMap::new();
    for id in &c.order {
        let block = &c.nodes[id].block;
        for port in 1..=block.in_arity() {
            let dst = PortRef::new(id.clone(), port);
            let Some(src) = c.drivers.get(&dst) else {
                continue;
            };
            let src = c.resolve(src, &s.name)?;
            grouped.entry(src).or_default().insert(dst);
        }
    }
    let blocks = c.order.iter().map(|id| c.nodes[id].block.clone()).collect();
    let lines = grouped.into_iter().map(|(src, dsts)| Line { src, dsts: dsts.into_iter().collect() }).collect();
    Ok(SlState { name: s.name.clone(), vars: s.vars.clone(), body: Diagram { blocks, lines } })
}

pub fn flatten_gha(m: &Gha) -> Result<Gha, FlattenError> {
    let mut out = m.clone();
    for s in &mut out.states {
        *s = flatten_state(s)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_model;

    #[test]
    fn nested_subsystems_are_spliced() {
        let m = parse_model(
            "state S {
  block In kind=Inport var=x
  block A kind=Subsystem {
    block P kind=Inport port=1
    block B kind=Subsystem {
      block Q kind=Inport port=1
      block G kind=Gain k=2
      block R kind=Outport port=1
      line Q.1 -> G.1
      line G.1 -> R.1
    }
    block O kind=Outport port=1
    block O2 kind=Outport port=2
    line P.1 -> B.1, O2.1
    line B.1 -> O.1
  }
  block Out kind=Outport var=y
  block Out2 kind=Outport var=z
  line In.1 -> A.1
  line A.1 -> Out.1
  line A.2 -> Out2.1
}
",
        )
        .unwrap();
        let f = flatten_state(&m.states[0]).unwrap();
        let ids: Vec<&str> = f.blocks().iter().map(|b| b.id.as_str()).collect();
        assert_eq!(ids, ["In", "A/B/G", "Out", "Out2"]);
        let lines: Vec<String> = f
            .lines()
            .iter()
            .map(|l| format!("{} -> {}", l.src, l.dsts.iter().map(|d| format!("{d}")).collect::<Vec<_>>().join(",")))
            .collect();
        assert_eq!(lines, ["A/B/G.1 -> Out.1", "In.1 -> A/B/G.1,Out2.1"]);
        assert!(!f.body.has_subsystems());
    }

    #[test]
    fn identity_without_subsystems() {
        let m = parse_model("state S {\n  block C kind=Constant value=1\n  block O kind=Outport var=y\n  line C.1 -> O.1\n}\n")
            .unwrap();
        assert_eq!(flatten_state(&m.states[0]).unwrap(), m.states[0]);
    }
}
