//! Flow relations: the ODE system and the algebraic outputs of each sl-state,
//! obtained by composing the block functions along the lines.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::expr::{BinaryOp, BoolOp, CmpOp, Expr, UnaryOp};
use crate::model::{Block, BlockKind, Diagram, Gha, Param, PortRef, SlState};

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSystem {
    pub state_name: String,
    /// Integrator variables of the state, sorted.
    pub state_vars: Vec<String>,
    /// `d/dt[v]` for every state variable, over state variables and run constants.
    pub derivs: BTreeMap<String, Expr>,
    /// `init=` of the integrator carrying each state variable.
    pub init: BTreeMap<String, f64>,
    /// Outputs written by the state that are not state variables.
    pub algebraic: BTreeMap<String, Expr>,
}

impl FlowSystem {
    pub fn is_state_var(&self, v: &str) -> bool {
        self.derivs.contains_key(v)
    }
}

impl fmt::Display for FlowSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "state {}", self.state_name)?;
        for (v, e) in &self.derivs {
            writeln!(f, "  d/dt[{v}] = {}", e.to_prefix())?;
        }
        for (v, e) in &self.algebraic {
            writeln!(f, "  {v} = {}", e.to_prefix())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FrError {
    AlgebraicLoop { state: String, blocks: Vec<String> },
    Unconnected { state: String, port: PortRef },
    BadBlock { state: String, block: String, message: String },
}

impl fmt::Display for FrError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrError::AlgebraicLoop { state, blocks } => {
                write!(f, "state {state}: algebraic loop [{}]", blocks.join(", "))
            }
            FrError::Unconnected { state, port } => write!(f, "state {state}: in-port {port} is not connected"),
            FrError::BadBlock { state, block, message } => write!(f, "state {state}, block {block}: {message}"),
        }
    }
}

impl core::error::Error for FrError {}

/// Evaluation order of the blocks: every block after the blocks feeding it,
/// except that integrator inputs do not constrain the order. Ties go to the
/// block declared first. On a cycle, returns the ids left over, sorted.
pub fn block_order(d: &Diagram) -> Result<Vec<usize>, Vec<String>> {
    let index: BTreeMap<&str, usize> = d.blocks.iter().enumerate().map(|(i, b)| (b.id.as_str(), i)).collect();
    let n = d.blocks.len();
    let mut indeg = alloc::vec![0usize; n];
    let mut succ: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    for l in &d.lines {
        let Some(&s) = index.get(l.src.block.as_str()) else { continue };
        for dst in &l.dsts {
            let Some(&t) = index.get(dst.block.as_str()) else { continue };
            if d.blocks[t].kind == BlockKind::Integrator {
                continue;
            }
            succ[s].push(t);
            indeg[t] += 1;
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop_first() {
        order.push(i);
        for &t in &succ[i] {
            indeg[t] -= 1;
            if indeg[t] == 0 {
                ready.insert(t);
            }
        }
    }
    if order.len() < n {
        let mut left: Vec<String> = (0..n).filter(|i| indeg[*i] > 0).map(|i| d.blocks[i].id.clone()).collect();
        left.sort();
        return Err(left);
    }
    Ok(order)
}

/// A numeric block parameter, or the name of a model parameter.
pub fn param_expr(b: &Block, key: &str) -> Option<Expr> {
    match b.params.get(key)? {
        Param::Num(x) => Some(Expr::Const(*x)),
        Param::Sym(s) => Some(Expr::Var(s.clone())),
    }
}

fn truthy(e: Expr) -> Expr {
    Expr::not(Expr::eq(e, Expr::Const(0.0)))
}

fn indicator(c: Expr) -> Expr {
    Expr::ite(c, Expr::Const(1.0), Expr::Const(0.0))
}

/// Symbolic output of a non-port block given its inputs.
pub fn block_function(b: &Block, ins: &[Expr]) -> Result<Expr, String> {
    let need = |key: &str| param_expr(b, key).ok_or_else(|| format!("missing parameter `{key}`"));
    let u = |i: usize| ins.get(i).cloned().ok_or_else(|| format!("missing input {}", i + 1));
    Ok(match b.kind {
        BlockKind::Constant => need("value")?,
        BlockKind::Gain => Expr::binary(BinaryOp::Mul, need("k")?, u(0)?),
        BlockKind::Sum => {
            let mut acc: Option<Expr> = None;
            for (i, c) in b.signs().chars().enumerate() {
                let x = u(i)?;
                acc = Some(match (acc, c) {
                    (None, '-') => Expr::neg(x),
                    (None, _) => x,
                    (Some(a), '-') => Expr::binary(BinaryOp::Sub, a, x),
                    (Some(a), _) => Expr::binary(BinaryOp::Add, a, x),
                });
            }
            acc.unwrap_or(Expr::Const(0.0))
        }
        BlockKind::Product => {
            let mut acc: Option<Expr> = None;
            for (i, c) in b.product_ops().chars().enumerate() {
                let x = u(i)?;
                acc = Some(match (acc, c) {
                    (None, '/') => Expr::binary(BinaryOp::Div, Expr::Const(1.0), x),
                    (None, _) => x,
                    (Some(a), '/') => Expr::binary(BinaryOp::Div, a, x),
                    (Some(a), _) => Expr::binary(BinaryOp::Mul, a, x),
                });
            }
            acc.unwrap_or(Expr::Const(1.0))
        }
        BlockKind::Trigonometry => {
            let op = match b.sym("fn") {
                Some("sin") => UnaryOp::Sin,
                Some("cos") => UnaryOp::Cos,
                Some("tan") => UnaryOp::Tan,
                _ => return Err("`fn` must be sin, cos or tan".into()),
            };
            Expr::unary(op, u(0)?)
        }
        BlockKind::Sqrt => Expr::unary(UnaryOp::Sqrt, u(0)?),
        BlockKind::Exp => Expr::unary(UnaryOp::Exp, u(0)?),
        BlockKind::Saturation => Expr::binary(
            BinaryOp::Max,
            need("lower")?,
            Expr::binary(BinaryOp::Min, need("upper")?, u(0)?),
        ),
        BlockKind::Switch => Expr::ite(Expr::cmp(CmpOp::Ge, u(1)?, need("threshold")?), u(0)?, u(2)?),
        BlockKind::Relational => {
            let op = b.sym("op").ok_or("missing parameter `op`")?;
            let c = if op == "!=" {
                Expr::not(Expr::eq(u(0)?, u(1)?))
            } else {
                let op = CmpOp::from_infix(op).ok_or_else(|| format!("unknown relational operator `{op}`"))?;
                Expr::cmp(op, u(0)?, u(1)?)
            };
            indicator(c)
        }
        BlockKind::Logical => {
            let args: Vec<Expr> = ins.iter().cloned().map(truthy).collect();
            let c = match b.sym("op") {
                Some("and") => Expr::Bool(BoolOp::And, args),
                Some("or") => Expr::Bool(BoolOp::Or, args),
                Some("not") => Expr::not(truthy(u(0)?)),
                _ => return Err("`op` must be and, or or not".into()),
            };
            indicator(c)
        }
        BlockKind::Integrator | BlockKind::Inport | BlockKind::Outport | BlockKind::Subsystem => {
            return Err(format!("{} has no block function", b.kind));
        }
    })
}

/// Derives the flow relation of a flattened sl-state.
pub fn derive_state(s: &SlState) -> Result<FlowSystem, FrError> {
    let bad = |block: &str, message: String| FrError::BadBlock { state: s.name.clone(), block: block.into(), message };
    let order = block_order(&s.body)
        .map_err(|blocks| FrError::AlgebraicLoop { state: s.name.clone(), blocks })?;
    let drivers = s.body.drivers();
    let ivars = s.integrator_vars();
    let mut outs: BTreeMap<&str, Expr> = BTreeMap::new();
    let mut fs = FlowSystem {
        state_name: s.name.clone(),
        state_vars: Vec::new(),
        derivs: BTreeMap::new(),
        init: BTreeMap::new(),
        algebraic: BTreeMap::new(),
    };
    for i in order {
        let b = &s.body.blocks[i];
        let input = |port: usize, outs: &BTreeMap<&str, Expr>| -> Result<Expr, FrError> {
            let dst = PortRef::new(b.id.clone(), port);
            let src = drivers
                .get(&dst)
                .ok_or_else(|| FrError::Unconnected { state: s.name.clone(), port: dst.clone() })?;
            outs.get(src.block.as_str())
                .cloned()
                .ok_or_else(|| FrError::Unconnected { state: s.name.clone(), port: dst })
        };
        match b.kind {
            BlockKind::Subsystem => return Err(bad(&b.id, "subsystem left after flattening".into())),
            BlockKind::Inport => {
                let v = b.port_var().ok_or_else(|| bad(&b.id, "missing parameter `var`".into()))?;
                outs.insert(&b.id, Expr::Var(v.into()));
            }
            BlockKind::Integrator => {
                outs.insert(&b.id, Expr::Var(ivars[&b.id].clone()));
            }
            BlockKind::Outport => {
                let v = b.port_var().ok_or_else(|| bad(&b.id, "missing parameter `var`".into()))?;
                let e = input(1, &outs)?;
                if !ivars.values().any(|n| n == v) {
                    fs.algebraic.insert(v.into(), e.fold());
                }
            }
            _ => {
                let ins = (1..=b.in_arity()).map(|p| input(p, &outs)).collect::<Result<Vec<_>, _>>()?;
                let e = block_function(b, &ins).map_err(|m| bad(&b.id, m))?;
                outs.insert(&b.id, e);
            }
        }
    }
    // Integrator inputs are read last: they may be fed by blocks ordered after them.
    for b in s.body.blocks.iter().filter(|b| b.kind == BlockKind::Integrator) {
        let dst = PortRef::new(b.id.clone(), 1);
        let src = drivers
            .get(&dst)
            .ok_or_else(|| FrError::Unconnected { state: s.name.clone(), port: dst.clone() })?;
        let e = outs
            .get(src.block.as_str())
            .cloned()
            .ok_or_else(|| FrError::Unconnected { state: s.name.clone(), port: dst })?;
        let v = ivars[&b.id].clone();
        let init = b.num("init").ok_or_else(|| bad(&b.id, "missing parameter `init`".into()))?;
        fs.derivs.insert(v.clone(), e.fold());
        fs.init.insert(v, init);
    }
    fs.state_vars = fs.derivs.keys().cloned().collect();
    Ok(fs)
}

/// Flow relations of all states of a flattened model, sorted by state name.
pub fn derive_fr(m: &Gha) -> Result<Vec<FlowSystem>, FrError> {
    let mut out = m.states.iter().map(derive_state).collect::<Result<Vec<_>, _>>()?;
    out.sort_by(|a, b| a.state_name.cmp(&b.state_name));
    Ok(out)
}
