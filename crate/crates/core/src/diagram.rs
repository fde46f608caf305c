//! Direct numeric evaluation of a flattened block diagram.
//!
//! This evaluator propagates numbers through the blocks on demand and never
//! builds expressions. The simulator runs on it, which keeps simulated traces
//! independent of the symbolic flow relations they are checked against.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::model::{Block, BlockKind, Param, SlState};

#[derive(Debug, Clone, PartialEq)]
pub struct DiagramError {
    pub state: String,
    pub block: String,
    pub message: String,
}

impl fmt::Display for DiagramError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "state {}, block {}: {}", self.state, self.block, self.message)
    }
}

impl core::error::Error for DiagramError {}

/// A diagram prepared for repeated evaluation.
#[derive(Debug, Clone)]
pub struct CompiledDiagram {
    state: String,
    blocks: Vec<Block>,
    /// For each block and in-port, the index of the driving block.
    inputs: Vec<Vec<Option<usize>>>,
    /// Variable carried by each integrator block.
    carried: Vec<Option<String>>,
}

/// Values produced by one evaluation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Evaluation {
    /// Variable written by each `Outport`.
    pub outports: BTreeMap<String, f64>,
    /// Input of each integrator, keyed by the variable it carries.
    pub derivs: BTreeMap<String, f64>,
}

impl CompiledDiagram {
    pub fn new(s: &SlState) -> Result<Self, DiagramError> {
        let err = |block: &str, message: String| DiagramError { state: s.name.clone(), block: block.into(), message };
        let index: BTreeMap<&str, usize> = s.blocks().iter().enumerate().map(|(i, b)| (b.id.as_str(), i)).collect();
        let names = s.integrator_vars();
        let mut inputs = Vec::new();
        let mut carried = Vec::new();
        for b in s.blocks() {
            if b.kind == BlockKind::Subsystem {
                return Err(err(&b.id, "diagram is not flattened".into()));
            }
            inputs.push(alloc::vec![None; b.in_arity()]);
            carried.push(names.get(&b.id).cloned());
        }
        for l in s.lines() {
            let src = *index
                .get(l.src.block.as_str())
                .ok_or_else(|| err(&l.src.block, "unknown block".into()))?;
            for d in &l.dsts {
                let dst = *index.get(d.block.as_str()).ok_or_else(|| err(&d.block, "unknown block".into()))?;
                let slot = inputs[dst]
                    .get_mut(d.port - 1)
                    .ok_or_else(|| err(&d.block, format!("no in-port {}", d.port)))?;
                *slot = Some(src);
            }
        }
        Ok(CompiledDiagram { state: s.name.clone(), blocks: s.blocks().to_vec(), inputs, carried })
    }

    /// Evaluates the diagram. `env` supplies input, parameter and integrator
    /// variable values.
    pub fn eval(&self, env: &dyn Fn(&str) -> Option<f64>) -> Result<Evaluation, DiagramError> {
        let n = self.blocks.len();
        let mut memo: Vec<Option<f64>> = alloc::vec![None; n];
        let mut busy = alloc::vec![false; n];
        let mut out = Evaluation::default();
        for i in 0..n {
            let b = &self.blocks[i];
            match b.kind {
                BlockKind::Outport => {
                    let x = self.input(i, 0, env, &mut memo, &mut busy)?;
                    if let Some(v) = b.port_var() {
                        out.outports.insert(v.into(), x);
                    }
                }
                BlockKind::Integrator => {
                    let x = self.input(i, 0, env, &mut memo, &mut busy)?;
                    out.derivs.insert(self.carried[i].clone().unwrap_or_default(), x);
                }
                _ => {}
            }
        }
        Ok(out)
    }

    fn fail(&self, i: usize, message: String) -> DiagramError {
        DiagramError { state: self.state.clone(), block: self.blocks[i].id.clone(), message }
    }

    fn input(
        &self,
        i: usize,
        port: usize,
        env: &dyn Fn(&str) -> Option<f64>,
        memo: &mut [Option<f64>],
        busy: &mut [bool],
    ) -> Result<f64, DiagramError> {
        let src = self.inputs[i][port].ok_or_else(|| self.fail(i, format!("in-port {} is not connected", port + 1)))?;
        self.output(src, env, memo, busy)
    }

    fn param(&self, i: usize, key: &str, env: &dyn Fn(&str) -> Option<f64>) -> Result<f64, DiagramError> {
        match self.blocks[i].params.get(key) {
            Some(Param::Num(x)) => Ok(*x),
            Some(Param::Sym(name)) => env(name).ok_or_else(|| self.fail(i, format!("no value for `{name}`"))),
            None => Err(self.fail(i, format!("missing parameter `{key}`"))),
        }
    }

    fn output(
        &self,
        i: usize,
        env: &dyn Fn(&str) -> Option<f64>,
        memo: &mut [Option<f64>],
        busy: &mut [bool],
    ) -> Result<f64, DiagramError> {
        if let Some(x) = memo[i] {
            return Ok(x);
        }
        let b = &self.blocks[i];
        let lookup = |name: &str| env(name).ok_or_else(|| self.fail(i, format!("no value for `{name}`")));
        if b.kind == BlockKind::Integrator {
            let x = lookup(self.carried[i].as_deref().unwrap_or_default())?;
            memo[i] = Some(x);
            return Ok(x);
        }
        if busy[i] {
            return Err(self.fail(i, "algebraic loop".into()));
        }
        busy[i] = true;
        let mut u = Vec::with_capacity(self.inputs[i].len());
        for p in 0..self.inputs[i].len() {
            u.push(self.input(i, p, env, memo, busy)?);
        }
        let nz = |x: f64| if x != 0.0 { 1.0 } else { 0.0 };
        let x = match b.kind {
            BlockKind::Inport => lookup(b.port_var().unwrap_or_default())?,
            BlockKind::Constant => self.param(i, "value", env)?,
            BlockKind::Gain => self.param(i, "k", env)? * u[0],
            BlockKind::Sum => b
                .signs()
                .chars()
                .zip(&u)
                .fold(0.0, |acc, (c, x)| if c == '-' { acc - x } else { acc + x }),
            BlockKind::Product => b
                .product_ops()
                .chars()
                .zip(&u)
                .fold(1.0, |acc, (c, x)| if c == '/' { acc / x } else { acc * x }),
            BlockKind::Trigonometry => match b.sym("fn") {
                Some("sin") => libm::sin(u[0]),
                Some("cos") => libm::cos(u[0]),
                Some("tan") => libm::tan(u[0]),
                _ => return Err(self.fail(i, "`fn` must be sin, cos or tan".into())),
            },
            BlockKind::Sqrt => libm::sqrt(u[0]),
            BlockKind::Exp => libm::exp(u[0]),
            BlockKind::Saturation => {
                let (lo, hi) = (self.param(i, "lower", env)?, self.param(i, "upper", env)?);
                if u[0] < lo {
                    lo
                } else if u[0] > hi {
                    hi
                } else {
                    u[0]
                }
            }
            BlockKind::Switch => {
                if u[1] >= self.param(i, "threshold", env)? {
                    u[0]
                } else {
                    u[2]
                }
            }
            BlockKind::Relational => {
                let holds = match b.sym("op") {
                    Some("<") => u[0] < u[1],
                    Some("<=") => u[0] <= u[1],
                    Some("==") | Some("=") => u[0] == u[1],
                    Some("!=") => u[0] != u[1],
                    Some(">=") => u[0] >= u[1],
                    Some(">") => u[0] > u[1],
                    _ => return Err(self.fail(i, "unknown relational operator".into())),
                };
                if holds {
                    1.0
                } else {
                    0.0
                }
            }
            BlockKind::Logical => match b.sym("op") {
                Some("and") => u.iter().map(|x| nz(*x)).fold(1.0, f64::min),
                Some("or") => u.iter().map(|x| nz(*x)).fold(0.0, f64::max),
                Some("not") => 1.0 - nz(u[0]),
                _ => return Err(self.fail(i, "`op` must be and, or or not".into())),
            },
            BlockKind::Outport | BlockKind::Integrator | BlockKind::Subsystem => {
                return Err(self.fail(i, format!("{} has no output", b.kind)));
            }
        };
        busy[i] = false;
        memo[i] = Some(x);
        Ok(x)
    }
}
