//! The automaton model: sl-states made of blocks and lines, transitions
//! between them, and the declarations of the surrounding chart.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::expr::Expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BlockKind {
    Constant,
    Gain,
    Sum,
    Product,
    Integrator,
    Trigonometry,
    Sqrt,
    Exp,
    Saturation,
    Switch,
    Relational,
    Logical,
    Inport,
    Outport,
    Subsystem,
}

impl BlockKind {
    pub const ALL: [BlockKind; 15] = [
        BlockKind::Constant,
        BlockKind::Gain,
        BlockKind::Sum,
        BlockKind::Product,
        BlockKind::Integrator,
        BlockKind::Trigonometry,
        BlockKind::Sqrt,
        BlockKind::Exp,
        BlockKind::Saturation,
        BlockKind::Switch,
        BlockKind::Relational,
        BlockKind::Logical,
        BlockKind::Inport,
        BlockKind::Outport,
        BlockKind::Subsystem,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BlockKind::Constant => "Constant",
            BlockKind::Gain => "Gain",
            BlockKind::Sum => "Sum",
            BlockKind::Product => "Product",
            BlockKind::Integrator => "Integrator",
            BlockKind::Trigonometry => "Trigonometry",
            BlockKind::Sqrt => "Sqrt",
            BlockKind::Exp => "Exp",
            BlockKind::Saturation => "Saturation",
            BlockKind::Switch => "Switch",
            BlockKind::Relational => "Relational",
            BlockKind::Logical => "Logical",
            BlockKind::Inport => "Inport",
            BlockKind::Outport => "Outport",
            BlockKind::Subsystem => "Subsystem",
        }
    }

    pub fn from_name(s: &str) -> Option<BlockKind> {
        BlockKind::ALL.iter().copied().find(|k| k.name() == s)
    }
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A block parameter: numbers (gains, initial conditions, thresholds) or
/// symbols (sign strings, function names, port variables).
#[derive(Debug, Clone, PartialEq)]
pub enum Param {
    Num(f64),
    Sym(String),
}

impl Param {
    pub fn as_num(&self) -> Option<f64> {
        match self {
            Param::Num(x) => Some(*x),
            Param::Sym(_) => None,
        }
    }

    pub fn as_sym(&self) -> Option<&str> {
        match self {
            Param::Sym(s) => Some(s),
            Param::Num(_) => None,
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Num(x) => write!(f, "{x}"),
            Param::Sym(s) => f.write_str(s),
        }
    }
}

/// Blocks and the lines wiring them. Used for sl-state bodies and for the
/// contents of `Subsystem` blocks.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagram {
    pub blocks: Vec<Block>,
    pub lines: Vec<Line>,
}

impl Diagram {
    pub fn block(&self, id: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.id == id)
    }

    pub fn has_subsystems(&self) -> bool {
        self.blocks.iter().any(|b| b.kind == BlockKind::Subsystem)
    }

    /// Maps every driven in-port to the out-port driving it. Later lines
    /// win on conflicts; validation reports those separately.
    pub fn drivers(&self) -> BTreeMap<PortRef, PortRef> {
        let mut out = BTreeMap::new();
        for line in &self.lines {
            for d in &line.dsts {
                out.insert(d.clone(), line.src.clone());
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub id: String,
    pub kind: BlockKind,
    pub params: BTreeMap<String, Param>,
    /// Contents of a `Subsystem` block; `None` for every other kind.
    pub inner: Option<Box<Diagram>>,
}

impl Block {
    pub fn new(id: impl Into<String>, kind: BlockKind) -> Self {
        Block {
            id: id.into(),
            kind,
            params: BTreeMap::new(),
            inner: if kind == BlockKind::Subsystem { Some(Box::default()) } else { None },
        }
    }

    pub fn with(mut self, key: &str, value: Param) -> Self {
        self.params.insert(key.into(), value);
        self
    }

    pub fn num(&self, key: &str) -> Option<f64> {
        self.params.get(key).and_then(Param::as_num)
    }

    pub fn sym(&self, key: &str) -> Option<&str> {
        self.params.get(key).and_then(Param::as_sym)
    }

    /// Sum signs, defaulting to `++`.
    pub fn signs(&self) -> &str {
        self.sym("signs").unwrap_or("++")
    }

    /// Product operators, defaulting to `**`.
    pub fn product_ops(&self) -> &str {
        self.sym("ops").unwrap_or("**")
    }

    /// The model variable an `Inport`/`Outport` at sl-state level reads or writes.
    pub fn port_var(&self) -> Option<&str> {
        self.sym("var")
    }

    /// Number of in-ports, following from the kind and the parameters.
    pub fn in_arity(&self) -> usize {
        match self.kind {
            BlockKind::Constant | BlockKind::Inport => 0,
            BlockKind::Gain
            | BlockKind::Integrator
            | BlockKind::Trigonometry
            | BlockKind::Sqrt
            | BlockKind::Exp
            | BlockKind::Saturation
            | BlockKind::Outport => 1,
            BlockKind::Sum => self.signs().chars().count(),
            BlockKind::Product => self.product_ops().chars().count(),
            BlockKind::Switch => 3,
            BlockKind::Relational => 2,
            BlockKind::Logical => match self.sym("op") {
                Some("not") => 1,
                _ => self.num("inputs").map(|n| n as usize).unwrap_or(2),
            },
            BlockKind::Subsystem => self.inner.as_ref().map_or(0, |d| count_shells(d, BlockKind::Inport)),
        }
    }

    pub fn out_arity(&self) -> usize {
        match self.kind {
            BlockKind::Outport => 0,
            BlockKind::Subsystem => self.inner.as_ref().map_or(0, |d| count_shells(d, BlockKind::Outport)),
            _ => 1,
        }
    }
}

fn count_shells(d: &Diagram, kind: BlockKind) -> usize {
    d.blocks.iter().filter(|b| b.kind == kind).count()
}

/// `block.port`, ports numbered from 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PortRef {
    pub block: String,
    pub port: usize,
}

impl PortRef {
    pub fn new(block: impl Into<String>, port: usize) -> Self {
        PortRef { block: block.into(), port }
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.block, self.port)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub src: PortRef,
    pub dsts: Vec<PortRef>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlState {
    pub name: String,
    pub vars: BTreeSet<String>,
    pub body: Diagram,
}

impl SlState {
    pub fn new(name: impl Into<String>) -> Self {
        SlState { name: name.into(), vars: BTreeSet::new(), body: Diagram::default() }
    }

    pub fn blocks(&self) -> &[Block] {
        &self.body.blocks
    }

    pub fn lines(&self) -> &[Line] {
        &self.body.lines
    }

    /// Variables written by the state's `Outport` blocks.
    pub fn outport_vars(&self) -> BTreeSet<String> {
        self.body
            .blocks
            .iter()
            .filter(|b| b.kind == BlockKind::Outport)
            .filter_map(|b| b.port_var().map(String::from))
            .collect()
    }

    pub fn inport_vars(&self) -> BTreeSet<String> {
        self.body
            .blocks
            .iter()
            .filter(|b| b.kind == BlockKind::Inport)
            .filter_map(|b| b.port_var().map(String::from))
            .collect()
    }

    /// The variable carried by each top-level integrator, keyed by block id.
    ///
    /// An integrator is named by its `out=` parameter, else by the first
    /// `Outport` it drives directly, else `<state>.<block>.x` with `/`
    /// replaced by `.`. Meant for flattened states.
    pub fn integrator_vars(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        for b in self.body.blocks.iter().filter(|b| b.kind == BlockKind::Integrator) {
            let named = b.sym("out").map(String::from);
            let driven = || {
                self.body
                    .lines
                    .iter()
                    .filter(|l| l.src.block == b.id && l.src.port == 1)
                    .flat_map(|l| l.dsts.iter())
                    .filter_map(|d| self.body.block(&d.block))
                    .find(|d| d.kind == BlockKind::Outport)
                    .and_then(|d| d.port_var().map(String::from))
            };
            let name = named
                .or_else(driven)
                .unwrap_or_else(|| alloc::format!("{}.{}.x", self.name, b.id.replace('/', ".")));
            out.insert(b.id.clone(), name);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub src: String,
    pub dst: String,
    /// Propositional guard over model variables.
    pub cond: Expr,
    /// Raw text of a temporal-logic guard. Such guards are parsed so they can
    /// be reported, and rejected by validation.
    pub temporal: Option<String>,
    /// Ordered assignments `var := expr`.
    pub actions: Vec<(String, Expr)>,
}

impl Transition {
    pub fn new(src: impl Into<String>, dst: impl Into<String>, cond: Expr) -> Self {
        Transition { src: src.into(), dst: dst.into(), cond, temporal: None, actions: Vec::new() }
    }

    /// The transition's variable set: exactly the action targets.
    pub fn vars(&self) -> BTreeSet<String> {
        self.actions.iter().map(|(v, _)| v.clone()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub fn new(lo: f64, hi: f64) -> Self {
        Range { lo, hi }
    }

    pub fn mid(&self) -> f64 {
        self.lo + (self.hi - self.lo) / 2.0
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamValue {
    Fixed(f64),
    /// Chosen once per run: existentially by the solver, uniformly by the simulator.
    Range(Range),
}

/// Graphical hybrid automaton.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Gha {
    pub inputs: BTreeMap<String, Option<Range>>,
    pub outputs: BTreeMap<String, Option<Range>>,
    pub params: BTreeMap<String, ParamValue>,
    /// Explicit initial values (`init v = c`).
    pub inits: BTreeMap<String, f64>,
    pub states: Vec<SlState>,
    pub transitions: Vec<Transition>,
    pub initial: Option<String>,
}

impl Gha {
    pub fn state(&self, name: &str) -> Option<&SlState> {
        self.states.iter().find(|s| s.name == name)
    }

    /// States sorted by name; a state's mode number is its position here.
    pub fn state_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.states.iter().map(|s| s.name.clone()).collect();
        names.sort();
        names.dedup();
        names
    }

    pub fn is_constant(&self, name: &str) -> bool {
        self.inputs.contains_key(name) || self.params.contains_key(name)
    }

    /// Variables every step tracks: the outputs and all integrator
    /// variables, sorted. Meant for flattened models.
    pub fn tracked_vars(&self) -> Vec<String> {
        let mut set: BTreeSet<String> = self.outputs.keys().cloned().collect();
        for s in &self.states {
            set.extend(s.integrator_vars().into_values());
        }
        set.into_iter().collect()
    }

    /// Initial value of every tracked variable: an explicit `init`, else the
    /// `init=` of an integrator carrying it (initial state first, then states
    /// by name), else zero.
    pub fn initial_values(&self) -> BTreeMap<String, f64> {
        let mut order: Vec<&SlState> = self.states.iter().collect();
        order.sort_by(|a, b| {
            let ia = Some(&a.name) == self.initial.as_ref();
            let ib = Some(&b.name) == self.initial.as_ref();
            ib.cmp(&ia).then_with(|| a.name.cmp(&b.name))
        });
        let mut out = BTreeMap::new();
        for v in self.tracked_vars() {
            let from_block = || {
                order.iter().find_map(|s| {
                    let vars = s.integrator_vars();
                    vars.iter()
                        .find(|(_, name)| **name == v)
                        .and_then(|(id, _)| s.body.block(id))
                        .and_then(|b| b.num("init"))
                })
            };
            let x = self.inits.get(&v).copied().or_else(from_block).unwrap_or(0.0);
            out.insert(v, x);
        }
        out
    }

    pub fn block_count(&self) -> usize {
        fn count(d: &Diagram) -> usize {
            d.blocks.iter().map(|b| 1 + b.inner.as_ref().map_or(0, |i| count(i))).sum()
        }
        self.states.iter().map(|s| count(&s.body)).sum()
    }
}
