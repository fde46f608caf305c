//! Seeded generator of small well-formed models in the textual format.
#![allow(dead_code)]

pub mod hier;
pub mod rows;
pub mod soundness;
pub mod valuation;

use std::collections::BTreeMap;
use std::fmt::Write;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub struct Generated {
    pub text: String,
    /// Constant value for every input.
    pub inputs: BTreeMap<String, f64>,
    pub k: usize,
}

#[derive(Default)]
struct Diag {
    blocks: Vec<String>,
    subs: Vec<(String, Diag)>,
    lines: BTreeMap<String, Vec<String>>,
}

impl Diag {
    fn block(&mut self, decl: impl Into<String>) {
        self.blocks.push(decl.into());
    }

    fn connect(&mut self, src: &str, dst: &str) {
        self.lines.entry(src.to_string()).or_default().push(dst.to_string());
    }

    fn render(&self, out: &mut String, indent: usize) {
        let pad = " ".repeat(indent);
        for b in &self.blocks {
            writeln!(out, "{pad}block {b}").unwrap();
        }
        for (id, inner) in &self.subs {
            writeln!(out, "{pad}block {id} kind=Subsystem {{").unwrap();
            inner.render(out, indent + 2);
            writeln!(out, "{pad}}}").unwrap();
        }
        for (src, dsts) in &self.lines {
            writeln!(out, "{pad}line {src} -> {}", dsts.join(", ")).unwrap();
        }
    }
}

pub struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.rng.next_u64() % n as u64) as usize
    }

    pub fn coin(&mut self) -> bool {
        self.rng.next_u64() & 1 == 1
    }

    /// A multiple of 0.05 in `[lo, hi]`.
    pub fn num(&mut self, lo: f64, hi: f64) -> f64 {
        let (a, b) = ((lo * 20.0).round() as i64, (hi * 20.0).round() as i64);
        (a + self.below((b - a + 1) as usize) as i64) as f64 / 20.0
    }

    pub fn unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Adds one operator block reading from `signals`; the first input is
    /// `first` when given. Returns its output signal.
    fn op(&mut self, d: &mut Diag, id: &str, signals: &[String], first: Option<&str>) -> String {
        let kind = if first.is_some() { self.below(4) } else { self.below(5) };
        let (decl, arity) = match kind {
            0 if self.below(4) == 0 => (format!("{id} kind=Gain k=p"), 1),
            0 => (format!("{id} kind=Gain k={}", self.num(-1.0, 1.0)), 1),
            1 => {
                let signs: String = (0..2).map(|_| if self.coin() { '+' } else { '-' }).collect();
                (format!("{id} kind=Sum signs={signs}"), 2)
            }
            2 => {
                let (lo, hi) = (self.num(-2.0, -0.5), self.num(0.5, 2.0));
                (format!("{id} kind=Saturation lower={lo} upper={hi}"), 1)
            }
            3 => (format!("{id} kind=Trigonometry fn={}", if self.coin() { "sin" } else { "cos" }), 1),
            _ => (format!("{id} kind=Constant value={}", self.num(-1.0, 1.0)), 0),
        };
        d.block(decl);
        for port in 1..=arity {
            let src = match (port, first) {
                (1, Some(f)) => f.to_string(),
                _ => signals[self.below(signals.len())].clone(),
            };
            d.connect(&src, &format!("{id}.{port}"));
        }
        format!("{id}.1")
    }

    /// Operator chain over two source signals, optionally wrapping part of
    /// it in nested subsystems up to `depth` levels.
    fn chain(&mut self, d: &mut Diag, srcs: [&str; 2], ops: usize, depth: usize) -> String {
        let mut signals: Vec<String> = srcs.iter().map(|s| s.to_string()).collect();
        for j in 0..ops {
            let first = (j == 0).then_some(srcs[0]);
            let out = self.op(d, &format!("B{j}"), &signals, first);
            signals.push(out);
        }
        if depth > 0 && self.below(4) != 0 {
            let mut inner = Diag::default();
            inner.block("P1 kind=Inport port=1");
            inner.block("P2 kind=Inport port=2");
            let n = 1 + self.below(2);
            let o = self.chain(&mut inner, ["P1.1", "P2.1"], n, depth - 1);
            inner.block("Q kind=Outport port=1");
            inner.connect(&o, "Q.1");
            let id = format!("Sub{depth}");
            let a = signals[signals.len() - 1].clone();
            let b = signals[self.below(signals.len())].clone();
            d.connect(&a, &format!("{id}.1"));
            d.connect(&b, &format!("{id}.2"));
            d.subs.push((id.clone(), inner));
            signals.push(format!("{id}.1"));
        }
        signals.pop().unwrap()
    }

    fn header(&mut self, out: &mut String) -> BTreeMap<String, f64> {
        let u1 = self.num(-1.0, 1.0);
        writeln!(out, "inputs {{\n  u1\n}}\noutputs {{\n  y1\n  y2\n}}").unwrap();
        writeln!(out, "params {{\n  p = {}\n}}", self.num(-1.0, 1.0)).unwrap();
        writeln!(out, "init y2 = {}\ninitial S0", self.num(-1.0, 1.0)).unwrap();
        BTreeMap::from([("u1".to_string(), u1)])
    }

    fn state(&mut self, out: &mut String, i: usize, depth: usize, max_blocks: usize) {
        let mut d = Diag::default();
        d.block("In1 kind=Inport var=u1");
        d.block(format!("Int kind=Integrator init={}", self.num(-1.0, 1.0)));
        d.block("Out1 kind=Outport var=y1");
        d.connect("Int.1", "Out1.1");
        let writes_y2 = self.coin();
        let room = max_blocks - 3 - usize::from(writes_y2);
        let ops = 1 + self.below(room);
        let last = self.chain(&mut d, ["In1.1", "Int.1"], ops, depth);
        d.connect(&last, "Int.1");
        let mut vars = vec!["u1", "y1"];
        if writes_y2 {
            d.block("Out2 kind=Outport var=y2");
            let src = if self.coin() { last } else { format!("B{}.1", self.below(ops)) };
            d.connect(&src, "Out2.1");
            vars.push("y2");
        }
        writeln!(out, "state S{i} {{\n  vars {}", vars.join(", ")).unwrap();
        d.render(out, 2);
        writeln!(out, "}}").unwrap();
    }

    fn transitions(&mut self, out: &mut String, states: usize) {
        for i in 0..states {
            let dst = (i + 1) % states;
            if states == 1 && self.coin() {
                continue;
            }
            let c = self.num(-1.0, 1.0);
            let mut line = if self.coin() {
                format!("transition S{i} -> S{dst} when y1 >= {c}")
            } else {
                format!("transition S{i} -> S{dst} when y1 <= {c}")
            };
            let up = line.contains(">=");
            let mut actions = Vec::new();
            if states == 1 || self.coin() {
                // Reset away from the guard so a self-loop cannot fire at once.
                let r = if up { c - 0.5 } else { c + 0.5 };
                actions.push(format!("y1 := {r}"));
            }
            if self.coin() {
                actions.push(format!("y2 := y1 + {}", self.num(0.0, 1.0)));
            }
            if !actions.is_empty() {
                write!(line, " do {}", actions.join("; ")).unwrap();
            }
            writeln!(out, "{line}").unwrap();
        }
    }

    /// Up to three states of at most six blocks each, one outgoing
    /// transition per state, every input and parameter fixed.
    pub fn flat_model(&mut self) -> Generated {
        let mut text = String::new();
        let inputs = self.header(&mut text);
        let states = 1 + self.below(3);
        for i in 0..states {
            self.state(&mut text, i, 0, 6);
        }
        self.transitions(&mut text, states);
        Generated { text, inputs, k: 1 + self.below(5) }
    }

    /// One state whose operator chain nests subsystems up to `depth` deep.
    pub fn hierarchical_model(&mut self, depth: usize) -> Generated {
        let mut text = String::new();
        let inputs = self.header(&mut text);
        self.state(&mut text, 0, depth, 7);
        Generated { text, inputs, k: 1 }
    }
}
