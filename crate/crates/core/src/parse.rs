//! Reader for the textual model format and for infix expressions.
//!
//! ```text
//! inputs {
//!   x1 in [0, 10]
//! }
//! outputs {
//!   y1
//! }
//! params {
//!   k = 2
//!   wind in [0, 0.3]
//! }
//! init y1 = 0
//! initial S0
//! state S0 {
//!   vars x1, y1
//!   block In1 kind=Inport var=x1
//!   block Int1 kind=Integrator init=0
//!   block Out1 kind=Outport var=y1
//!   line In1.1 -> Int1.1
//!   line Int1.1 -> Out1.1
//! }
//! transition S0 -> S0 when y1 >= 5 do y1 := 0
//! ```

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::expr::{BinaryOp, BoolOp, CmpOp, Expr, UnaryOp};
use crate::model::{Block, BlockKind, Diagram, Gha, Line, Param, ParamValue, PortRef, Range, SlState, Transition};

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    Syntax(String),
    DuplicateKey(String),
    UnknownBlockKind(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub(crate) fn syntax_at(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Self::syntax(line, col, msg)
    }

    fn syntax(line: usize, col: usize, msg: impl Into<String>) -> Self {
        ParseError { line, col, kind: ParseErrorKind::Syntax(msg.into()) }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: ", self.line, self.col)?;
        match &self.kind {
            ParseErrorKind::Syntax(m) => write!(f, "syntax error: {m}"),
            ParseErrorKind::DuplicateKey(k) => write!(f, "duplicate key `{k}`"),
            ParseErrorKind::UnknownBlockKind(k) => write!(f, "unknown block kind `{k}`"),
        }
    }
}

impl core::error::Error for ParseError {}

/// Names of Stateflow temporal operators. Guards using them are kept as raw
/// text so validation can reject them with a precise message.
pub const TEMPORAL_OPERATORS: [&str; 6] = ["after", "before", "at", "every", "temporalCount", "duration"];

// ---------------------------------------------------------------------------
// Tokens

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Num(f64),
    Punct(&'static str),
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    /// Byte offset within the tokenized text.
    pub at: usize,
}

const PUNCTS: [&str; 26] = [
    "->", ":=", "==", "!=", "<=", ">=", "&&", "||", "<", ">", "=", "+", "-", "*", "/", "^", "!", "(",
    ")", "[", "]", ",", ";", "{", "}", ":",
];

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, (usize, String)> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let raw = &text[start..i];
            let x: f64 = raw.parse().map_err(|_| (start, format!("bad number `{raw}`")))?;
            out.push(Token { tok: Tok::Num(x), at: start });
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'.') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(text[start..i].to_string()), at: start });
            continue;
        }
        for p in PUNCTS {
            if text[i..].starts_with(p) {
                out.push(Token { tok: Tok::Punct(p), at: i });
                i += p.len();
                continue 'outer;
            }
        }
        let ch = text[i..].chars().next().unwrap_or('?');
        return Err((i, format!("unexpected character `{ch}`")));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Expressions

pub(crate) struct ExprParser<'a> {
    pub toks: &'a [Token],
    pub pos: usize,
    pub end: usize,
}

type PResult<T> = Result<T, (usize, String)>;

impl<'a> ExprParser<'a> {
    pub fn new(toks: &'a [Token], end: usize) -> Self {
        ExprParser { toks, pos: 0, end }
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    pub fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.at)
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn eat(&mut self, p: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Punct(q)) if *q == p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn eat_ident(&mut self, word: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(w)) if w == word) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, p: &str) -> PResult<()> {
        if self.eat(p) {
            Ok(())
        } else {
            Err((self.here(), format!("expected `{p}`")))
        }
    }

    pub fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(w)) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => Err((self.here(), "expected identifier".into())),
        }
    }

    /// A possibly signed number literal.
    pub fn number(&mut self) -> PResult<f64> {
        let neg = self.eat("-");
        match self.peek() {
            Some(Tok::Num(x)) => {
                let x = *x;
                self.pos += 1;
                Ok(if neg { -x } else { x })
            }
            Some(Tok::Ident(w)) if w == "inf" => {
                self.pos += 1;
                Ok(if neg { f64::NEG_INFINITY } else { f64::INFINITY })
            }
            _ => Err((self.here(), "expected number".into())),
        }
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        self.or()
    }

    fn or(&mut self) -> PResult<Expr> {
        let first = self.and()?;
        if !matches!(self.peek(), Some(Tok::Punct("||"))) {
            return Ok(first);
        }
        let mut args = alloc::vec![first];
        while self.eat("||") {
            args.push(self.and()?);
        }
        Ok(Expr::Bool(BoolOp::Or, args))
    }

    fn and(&mut self) -> PResult<Expr> {
        let first = self.not()?;
        if !matches!(self.peek(), Some(Tok::Punct("&&"))) {
            return Ok(first);
        }
        let mut args = alloc::vec![first];
        while self.eat("&&") {
            args.push(self.not()?);
        }
        Ok(Expr::Bool(BoolOp::And, args))
    }

    fn not(&mut self) -> PResult<Expr> {
        if self.eat("!") {
            return Ok(Expr::not(self.not()?));
        }
        self.cmp()
    }

    fn cmp(&mut self) -> PResult<Expr> {
        let lhs = self.arith()?;
        let op = match self.peek() {
            Some(Tok::Punct(p)) => match *p {
                "!=" => None,
                other => match CmpOp::from_infix(other) {
                    Some(op) => Some(op),
                    None => return Ok(lhs),
                },
            },
            _ => return Ok(lhs),
        };
        self.pos += 1;
        let rhs = self.arith()?;
        Ok(match op {
            Some(op) => Expr::cmp(op, lhs, rhs),
            None => Expr::not(Expr::eq(lhs, rhs)),
        })
    }

    fn arith(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat("+") {
                BinaryOp::Add
            } else if self.eat("-") {
                BinaryOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat("*") {
                BinaryOp::Mul
            } else if self.eat("/") {
                BinaryOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat("-") {
            // `-<literal>` is a negative constant, anything else a negation.
            if let Some(Tok::Num(x)) = self.peek() {
                let x = -*x;
                self.pos += 1;
                return self.power(Expr::Const(x));
            }
            return Ok(Expr::neg(self.unary()?));
        }
        let base = self.atom()?;
        self.power(base)
    }

    fn power(&mut self, base: Expr) -> PResult<Expr> {
        if self.eat("^") {
            let exp = self.unary()?;
            return Ok(Expr::binary(BinaryOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        let mut args = Vec::new();
        if self.eat(")") {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat(")") {
                return Ok(args);
            }
            self.expect(",")?;
        }
    }

    fn atom(&mut self) -> PResult<Expr> {
        let at = self.here();
        match self.peek().cloned() {
            Some(Tok::Num(x)) => {
                self.pos += 1;
                Ok(Expr::Const(x))
            }
            Some(Tok::Punct("(")) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if !self.eat("(") {
                    return Ok(match name.as_str() {
                        "true" => Expr::tt(),
                        "false" => Expr::ff(),
                        _ => Expr::Var(name),
                    });
                }
                let mut args = self.args()?;
                let arity = |n: usize| -> PResult<()> {
                    if args.len() == n {
                        Ok(())
                    } else {
                        Err((at, format!("`{name}` takes {n} argument(s)")))
                    }
                };
                if let Some(op) = UnaryOp::from_name(&name) {
                    arity(1)?;
                    return Ok(Expr::unary(op, args.pop().unwrap()));
                }
                let bin = match name.as_str() {
                    "min" => Some(BinaryOp::Min),
                    "max" => Some(BinaryOp::Max),
                    "pow" => Some(BinaryOp::Pow),
                    _ => None,
                };
                if let Some(op) = bin {
                    arity(2)?;
                    let b = args.pop().unwrap();
                    let a = args.pop().unwrap();
                    return Ok(Expr::binary(op, a, b));
                }
                match name.as_str() {
                    "ite" => {
                        arity(3)?;
                        let e = args.pop().unwrap();
                        let t = args.pop().unwrap();
                        let c = args.pop().unwrap();
                        Ok(Expr::Ite(Box::new(c), Box::new(t), Box::new(e)))
                    }
                    "and" => Ok(Expr::Bool(BoolOp::And, args)),
                    "or" => Ok(Expr::Bool(BoolOp::Or, args)),
                    _ => Err((at, format!("unknown function `{name}`"))),
                }
            }
            _ => Err((at, "expected expression".into())),
        }
    }
}

fn col_of(text: &str, byte: usize) -> usize {
    text[..byte.min(text.len())].chars().count() + 1
}

/// Parses a standalone infix expression.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let err = |(at, msg): (usize, String)| ParseError::syntax(1, col_of(text, at), msg);
    let toks = tokenize(text).map_err(err)?;
    let mut p = ExprParser::new(&toks, text.len());
    let e = p.expr().map_err(err)?;
    if !p.at_end() {
        return Err(err((p.here(), "trailing input".into())));
    }
    Ok(e)
}

// ---------------------------------------------------------------------------
// Model documents

struct SrcLine<'a> {
    no: usize,
    /// Line content with comments removed.
    text: &'a str,
}

impl SrcLine<'_> {
    fn trimmed(&self) -> &str {
        self.text.trim()
    }

    fn err(&self, byte: usize, msg: impl Into<String>) -> ParseError {
        ParseError::syntax(self.no, col_of(self.text, byte), msg)
    }

    fn words(&self) -> Vec<(usize, &str)> {
        let mut out = Vec::new();
        let mut start = None;
        for (i, c) in self.text.char_indices() {
            if c.is_whitespace() {
                if let Some(s) = start.take() {
                    out.push((s, &self.text[s..i]));
                }
            } else if start.is_none() {
                start = Some(i);
            }
        }
        if let Some(s) = start {
            out.push((s, &self.text[s..]));
        }
        out
    }

    /// Tokens of the text starting at byte `from`, positions relative to the line.
    fn tokens_from(&self, from: usize) -> Result<Vec<Token>, ParseError> {
        let mut toks = tokenize(&self.text[from..]).map_err(|(at, m)| self.err(from + at, m))?;
        for t in &mut toks {
            t.at += from;
        }
        Ok(toks)
    }
}

struct ModelParser<'a> {
    lines: Vec<SrcLine<'a>>,
    pos: usize,
}

/// Parses a model document. Only syntax is checked here; see
/// [`crate::validate::validate_model`] for the structural rules.
pub fn parse_model(text: &str) -> Result<Gha, ParseError> {
    let lines = text
        .split('\n')
        .enumerate()
        .map(|(i, raw)| {
            let raw = raw.strip_suffix('\r').unwrap_or(raw);
            let text = match raw.find('#') {
                Some(c) => &raw[..c],
                None => raw,
            };
            SrcLine { no: i + 1, text }
        })
        .filter(|l| !l.trimmed().is_empty())
        .collect();
    let mut p = ModelParser { lines, pos: 0 };
    p.document()
}

fn dup(line: &SrcLine<'_>, byte: usize, key: &str) -> ParseError {
    ParseError { line: line.no, col: col_of(line.text, byte), kind: ParseErrorKind::DuplicateKey(key.into()) }
}

impl<'a> ModelParser<'a> {
    fn next(&mut self) -> Option<&SrcLine<'a>> {
        let l = self.lines.get(self.pos);
        self.pos += 1;
        l
    }

    fn eof_error(&self) -> ParseError {
        let no = self.lines.last().map_or(1, |l| l.no);
        ParseError::syntax(no, 1, "unexpected end of document, missing `}`")
    }

    fn document(&mut self) -> Result<Gha, ParseError> {
        let mut m = Gha::default();
        while let Some(line) = self.next() {
            let words = line.words();
            let (at, head) = words[0];
            match head {
                "inputs" | "outputs" | "params" => {
                    if words.len() != 2 || words[1].1 != "{" {
                        return Err(line.err(at, format!("expected `{head} {{`")));
                    }
                    let head = head.to_string();
                    self.section(&head, &mut m)?;
                }
                "init" => {
                    let toks = line.tokens_from(at + head.len())?;
                    let mut p = ExprParser::new(&toks, line.text.len());
                    let wrap = |(b, msg): (usize, String)| line.err(b, msg);
                    let name = p.ident().map_err(wrap)?;
                    p.expect("=").map_err(wrap)?;
                    let value = p.number().map_err(wrap)?;
                    if !p.at_end() {
                        return Err(line.err(p.here(), "trailing input"));
                    }
                    if m.inits.insert(name.clone(), value).is_some() {
                        return Err(dup(line, at, &format!("init {name}")));
                    }
                }
                "initial" => {
                    if words.len() != 2 {
                        return Err(line.err(at, "expected `initial <state>`"));
                    }
                    if m.initial.is_some() {
                        return Err(dup(line, at, "initial"));
                    }
                    m.initial = Some(words[1].1.to_string());
                }
                "state" => {
                    if words.len() != 3 || words[2].1 != "{" {
                        return Err(line.err(at, "expected `state <name> {`"));
                    }
                    let mut state = SlState::new(words[1].1);
                    self.diagram(&mut state.body, Some(&mut state.vars))?;
                    m.states.push(state);
                }
                "transition" => {
                    let t = transition(line, at + head.len())?;
                    m.transitions.push(t);
                }
                other => return Err(line.err(at, format!("unexpected `{other}`"))),
            }
        }
        Ok(m)
    }

    fn section(&mut self, head: &str, m: &mut Gha) -> Result<(), ParseError> {
        loop {
            let line = self.lines.get(self.pos).ok_or_else(|| self.eof_error())?;
            self.pos += 1;
            if line.trimmed() == "}" {
                return Ok(());
            }
            let toks = line.tokens_from(0)?;
            let mut p = ExprParser::new(&toks, line.text.len());
            let wrap = |(b, msg): (usize, String)| line.err(b, msg);
            let start = p.here();
            let name = p.ident().map_err(wrap)?;
            let range = if p.eat_ident("in") {
                p.expect("[").map_err(wrap)?;
                let lo = p.number().map_err(wrap)?;
                p.expect(",").map_err(wrap)?;
                let hi = p.number().map_err(wrap)?;
                p.expect("]").map_err(wrap)?;
                Some(Range::new(lo, hi))
            } else {
                None
            };
            let fresh = match head {
                "params" => {
                    let value = match range {
                        Some(r) => ParamValue::Range(r),
                        None => {
                            p.expect("=").map_err(wrap)?;
                            ParamValue::Fixed(p.number().map_err(wrap)?)
                        }
                    };
                    m.params.insert(name.clone(), value).is_none()
                }
                "inputs" => m.inputs.insert(name.clone(), range).is_none(),
                _ => m.outputs.insert(name.clone(), range).is_none(),
            };
            if !p.at_end() {
                return Err(line.err(p.here(), "trailing input"));
            }
            if !fresh {
                return Err(dup(line, start, &name));
            }
        }
    }

    fn diagram(
        &mut self,
        d: &mut Diagram,
        mut vars: Option<&mut alloc::collections::BTreeSet<String>>,
    ) -> Result<(), ParseError> {
        loop {
            let idx = self.pos;
            let line = self.lines.get(idx).ok_or_else(|| self.eof_error())?;
            self.pos += 1;
            if line.trimmed() == "}" {
                return Ok(());
            }
            let words = line.words();
            let (at, head) = words[0];
            match head {
                "vars" if vars.is_some() => {
                    let rest = &line.text[at + head.len()..];
                    let set = vars.as_deref_mut().unwrap();
                    for name in rest.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()) {
                        if !set.insert(name.to_string()) {
                            return Err(dup(line, at, name));
                        }
                    }
                }
                "block" => {
                    let (mut block, opens) = block_header(line, &words)?;
                    if opens {
                        let mut inner = Diagram::default();
                        self.diagram(&mut inner, None)?;
                        block.inner = Some(Box::new(inner));
                    }
                    d.blocks.push(block);
                }
                "line" => d.lines.push(line_stmt(line, at + head.len())?),
                other => return Err(line.err(at, format!("unexpected `{other}`"))),
            }
        }
    }
}

fn block_header(line: &SrcLine<'_>, words: &[(usize, &str)]) -> Result<(Block, bool), ParseError> {
    let (at, _) = words[0];
    let Some(&(_, id)) = words.get(1) else {
        return Err(line.err(at, "expected `block <id> kind=<kind> ...`"));
    };
    let mut kind = None;
    let mut params = BTreeMap::new();
    let mut opens = false;
    for (i, &(wat, w)) in words.iter().enumerate().skip(2) {
        if w == "{" {
            if i != words.len() - 1 {
                return Err(line.err(wat, "`{` must end the line"));
            }
            opens = true;
            continue;
        }
        let Some((key, value)) = w.split_once('=') else {
            return Err(line.err(wat, format!("expected `key=value`, found `{w}`")));
        };
        if key.is_empty() || value.is_empty() {
            return Err(line.err(wat, format!("expected `key=value`, found `{w}`")));
        }
        if key == "kind" {
            if kind.is_some() {
                return Err(dup(line, wat, "kind"));
            }
            kind = Some(BlockKind::from_name(value).ok_or_else(|| ParseError {
                line: line.no,
                col: col_of(line.text, wat + 5),
                kind: ParseErrorKind::UnknownBlockKind(value.into()),
            })?);
            continue;
        }
        if params.insert(key.to_string(), param_value(value)).is_some() {
            return Err(dup(line, wat, key));
        }
    }
    let kind = kind.ok_or_else(|| line.err(at, "missing `kind=`"))?;
    if opens != (kind == BlockKind::Subsystem) {
        return Err(line.err(
            at,
            if opens { "only Subsystem blocks have a body" } else { "Subsystem block needs a `{ ... }` body" },
        ));
    }
    let mut block = Block::new(id, kind);
    block.params = params;
    Ok((block, opens))
}

fn param_value(raw: &str) -> Param {
    let numeric_start = raw.starts_with(|c: char| c.is_ascii_digit() || c == '-' || c == '+' || c == '.');
    match raw.parse::<f64>() {
        Ok(x) if numeric_start && x.is_finite() => Param::Num(x),
        _ => Param::Sym(raw.to_string()),
    }
}

fn port_ref(line: &SrcLine<'_>, at: usize, raw: &str) -> Result<PortRef, ParseError> {
    let bad = || line.err(at, format!("expected `<block>.<port>`, found `{raw}`"));
    let (block, port) = raw.rsplit_once('.').ok_or_else(bad)?;
    let port: usize = port.parse().map_err(|_| bad())?;
    if block.is_empty() || port == 0 {
        return Err(bad());
    }
    Ok(PortRef::new(block, port))
}

fn line_stmt(line: &SrcLine<'_>, from: usize) -> Result<Line, ParseError> {
    let rest = &line.text[from..];
    let Some(arrow) = rest.find("->") else {
        return Err(line.err(from, "expected `line <src> -> <dst>[, <dst>...]`"));
    };
    let src_raw = rest[..arrow].trim();
    let src = port_ref(line, from, src_raw)?;
    let mut dsts = Vec::new();
    let mut off = from + arrow + 2;
    for part in rest[arrow + 2..].split(',') {
        let raw = part.trim();
        if raw.is_empty() {
            return Err(line.err(off, "empty destination"));
        }
        dsts.push(port_ref(line, off, raw)?);
        off += part.len() + 1;
    }
    Ok(Line { src, dsts })
}

fn transition(line: &SrcLine<'_>, from: usize) -> Result<Transition, ParseError> {
    let toks = line.tokens_from(from)?;
    let mut p = ExprParser::new(&toks, line.text.len());
    let wrap = |(b, msg): (usize, String)| line.err(b, msg);
    let src = p.ident().map_err(wrap)?;
    p.expect("->").map_err(wrap)?;
    let dst = p.ident().map_err(wrap)?;
    let mut t = Transition::new(src, dst, Expr::tt());
    if p.eat_ident("when") {
        let start = p.pos;
        let mut end = start;
        while end < toks.len() && !matches!(&toks[end].tok, Tok::Ident(w) if w == "do") {
            end += 1;
        }
        let temporal = toks[start..end].windows(2).any(|w| {
            matches!(&w[0].tok, Tok::Ident(n) if TEMPORAL_OPERATORS.contains(&n.as_str()))
                && w[1].tok == Tok::Punct("(")
        });
        if temporal {
            let a = toks.get(start).map_or(line.text.len(), |t| t.at);
            let b = toks.get(end).map_or(line.text.len(), |t| t.at);
            t.temporal = Some(line.text[a..b].trim().to_string());
            p.pos = end;
        } else {
            t.cond = p.expr().map_err(wrap)?;
        }
    }
    if p.eat_ident("do") {
        loop {
            if p.at_end() {
                break;
            }
            let var = p.ident().map_err(wrap)?;
            p.expect(":=").map_err(wrap)?;
            let rhs = p.expr().map_err(wrap)?;
            t.actions.push((var, rhs));
            if !p.eat(";") {
                break;
            }
        }
    }
    if !p.at_end() {
        return Err(line.err(p.here(), "trailing input"));
    }
    Ok(t)
}
