//! Symbolic expressions over reals and booleans.
//!
//! One tree type serves block functions, transition guards and actions,
//! unrolled step constraints and properties. It is generic over the variable
//! type: model-level expressions use `String`, unrolled ones use
//! [`crate::unroll::StepVar`].

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl UnaryOp {
    pub const FUNCTIONS: [UnaryOp; 7] = [
        UnaryOp::Sin,
        UnaryOp::Cos,
        UnaryOp::Tan,
        UnaryOp::Exp,
        UnaryOp::Log,
        UnaryOp::Sqrt,
        UnaryOp::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Tan => "tan",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<UnaryOp> {
        UnaryOp::FUNCTIONS.iter().copied().find(|op| op.name() == name)
    }

    pub fn apply(self, x: f64) -> f64 {
        match self {
            UnaryOp::Neg => -x,
            UnaryOp::Sin => libm::sin(x),
            UnaryOp::Cos => libm::cos(x),
            UnaryOp::Tan => libm::tan(x),
            UnaryOp::Exp => libm::exp(x),
            UnaryOp::Log => libm::log(x),
            UnaryOp::Sqrt => libm::sqrt(x),
            UnaryOp::Abs => libm::fabs(x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Min,
    Max,
}

impl BinaryOp {
    pub fn smt_name(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
            BinaryOp::Min => "min",
            BinaryOp::Max => "max",
        }
    }

    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => a / b,
            BinaryOp::Pow => libm::pow(a, b),
            BinaryOp::Min => libm::fmin(a, b),
            BinaryOp::Max => libm::fmax(a, b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn infix(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "==",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }

    pub fn smt_name(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            other => other.infix(),
        }
    }

    pub fn from_infix(s: &str) -> Option<CmpOp> {
        Some(match s {
            "<" => CmpOp::Lt,
            "<=" => CmpOp::Le,
            "==" | "=" => CmpOp::Eq,
            ">=" => CmpOp::Ge,
            ">" => CmpOp::Gt,
            _ => return None,
        })
    }

    pub fn holds(self, a: f64, b: f64) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Eq => a == b,
            CmpOp::Ge => a >= b,
            CmpOp::Gt => a > b,
        }
    }

    /// The comparison equivalent to the negation, where one exists (`=` has none).
    pub fn negated(self) -> Option<CmpOp> {
        match self {
            CmpOp::Lt => Some(CmpOp::Ge),
            CmpOp::Le => Some(CmpOp::Gt),
            CmpOp::Ge => Some(CmpOp::Lt),
            CmpOp::Gt => Some(CmpOp::Le),
            CmpOp::Eq => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoolOp {
    And,
    Or,
    Not,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr<V = String> {
    Const(f64),
    Var(V),
    Unary(UnaryOp, Box<Expr<V>>),
    Binary(BinaryOp, Box<Expr<V>>, Box<Expr<V>>),
    Cmp(CmpOp, Box<Expr<V>>, Box<Expr<V>>),
    Bool(BoolOp, Vec<Expr<V>>),
    Ite(Box<Expr<V>>, Box<Expr<V>>, Box<Expr<V>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sort {
    Real,
    Bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    Unbound(String),
    /// A boolean node was used where a real was expected or vice versa.
    Sort,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::Unbound(v) => write!(f, "unbound variable {v}"),
            EvalError::Sort => f.write_str("sort mismatch"),
        }
    }
}

impl core::error::Error for EvalError {}

impl<V> Expr<V> {
    pub fn var(v: V) -> Self {
        Expr::Var(v)
    }

    pub fn tt() -> Self {
        Expr::Bool(BoolOp::And, Vec::new())
    }

    pub fn ff() -> Self {
        Expr::Bool(BoolOp::Or, Vec::new())
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Expr::Bool(BoolOp::And, xs) if xs.is_empty())
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Expr::Bool(BoolOp::Or, xs) if xs.is_empty())
    }

    pub fn unary(op: UnaryOp, a: Self) -> Self {
        Expr::Unary(op, Box::new(a))
    }

    pub fn binary(op: BinaryOp, a: Self, b: Self) -> Self {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn cmp(op: CmpOp, a: Self, b: Self) -> Self {
        Expr::Cmp(op, Box::new(a), Box::new(b))
    }

    pub fn eq(a: Self, b: Self) -> Self {
        Expr::cmp(CmpOp::Eq, a, b)
    }

    pub fn neg(a: Self) -> Self {
        Expr::unary(UnaryOp::Neg, a)
    }

    pub fn not(a: Self) -> Self {
        Expr::Bool(BoolOp::Not, alloc::vec![a])
    }

    pub fn ite(c: Self, a: Self, b: Self) -> Self {
        Expr::Ite(Box::new(c), Box::new(a), Box::new(b))
    }

    /// Conjunction that splices nested conjunctions and drops `true`.
    pub fn and(args: impl IntoIterator<Item = Self>) -> Self {
        let mut out = Vec::new();
        for a in args {
            match a {
                Expr::Bool(BoolOp::And, inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            Expr::Bool(BoolOp::And, out)
        }
    }

    /// Disjunction that splices nested disjunctions and drops `false`.
    pub fn or(args: impl IntoIterator<Item = Self>) -> Self {
        let mut out = Vec::new();
        for a in args {
            match a {
                Expr::Bool(BoolOp::Or, inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            Expr::Bool(BoolOp::Or, out)
        }
    }

    /// `a => b`, spelled with the connectives the tree supports.
    pub fn implies(a: Self, b: Self) -> Self {
        Expr::or([Expr::not(a), b])
    }

    pub fn sort(&self) -> Sort {
        match self {
            Expr::Cmp(..) | Expr::Bool(..) => Sort::Bool,
            _ => Sort::Real,
        }
    }

    /// Checks that real and boolean positions are respected everywhere in the
    /// tree and that the root has sort `want`.
    pub fn well_sorted(&self, want: Sort) -> bool {
        if self.sort() != want {
            return false;
        }
        match self {
            Expr::Const(c) => c.is_finite(),
            Expr::Var(_) => true,
            Expr::Unary(_, a) => a.well_sorted(Sort::Real),
            Expr::Binary(_, a, b) | Expr::Cmp(_, a, b) => {
                a.well_sorted(Sort::Real) && b.well_sorted(Sort::Real)
            }
            Expr::Bool(op, args) => {
                (*op != BoolOp::Not || args.len() == 1)
                    && args.iter().all(|a| a.well_sorted(Sort::Bool))
            }
            Expr::Ite(c, a, b) => {
                c.well_sorted(Sort::Bool) && a.well_sorted(Sort::Real) && b.well_sorted(Sort::Real)
            }
        }
    }

    pub fn visit_vars<'a>(&'a self, f: &mut impl FnMut(&'a V)) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => f(v),
            Expr::Unary(_, a) => a.visit_vars(f),
            Expr::Binary(_, a, b) | Expr::Cmp(_, a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Expr::Bool(_, args) => args.iter().for_each(|a| a.visit_vars(f)),
            Expr::Ite(c, a, b) => {
                c.visit_vars(f);
                a.visit_vars(f);
                b.visit_vars(f);
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<V>
    where
        V: Ord + Clone,
    {
        let mut out = BTreeSet::new();
        self.visit_vars(&mut |v| {
            out.insert(v.clone());
        });
        out
    }

    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Expr<V>)) {
        f(self);
        match self {
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Unary(_, a) => a.visit(f),
            Expr::Binary(_, a, b) | Expr::Cmp(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Expr::Bool(_, args) => args.iter().for_each(|a| a.visit(f)),
            Expr::Ite(c, a, b) => {
                c.visit(f);
                a.visit(f);
                b.visit(f);
            }
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// Replaces every variable with an expression over a (possibly different)
    /// variable type.
    pub fn subst<W>(&self, f: &mut impl FnMut(&V) -> Expr<W>) -> Expr<W> {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(v) => f(v),
            Expr::Unary(op, a) => Expr::Unary(*op, Box::new(a.subst(f))),
            Expr::Binary(op, a, b) => Expr::Binary(*op, Box::new(a.subst(f)), Box::new(b.subst(f))),
            Expr::Cmp(op, a, b) => Expr::Cmp(*op, Box::new(a.subst(f)), Box::new(b.subst(f))),
            Expr::Bool(op, args) => Expr::Bool(*op, args.iter().map(|a| a.subst(f)).collect()),
            Expr::Ite(c, a, b) => Expr::Ite(
                Box::new(c.subst(f)),
                Box::new(a.subst(f)),
                Box::new(b.subst(f)),
            ),
        }
    }

    pub fn map_vars<W>(&self, f: &mut impl FnMut(&V) -> W) -> Expr<W> {
        self.subst(&mut |v| Expr::Var(f(v)))
    }

    pub fn eval_real(&self, env: &dyn Fn(&V) -> Option<f64>) -> Result<f64, EvalError>
    where
        V: fmt::Display,
    {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(v) => env(v).ok_or_else(|| EvalError::Unbound(alloc::format!("{v}")))?,
            Expr::Unary(op, a) => op.apply(a.eval_real(env)?),
            Expr::Binary(op, a, b) => op.apply(a.eval_real(env)?, b.eval_real(env)?),
            Expr::Ite(c, a, b) => {
                if c.eval_bool(env)? {
                    a.eval_real(env)?
                } else {
                    b.eval_real(env)?
                }
            }
            Expr::Cmp(..) | Expr::Bool(..) => return Err(EvalError::Sort),
        })
    }

    pub fn eval_bool(&self, env: &dyn Fn(&V) -> Option<f64>) -> Result<bool, EvalError>
    where
        V: fmt::Display,
    {
        match self {
            Expr::Cmp(op, a, b) => Ok(op.holds(a.eval_real(env)?, b.eval_real(env)?)),
            Expr::Bool(BoolOp::And, args) => {
                for a in args {
                    if !a.eval_bool(env)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Expr::Bool(BoolOp::Or, args) => {
                for a in args {
                    if a.eval_bool(env)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Expr::Bool(BoolOp::Not, args) => match args.as_slice() {
                [a] => Ok(!a.eval_bool(env)?),
                _ => Err(EvalError::Sort),
            },
            _ => Err(EvalError::Sort),
        }
    }

    /// Robust violation measure of a boolean expression: `0` when it holds,
    /// otherwise how far the offending atoms are from holding. Conjunctions
    /// take the max, disjunctions the min, negations are pushed to the atoms.
    /// A disequality that fails has residual `1`.
    pub fn residual(&self, env: &dyn Fn(&V) -> Option<f64>) -> Result<f64, EvalError>
    where
        V: fmt::Display,
    {
        self.residual_signed(env, false)
    }

    fn residual_signed(
        &self,
        env: &dyn Fn(&V) -> Option<f64>,
        negated: bool,
    ) -> Result<f64, EvalError>
    where
        V: fmt::Display,
    {
        match self {
            Expr::Cmp(op, a, b) => {
                let (x, y) = (a.eval_real(env)?, b.eval_real(env)?);
                let op = if negated { op.negated() } else { Some(*op) };
                Ok(match op {
                    Some(CmpOp::Lt | CmpOp::Le) => pos(x - y),
                    Some(CmpOp::Gt | CmpOp::Ge) => pos(y - x),
                    Some(CmpOp::Eq) => libm::fabs(x - y),
                    None => {
                        if x == y {
                            1.0
                        } else {
                            0.0
                        }
                    }
                })
            }
            Expr::Bool(BoolOp::Not, args) => match args.as_slice() {
                [a] => a.residual_signed(env, !negated),
                _ => Err(EvalError::Sort),
            },
            Expr::Bool(op, args) => {
                let conj = (*op == BoolOp::And) != negated;
                let mut acc: f64 = if conj { 0.0 } else { f64::INFINITY };
                for a in args {
                    let r = a.residual_signed(env, negated)?;
                    acc = if conj { acc.max(r) } else { acc.min(r) };
                }
                // An empty disjunction is false; report a unit violation.
                if acc == f64::INFINITY {
                    acc = 1.0;
                }
                Ok(acc)
            }
            _ => Err(EvalError::Sort),
        }
    }

    /// Pushes negations down to the atoms. Order comparisons are flipped,
    /// equalities keep an explicit `not`.
    pub fn nnf(&self, negated: bool) -> Self
    where
        V: Clone,
    {
        match self {
            Expr::Cmp(op, a, b) => {
                if !negated {
                    return self.clone();
                }
                match op.negated() {
                    Some(flipped) => Expr::Cmp(flipped, a.clone(), b.clone()),
                    None => Expr::not(self.clone()),
                }
            }
            Expr::Bool(BoolOp::Not, args) if args.len() == 1 => args[0].nnf(!negated),
            Expr::Bool(op, args) => {
                let conj = (*op == BoolOp::And) != negated;
                let args: Vec<_> = args.iter().map(|a| a.nnf(negated)).collect();
                if conj {
                    Expr::Bool(BoolOp::And, args)
                } else {
                    Expr::Bool(BoolOp::Or, args)
                }
            }
            other => other.clone(),
        }
    }

    /// Folds operators whose operands are all constants.
    pub fn fold(self) -> Self {
        match self {
            Expr::Unary(op, a) => match a.fold() {
                Expr::Const(x) => Expr::Const(op.apply(x)),
                a => Expr::Unary(op, Box::new(a)),
            },
            Expr::Binary(op, a, b) => match (a.fold(), b.fold()) {
                (Expr::Const(x), Expr::Const(y)) => Expr::Const(op.apply(x, y)),
                (a, b) => Expr::Binary(op, Box::new(a), Box::new(b)),
            },
            Expr::Cmp(op, a, b) => Expr::Cmp(op, Box::new(a.fold()), Box::new(b.fold())),
            Expr::Bool(op, args) => Expr::Bool(op, args.into_iter().map(Expr::fold).collect()),
            Expr::Ite(c, a, b) => Expr::Ite(Box::new(c.fold()), Box::new(a.fold()), Box::new(b.fold())),
            leaf => leaf,
        }
    }

    /// Writes the expression in prefix (SMT-LIB) form. `var` renders leaves.
    pub fn write_prefix<W: Write>(
        &self,
        out: &mut W,
        var: &dyn Fn(&V, &mut W) -> fmt::Result,
    ) -> fmt::Result {
        match self {
            Expr::Const(c) => write_real(out, *c),
            Expr::Var(v) => var(v, out),
            Expr::Unary(op, a) => {
                write!(out, "({} ", op.name())?;
                a.write_prefix(out, var)?;
                out.write_char(')')
            }
            Expr::Binary(op, a, b) => {
                write!(out, "({} ", op.smt_name())?;
                a.write_prefix(out, var)?;
                out.write_char(' ')?;
                b.write_prefix(out, var)?;
                out.write_char(')')
            }
            Expr::Cmp(op, a, b) => {
                write!(out, "({} ", op.smt_name())?;
                a.write_prefix(out, var)?;
                out.write_char(' ')?;
                b.write_prefix(out, var)?;
                out.write_char(')')
            }
            Expr::Bool(op, args) => {
                if args.is_empty() {
                    return out.write_str(if *op == BoolOp::And { "true" } else { "false" });
                }
                out.write_str(match op {
                    BoolOp::And => "(and",
                    BoolOp::Or => "(or",
                    BoolOp::Not => "(not",
                })?;
                for a in args {
                    out.write_char(' ')?;
                    a.write_prefix(out, var)?;
                }
                out.write_char(')')
            }
            Expr::Ite(c, a, b) => {
                out.write_str("(ite ")?;
                c.write_prefix(out, var)?;
                out.write_char(' ')?;
                a.write_prefix(out, var)?;
                out.write_char(' ')?;
                b.write_prefix(out, var)?;
                out.write_char(')')
            }
        }
    }

    pub fn to_prefix(&self) -> String
    where
        V: fmt::Display,
    {
        let mut s = String::new();
        self.write_prefix(&mut s, &|v, out| write!(out, "{v}"))
            .expect("writing to a String");
        s
    }
}

fn pos(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Decimal rendering with an explicit point and no exponent; negative values
/// become `(- x)`.
pub fn write_real<W: Write>(out: &mut W, x: f64) -> fmt::Result {
    if x < 0.0 || (x == 0.0 && x.is_sign_negative()) {
        out.write_str("(- ")?;
        write_unsigned_real(out, -x)?;
        out.write_char(')')
    } else {
        write_unsigned_real(out, x)
    }
}

fn write_unsigned_real<W: Write>(out: &mut W, x: f64) -> fmt::Result {
    let mut s = String::new();
    write!(s, "{x}")?;
    if !s.contains('.') {
        s.push_str(".0");
    }
    out.write_str(&s)
}

pub fn real_literal(x: f64) -> String {
    let mut s = String::new();
    write_real(&mut s, x).expect("writing to a String");
    s
}

// Infix printing in the model-document syntax. The printer and
// `parse::parse_expr` are inverse on every well-sorted tree whose boolean
// nodes have at least two arguments (or are `true`/`false`/`not`).

const P_OR: u8 = 1;
const P_AND: u8 = 2;
const P_NOT: u8 = 3;
const P_CMP: u8 = 4;
const P_ADD: u8 = 5;
const P_MUL: u8 = 6;
const P_UNARY: u8 = 7;
const P_POW: u8 = 8;
const P_ATOM: u8 = 9;

impl<V: fmt::Display> Expr<V> {
    fn prec(&self) -> u8 {
        match self {
            Expr::Const(c) if *c < 0.0 || c.is_sign_negative() => P_ATOM,
            Expr::Const(_) | Expr::Var(_) | Expr::Ite(..) => P_ATOM,
            Expr::Unary(UnaryOp::Neg, _) => P_UNARY,
            Expr::Unary(..) => P_ATOM,
            Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => P_ADD,
            Expr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => P_MUL,
            Expr::Binary(BinaryOp::Pow, ..) => P_POW,
            Expr::Binary(BinaryOp::Min | BinaryOp::Max, ..) => P_ATOM,
            Expr::Cmp(..) => P_CMP,
            Expr::Bool(_, args) if args.len() < 2 => P_ATOM,
            Expr::Bool(BoolOp::Or, _) => P_OR,
            Expr::Bool(BoolOp::And, _) => P_AND,
            Expr::Bool(BoolOp::Not, _) => P_NOT,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.prec() < min {
            f.write_char('(')?;
            self.fmt_at(f, 0)?;
            return f.write_char(')');
        }
        match self {
            Expr::Const(c) => {
                if *c < 0.0 || c.is_sign_negative() {
                    write!(f, "({c})")
                } else {
                    write!(f, "{c}")
                }
            }
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Unary(UnaryOp::Neg, a) => {
                f.write_char('-')?;
                // A literal right after `-` would be read back as a negative constant.
                let bare = matches!(
                    **a,
                    Expr::Var(_) | Expr::Ite(..) | Expr::Binary(BinaryOp::Min | BinaryOp::Max, ..)
                ) || matches!(**a, Expr::Unary(op, _) if op != UnaryOp::Neg);
                if bare {
                    a.fmt_at(f, P_UNARY)
                } else {
                    f.write_char('(')?;
                    a.fmt_at(f, 0)?;
                    f.write_char(')')
                }
            }
            Expr::Unary(op, a) => {
                write!(f, "{}(", op.name())?;
                a.fmt_at(f, 0)?;
                f.write_char(')')
            }
            Expr::Binary(op @ (BinaryOp::Min | BinaryOp::Max), a, b) => {
                write!(f, "{}(", op.smt_name())?;
                a.fmt_at(f, 0)?;
                f.write_str(", ")?;
                b.fmt_at(f, 0)?;
                f.write_char(')')
            }
            Expr::Binary(BinaryOp::Pow, a, b) => {
                a.fmt_at(f, P_ATOM)?;
                f.write_char('^')?;
                b.fmt_at(f, P_UNARY)
            }
            Expr::Binary(op, a, b) => {
                let p = self.prec();
                a.fmt_at(f, p)?;
                write!(f, " {} ", op.smt_name())?;
                b.fmt_at(f, p + 1)
            }
            Expr::Cmp(op, a, b) => {
                a.fmt_at(f, P_ADD)?;
                write!(f, " {} ", op.infix())?;
                b.fmt_at(f, P_ADD)
            }
            Expr::Bool(op, args) if args.len() < 2 && *op != BoolOp::Not => match (op, args.first()) {
                (BoolOp::And, None) => f.write_str("true"),
                (BoolOp::Or, None) => f.write_str("false"),
                (_, Some(a)) => {
                    f.write_str(if *op == BoolOp::And { "and(" } else { "or(" })?;
                    a.fmt_at(f, 0)?;
                    f.write_char(')')
                }
                _ => unreachable!(),
            },
            Expr::Bool(BoolOp::Not, args) => {
                f.write_str("!(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    a.fmt_at(f, 0)?;
                }
                f.write_char(')')
            }
            Expr::Bool(op, args) => {
                // Nested connectives of the same kind keep their parentheses.
                let (sep, p) = if *op == BoolOp::And { (" && ", P_NOT) } else { (" || ", P_AND) };
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    a.fmt_at(f, p)?;
                }
                Ok(())
            }
            Expr::Ite(c, a, b) => {
                f.write_str("ite(")?;
                c.fmt_at(f, 0)?;
                f.write_str(", ")?;
                a.fmt_at(f, 0)?;
                f.write_str(", ")?;
                b.fmt_at(f, 0)?;
                f.write_char(')')
            }
        }
    }
}

impl<V: fmt::Display> fmt::Display for Expr<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn v(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    fn env(x: f64) -> impl Fn(&String) -> Option<f64> {
        move |n: &String| if n == "x" { Some(x) } else { None }
    }

    #[test]
    fn de_morgan() {
        let p = Expr::and([Expr::cmp(CmpOp::Le, v("a"), Expr::Const(1.0)), Expr::cmp(CmpOp::Gt, v("b"), Expr::Const(2.0))]);
        let n = p.nnf(true);
        assert_eq!(
            n,
            Expr::Bool(
                BoolOp::Or,
                vec![
                    Expr::cmp(CmpOp::Gt, v("a"), Expr::Const(1.0)),
                    Expr::cmp(CmpOp::Le, v("b"), Expr::Const(2.0)),
                ]
            )
        );
    }

    #[test]
    fn atom_flip() {
        let p = Expr::cmp(CmpOp::Le, v("x"), Expr::Const(5.0));
        assert_eq!(p.nnf(true), Expr::cmp(CmpOp::Gt, v("x"), Expr::Const(5.0)));
    }

    #[test]
    fn residuals() {
        let p = Expr::cmp(CmpOp::Le, v("x"), Expr::Const(5.0));
        assert_eq!(p.residual(&env(4.0)).unwrap(), 0.0);
        assert_eq!(p.residual(&env(7.0)).unwrap(), 2.0);
        let np = Expr::not(p.clone());
        assert_eq!(np.residual(&env(7.0)).unwrap(), 0.0);
        assert_eq!(np.residual(&env(4.0)).unwrap(), 1.0);
        let ne = Expr::not(Expr::eq(v("x"), Expr::Const(1.0)));
        assert_eq!(ne.residual(&env(1.0)).unwrap(), 1.0);
        assert_eq!(ne.residual(&env(1.5)).unwrap(), 0.0);
        assert_eq!(Expr::<String>::ff().residual(&env(0.0)).unwrap(), 1.0);
        assert_eq!(Expr::<String>::tt().residual(&env(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn prefix_rendering() {
        let e = Expr::binary(BinaryOp::Add, v("x1"), v("x2"));
        assert_eq!(e.to_prefix(), "(+ x1 x2)");
        assert_eq!(Expr::<String>::Const(-0.5).to_prefix(), "(- 0.5)");
        assert_eq!(Expr::<String>::Const(3.0).to_prefix(), "3.0");
        assert_eq!(real_literal(0.001), "0.001");
        assert_eq!(real_literal(1e-7), "0.0000001");
    }

    #[test]
    fn folding() {
        let e = Expr::<String>::binary(BinaryOp::Mul, Expr::Const(2.0), Expr::Const(5.0)).fold();
        assert_eq!(e, Expr::Const(10.0));
    }

    #[test]
    fn infix_rendering() {
        let e = Expr::binary(BinaryOp::Sub, v("a"), Expr::binary(BinaryOp::Sub, v("b"), v("c")));
        assert_eq!(e.to_string(), "a - (b - c)");
        let e = Expr::<String>::neg(Expr::binary(BinaryOp::Pow, Expr::Const(2.0), Expr::Const(2.0)));
        assert_eq!(e.to_string(), "-(2^2)");
        let e = Expr::<String>::binary(BinaryOp::Pow, Expr::Const(-2.0), Expr::Const(2.0));
        assert_eq!(e.to_string(), "(-2)^2");
    }
}
