//! Abstract syntax of IMP, plus its concrete syntax and a random program
//! generator.
//!
//! Programs range over a finite, dense set of variables collected at parse
//! time. Booleans are integers: zero is false, anything else is true.

mod generate;
mod parser;
mod pretty;

pub use generate::{gen_batch, gen_random, GenConfig};
pub use parser::{parse, parse_with_vars, ParseError};
pub use pretty::{pretty, pretty_expr, pretty_stmt};

use std::fmt;

use crate::machine_int::{BinOp, Width};

/// Ordinal of a variable within its program's variable set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(i64),
    Var(VarId),
    BinOp(BinOp, Box<Expr>, Box<Expr>),
    /// An arbitrary machine integer (`?`).
    Unknown,
}

impl Expr {
    pub fn binop(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::BinOp(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(VarId(i))
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::BinOp(_, l, r) => 1 + l.node_count() + r.node_count(),
            _ => 1,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::BinOp(_, l, r) => 1 + l.depth().max(r.depth()),
            _ => 1,
        }
    }

    pub fn for_each_var(&self, f: &mut impl FnMut(VarId)) {
        match self {
            Expr::Var(v) => f(*v),
            Expr::BinOp(_, l, r) => {
                l.for_each_var(f);
                r.for_each_var(f);
            }
            Expr::Const(_) | Expr::Unknown => {}
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Stmt {
    Assign(VarId, Expr),
    Assume(Expr),
    Seq(Box<Stmt>, Box<Stmt>),
    Choice(Box<Stmt>, Box<Stmt>),
    Loop(Box<Stmt>),
}

impl Stmt {
    pub fn assign(v: usize, e: Expr) -> Stmt {
        Stmt::Assign(VarId(v), e)
    }

    pub fn seq(a: Stmt, b: Stmt) -> Stmt {
        Stmt::Seq(Box::new(a), Box::new(b))
    }

    pub fn choice(a: Stmt, b: Stmt) -> Stmt {
        Stmt::Choice(Box::new(a), Box::new(b))
    }

    pub fn looping(body: Stmt) -> Stmt {
        Stmt::Loop(Box::new(body))
    }

    /// `if cond { then } else { els }`.
    pub fn if_else(cond: Expr, then: Stmt, els: Stmt) -> Stmt {
        let negated = Expr::binop(BinOp::Eq, cond.clone(), Expr::Const(0));
        Stmt::choice(
            Stmt::seq_right(Stmt::Assume(cond), then),
            Stmt::seq_right(Stmt::Assume(negated), els),
        )
    }

    /// `while cond { body }`.
    pub fn while_loop(cond: Expr, body: Stmt) -> Stmt {
        let negated = Expr::binop(BinOp::Eq, cond.clone(), Expr::Const(0));
        Stmt::seq(
            Stmt::looping(Stmt::seq_right(Stmt::Assume(cond), body)),
            Stmt::Assume(negated),
        )
    }

    /// Sequential composition that keeps `Seq` chains nested to the right,
    /// the only shape the concrete syntax can express.
    pub fn seq_right(a: Stmt, b: Stmt) -> Stmt {
        match a {
            Stmt::Seq(x, y) => Stmt::seq(*x, Stmt::seq_right(*y, b)),
            a => Stmt::seq(a, b),
        }
    }

    /// Number of statement nodes.
    pub fn size(&self) -> usize {
        match self {
            Stmt::Assign(..) | Stmt::Assume(_) => 1,
            Stmt::Seq(a, b) | Stmt::Choice(a, b) => 1 + a.size() + b.size(),
            Stmt::Loop(b) => 1 + b.size(),
        }
    }

    pub fn loop_depth(&self) -> usize {
        match self {
            Stmt::Assign(..) | Stmt::Assume(_) => 0,
            Stmt::Seq(a, b) | Stmt::Choice(a, b) => a.loop_depth().max(b.loop_depth()),
            Stmt::Loop(b) => 1 + b.loop_depth(),
        }
    }

    pub fn for_each_expr(&self, f: &mut impl FnMut(&Expr)) {
        match self {
            Stmt::Assign(_, e) | Stmt::Assume(e) => f(e),
            Stmt::Seq(a, b) | Stmt::Choice(a, b) => {
                a.for_each_expr(f);
                b.for_each_expr(f);
            }
            Stmt::Loop(b) => b.for_each_expr(f),
        }
    }

    pub fn for_each_var(&self, f: &mut impl FnMut(VarId)) {
        match self {
            Stmt::Assign(v, e) => {
                f(*v);
                e.for_each_var(f);
            }
            Stmt::Assume(e) => e.for_each_var(f),
            Stmt::Seq(a, b) | Stmt::Choice(a, b) => {
                a.for_each_var(f);
                b.for_each_var(f);
            }
            Stmt::Loop(b) => b.for_each_var(f),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProgramError {
    UnknownVariable(usize),
    EmptyVarSet,
    ConstantOutOfRange(i64),
}

impl fmt::Display for ProgramError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProgramError::UnknownVariable(i) => write!(f, "variable #{i} is not declared"),
            ProgramError::EmptyVarSet => write!(f, "program has no variables"),
            ProgramError::ConstantOutOfRange(c) => write!(f, "constant {c} is out of range"),
        }
    }
}

impl std::error::Error for ProgramError {}

/// A statement together with its variable set and integer width.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub vars: Vec<String>,
    pub body: Stmt,
    pub width: Width,
}

impl Program {
    pub fn new(vars: Vec<String>, body: Stmt, width: Width) -> Result<Self, ProgramError> {
        if vars.is_empty() {
            return Err(ProgramError::EmptyVarSet);
        }
        let mut err = None;
        body.for_each_var(&mut |v| {
            if v.0 >= vars.len() {
                err.get_or_insert(ProgramError::UnknownVariable(v.0));
            }
        });
        body.for_each_expr(&mut |e| check_consts(e, width, &mut err));
        match err {
            Some(e) => Err(e),
            None => Ok(Program { vars, body, width }),
        }
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v == name).map(VarId)
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.vars[v.0]
    }
}

fn check_consts(e: &Expr, width: Width, err: &mut Option<ProgramError>) {
    match e {
        Expr::Const(c) if !width.inbounds(*c as i128) => {
            err.get_or_insert(ProgramError::ConstantOutOfRange(*c));
        }
        Expr::BinOp(_, l, r) => {
            check_consts(l, width, err);
            check_consts(r, width, err);
        }
        _ => {}
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty(self))
    }
}
