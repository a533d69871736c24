//! Translation of WHILE programs to LAF terms. The memory is a tuple holding
//! every program variable; statements produce new memory tuples, `if` merges
//! its branches with `nondet` of `assume`s and `while` becomes a `μ` over the
//! memory.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use laf_core::{Op, Sort, Term, TermBuilder, Var};

use crate::ast::{unroll, BinOp, Expr, Program, Stmt, UnOp};
use crate::parse::{parse_while, SyntaxError};
use crate::types::{check_program, Checker, ProgVars, TypeError};

#[derive(Clone, Debug, Default)]
pub struct TranslateOptions {
    /// Loop iterations peeled off before each loop.
    pub unroll: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assertion {
    /// 1-based, in source order.
    pub index: usize,
    pub line: usize,
    pub text: String,
    pub var: Var,
}

#[derive(Clone, Debug)]
pub struct Translation {
    pub term: Term,
    pub vars: ProgVars,
    pub assertions: Vec<Assertion>,
    /// For each program variable, the LAF variable holding its value after
    /// the last top-level statement assigning it (its initial value if none).
    pub bindings: Vec<(String, Var)>,
}

impl Translation {
    pub fn binding(&self, name: &str) -> Option<Var> {
        self.bindings
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FrontendError {
    Syntax(SyntaxError),
    Type(TypeError),
}

impl fmt::Display for FrontendError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrontendError::Syntax(e) => write!(f, "syntax error at {e}"),
            FrontendError::Type(e) => write!(f, "type error at {e}"),
        }
    }
}

impl std::error::Error for FrontendError {}

/// The memory tuple and, when it was built by `mk` here, its components.
#[derive(Clone, Debug)]
struct Mem {
    var: Var,
    comps: Option<Vec<Var>>,
}

impl Mem {
    fn opaque(var: Var) -> Mem {
        Mem { var, comps: None }
    }
}

struct Tr<'a> {
    vars: &'a ProgVars,
    reads: HashMap<(Var, usize), Var>,
    asserts: Vec<Assertion>,
    /// For each variable, definitions whose undefinedness it shares: it is ⊥
    /// exactly when one of them is. Missing means never ⊥.
    bot: HashMap<Var, BTreeSet<Var>>,
}

const WF: &str = "translation of a type-checked program is well-formed";

impl Tr<'_> {
    fn bot_of(&self, v: Var) -> BTreeSet<Var> {
        self.bot.get(&v).cloned().unwrap_or_default()
    }

    /// Appends an operation. Operations are ⊥-strict; a division is also ⊥
    /// on a zero divisor, and a projection is ⊥ exactly when its tuple is.
    fn op(&mut self, b: &mut TermBuilder, name: &str, op: Op, args: &[Var]) -> Var {
        let mut bot = BTreeSet::new();
        for a in args {
            bot.extend(self.bot_of(*a));
        }
        let v = b.op(name, op.clone(), args).expect(WF);
        if op == Op::Div {
            bot.insert(v);
        }
        if !bot.is_empty() {
            self.bot.insert(v, bot);
        }
        v
    }

    /// Marks `v` as possibly ⊥ for reasons no other variable shares.
    fn opaque(&mut self, v: Var) -> Var {
        self.bot.insert(v, BTreeSet::from([v]));
        v
    }

    /// Value of variable `i` in `m`. A component of a tuple built here is used
    /// directly when it is ⊥ whenever the tuple is; other reads are `get`s,
    /// shared per tuple.
    fn read(&mut self, b: &mut TermBuilder, m: &Mem, i: usize) -> Var {
        if let Some(c) = &m.comps {
            let whole = self.bot_of(m.var);
            if whole.is_subset(&self.bot_of(c[i])) {
                return c[i];
            }
        }
        if let Some(v) = self.reads.get(&(m.var, i)) {
            if b.in_scope(*v) {
                return *v;
            }
        }
        let v = self.op(b, &self.vars.names[i].clone(), Op::Get(i), &[m.var]);
        self.reads.insert((m.var, i), v);
        v
    }

    fn expr(&mut self, b: &mut TermBuilder, e: &Expr, want: &Sort, m: &Mem, name: &str) -> Var {
        match e {
            Expr::Var(v) => self.read(b, m, self.vars.index(v).unwrap()),
            Expr::Int(i) => b.int(name, *i).expect(WF),
            Expr::Bool(x) => b.boolean(name, *x).expect(WF),
            Expr::Nondet => b.unknown(name, want.clone()).expect(WF),
            Expr::Un(UnOp::Neg, a) => {
                let x = self.expr(b, a, &Sort::Int, m, "t");
                self.op(b, name, Op::Neg, &[x])
            }
            Expr::Un(UnOp::Not, a) => {
                let x = self.expr(b, a, &Sort::Bool, m, "t");
                self.op(b, name, Op::Not, &[x])
            }
            Expr::Bin(op, l, r) => {
                let arg = if op.is_logic() {
                    Sort::Bool
                } else if matches!(op, BinOp::Eq | BinOp::Ne) {
                    let side = if **l == Expr::Nondet { r } else { l };
                    Checker {
                        vars: self.vars,
                        line: 0,
                    }
                    .expr(side, None)
                    .expect(WF)
                } else {
                    Sort::Int
                };
                let x = self.expr(b, l, &arg, m, "t");
                let y = self.expr(b, r, &arg, m, "t");
                let (lop, args) = match op {
                    BinOp::Add => (Op::Add, [x, y]),
                    BinOp::Sub => (Op::Sub, [x, y]),
                    BinOp::Mul => (Op::Mul, [x, y]),
                    BinOp::Div => (Op::Div, [x, y]),
                    BinOp::Lt => (Op::Lt, [x, y]),
                    BinOp::Le => (Op::Le, [x, y]),
                    BinOp::Gt => (Op::Lt, [y, x]),
                    BinOp::Ge => (Op::Le, [y, x]),
                    BinOp::Eq => (Op::Eq, [x, y]),
                    BinOp::And => (Op::And, [x, y]),
                    BinOp::Or => (Op::Or, [x, y]),
                    BinOp::Ne => {
                        let eq = self.op(b, "t", Op::Eq, &[x, y]);
                        return self.op(b, name, Op::Not, &[eq]);
                    }
                };
                self.op(b, name, lop, &args)
            }
        }
    }

    fn stmts(&mut self, b: &mut TermBuilder, stmts: &[Stmt], mut m: Mem) -> Mem {
        for s in stmts {
            m = self.stmt(b, s, m);
        }
        m
    }

    fn stmt(&mut self, b: &mut TermBuilder, s: &Stmt, m: Mem) -> Mem {
        match s {
            Stmt::Assign { var, expr, .. } => {
                let i = self.vars.index(var).unwrap();
                let v = self.expr(b, expr, &self.vars.sorts[i], &m, var);
                let comps: Vec<Var> = (0..self.vars.len())
                    .map(|j| if j == i { v } else { self.read(b, &m, j) })
                    .collect();
                let t = self.op(b, "M", Op::Mk, &comps);
                Mem {
                    var: t,
                    comps: Some(comps),
                }
            }
            Stmt::If {
                cond, then, els, ..
            } => {
                let c = self.expr(b, cond, &Sort::Bool, &m, "c");
                let nc = self.op(b, "nc", Op::Not, &[c]);
                let mt = self.stmts(b, then, m.clone());
                let me = self.stmts(b, els, m);
                let at = b.assume("M", c, mt.var).expect(WF);
                let ae = b.assume("M", nc, me.var).expect(WF);
                let r = b.nondet("M", at, ae).expect(WF);
                Mem::opaque(self.opaque(r))
            }
            Stmt::While { cond, body, .. } => {
                let r = b
                    .mu("M", "M", m.var, |b, s| {
                        let head = Mem::opaque(self.opaque(s));
                        let c = self.expr(b, cond, &Sort::Bool, &head, "c");
                        let entered = b.assume("M", c, s)?;
                        let entered = Mem::opaque(self.opaque(entered));
                        Ok(self.stmts(b, body, entered).var)
                    })
                    .expect(WF);
                let after = Mem::opaque(self.opaque(r));
                let c = self.expr(b, cond, &Sort::Bool, &after, "c");
                let nc = self.op(b, "nc", Op::Not, &[c]);
                let r = b.assume("M", nc, r).expect(WF);
                Mem::opaque(self.opaque(r))
            }
            Stmt::Assert { expr, line } => {
                let index = self.asserts.len() + 1;
                let v = self.expr(b, expr, &Sort::Bool, &m, &format!("assert{index}"));
                self.asserts.push(Assertion {
                    index,
                    line: *line,
                    text: expr.to_string(),
                    var: v,
                });
                m
            }
            Stmt::Skip => m,
        }
    }
}

pub fn translate(p: &Program, opts: &TranslateOptions) -> Result<Translation, TypeError> {
    let vars = check_program(p)?;
    let stmts = unroll(&p.stmts, opts.unroll);
    let mut b = TermBuilder::new();
    let mut tr = Tr {
        vars: &vars,
        reads: HashMap::new(),
        asserts: Vec::new(),
        bot: HashMap::new(),
    };
    let init: Vec<Var> = vars
        .names
        .iter()
        .zip(&vars.sorts)
        .map(|(n, s)| b.unknown(n, s.clone()).expect(WF))
        .collect();
    // Without variables the memory is a constant standing for the empty tuple.
    let m0 = if init.is_empty() {
        b.boolean("M", true).expect(WF)
    } else {
        tr.op(&mut b, "M", Op::Mk, &init)
    };
    let mut m = Mem {
        var: m0,
        comps: Some(init.clone()),
    };
    let mut last: Vec<Option<Mem>> = vec![None; vars.len()];
    for s in &stmts {
        m = tr.stmt(&mut b, s, m);
        let mut assigned = Vec::new();
        s.assigned(&mut assigned);
        for v in assigned {
            last[vars.index(&v).unwrap()] = Some(m.clone());
        }
    }
    let mut bindings = Vec::new();
    for (i, name) in vars.names.iter().enumerate() {
        let v = match &last[i] {
            Some(lm) => tr.read(&mut b, lm, i),
            None => init[i],
        };
        bindings.push((name.clone(), v));
    }
    let asserts = std::mem::take(&mut tr.asserts);
    let term = b.finish(m.var).expect(WF);
    Ok(Translation {
        term,
        vars,
        assertions: asserts,
        bindings,
    })
}

pub fn translate_source(text: &str, opts: &TranslateOptions) -> Result<Translation, FrontendError> {
    let p = parse_while(text).map_err(FrontendError::Syntax)?;
    translate(&p, opts).map_err(FrontendError::Type)
}
