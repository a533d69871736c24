//! Parenthesized prefix text format for LAF terms.
//!
//! ```text
//! term   := def* "(in" VAR ")"
//! def    := "(let" VAR sort rhs ")"
//! rhs    := "(" OPNAME VAR* ")" | "(nondet" VAR VAR ")" | "(assume" VAR VAR ")"
//!         | "(unknown)" | "(mu" "(" VAR ")" def* VAR VAR ")" | literal
//! sort   := "bool" | "int" | "(bv" INT ")" | "(tuple" sort+ ")"
//! ```
//! Comments run from `;` to end of line.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::build::TermBuilder;
use crate::ir::{Context, Literal, Op, Rhs, Sort, Term, Var};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// A parsed s-expression with the line and column where it starts.
#[derive(Debug, Clone)]
pub enum Sexp {
    Atom(String, usize, usize),
    List(Vec<Sexp>, usize, usize),
}

impl Sexp {
    pub fn pos(&self) -> (usize, usize) {
        match self {
            Sexp::Atom(_, l, c) | Sexp::List(_, l, c) => (*l, *c),
        }
    }

    pub fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.pos();
        Err(ParseError {
            line,
            col,
            message: message.into(),
        })
    }

    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s, ..) => Some(s),
            _ => None,
        }
    }
}

pub fn read_sexps(text: &str) -> Result<Vec<Sexp>, ParseError> {
    let mut stack: Vec<(Vec<Sexp>, usize, usize)> = vec![(Vec::new(), 0, 0)];
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    while let Some(&ch) = chars.peek() {
        match ch {
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '(' => {
                chars.next();
                stack.push((Vec::new(), line, col));
                col += 1;
            }
            ')' => {
                chars.next();
                if stack.len() == 1 {
                    return Err(ParseError {
                        line,
                        col,
                        message: "unbalanced ')'".into(),
                    });
                }
                let (items, l, c) = stack.pop().unwrap();
                stack.last_mut().unwrap().0.push(Sexp::List(items, l, c));
                col += 1;
            }
            _ => {
                let (l, c) = (line, col);
                let mut s = String::new();
                while let Some(&c2) = chars.peek() {
                    if c2.is_whitespace() || c2 == '(' || c2 == ')' || c2 == ';' {
                        break;
                    }
                    s.push(c2);
                    chars.next();
                    col += 1;
                }
                stack.last_mut().unwrap().0.push(Sexp::Atom(s, l, c));
            }
        }
    }
    if stack.len() != 1 {
        let (_, l, c) = stack.pop().unwrap();
        return Err(ParseError {
            line: l,
            col: c,
            message: "unbalanced '('".into(),
        });
    }
    Ok(stack.pop().unwrap().0)
}

fn parse_sort(s: &Sexp) -> Result<Sort, ParseError> {
    match s {
        Sexp::Atom(a, ..) if a == "bool" => Ok(Sort::Bool),
        Sexp::Atom(a, ..) if a == "int" => Ok(Sort::Int),
        Sexp::List(items, ..) if !items.is_empty() => match items[0].atom() {
            Some("bv") if items.len() == 2 => {
                let w: u32 = items[1]
                    .atom()
                    .and_then(|a| a.parse().ok())
                    .ok_or_else(|| ParseError {
                        line: items[1].pos().0,
                        col: items[1].pos().1,
                        message: "bad bitvector width".into(),
                    })?;
                if w == 0 || w > 64 {
                    return items[1].err("bitvector width must be in 1..=64");
                }
                Ok(Sort::BitVec(w))
            }
            Some("tuple") if items.len() >= 2 => Ok(Sort::Tuple(
                items[1..]
                    .iter()
                    .map(parse_sort)
                    .collect::<Result<_, _>>()?,
            )),
            _ => s.err("bad sort"),
        },
        _ => s.err("bad sort"),
    }
}

struct Parser {
    b: TermBuilder,
    names: HashMap<String, Var>,
    used: HashSet<String>,
}

impl Parser {
    fn lookup(&self, s: &Sexp) -> Result<Var, ParseError> {
        let name = match s.atom() {
            Some(n) => n,
            None => return s.err("expected a variable"),
        };
        match self.names.get(name) {
            Some(v) => Ok(*v),
            None => s.err(format!("unbound variable {name}")),
        }
    }

    fn wf<T>(at: &Sexp, r: Result<T, crate::wf::WfError>) -> Result<T, ParseError> {
        r.or_else(|e| at.err(e.to_string()))
    }

    fn def(&mut self, s: &Sexp, scope: &mut Vec<String>) -> Result<(), ParseError> {
        let items = match s {
            Sexp::List(items, ..) if items.first().and_then(Sexp::atom) == Some("let") => items,
            _ => return s.err("expected (let VAR sort rhs)"),
        };
        if items.len() != 4 {
            return s.err("let expects a variable, a sort and a right-hand side");
        }
        let name = match items[1].atom() {
            Some(n) => n.to_string(),
            None => return items[1].err("expected a variable name"),
        };
        if self.used.contains(&name) {
            return items[1].err(format!("variable {name} defined twice"));
        }
        let sort = parse_sort(&items[2])?;
        let rhs = &items[3];
        let v = match rhs {
            Sexp::Atom(a, ..) => {
                let lit = match (a.as_str(), &sort) {
                    ("true", Sort::Bool) => Literal::Bool(true),
                    ("false", Sort::Bool) => Literal::Bool(false),
                    (n, Sort::Int) => match n.parse::<BigInt>() {
                        Ok(i) => Literal::Int(i),
                        Err(_) => return rhs.err("bad integer literal"),
                    },
                    (n, Sort::BitVec(w)) => match n.parse::<u64>() {
                        Ok(bits) => Literal::BitVec { width: *w, bits },
                        Err(_) => return rhs.err("bad bitvector literal"),
                    },
                    _ => return rhs.err("literal does not match the declared sort"),
                };
                Self::wf(rhs, self.b.lit(&name, lit))?
            }
            Sexp::List(parts, ..) => {
                let head = match parts.first().and_then(Sexp::atom) {
                    Some(h) => h,
                    None => return rhs.err("expected an operator"),
                };
                match head {
                    "nondet" | "assume" => {
                        if parts.len() != 3 {
                            return rhs.err(format!("{head} expects 2 arguments"));
                        }
                        let a = self.lookup(&parts[1])?;
                        let c = self.lookup(&parts[2])?;
                        let r = if head == "nondet" {
                            self.b.raw(&name, sort.clone(), Rhs::Nondet(a, c))
                        } else {
                            self.b.raw(&name, sort.clone(), Rhs::Assume(a, c))
                        };
                        Self::wf(rhs, r)?
                    }
                    "unknown" => {
                        if parts.len() != 1 {
                            return rhs.err("unknown takes no arguments");
                        }
                        Self::wf(rhs, self.b.unknown(&name, sort.clone()))?
                    }
                    "mu" => self.mu(&name, &sort, rhs, parts)?,
                    _ => {
                        let op = match Op::from_name(head) {
                            Some(op) => op,
                            None => return parts[0].err(format!("unknown operator {head}")),
                        };
                        let args = parts[1..]
                            .iter()
                            .map(|p| self.lookup(p))
                            .collect::<Result<Vec<_>, _>>()?;
                        Self::wf(rhs, self.b.raw(&name, sort.clone(), Rhs::Op(op, args)))?
                    }
                }
            }
        };
        if *self.b.sort(v) != sort {
            return items[2].err("declared sort does not match");
        }
        self.used.insert(name.clone());
        self.names.insert(name.clone(), v);
        scope.push(name);
        Ok(())
    }

    fn mu(
        &mut self,
        name: &str,
        sort: &Sort,
        rhs: &Sexp,
        parts: &[Sexp],
    ) -> Result<Var, ParseError> {
        if parts.len() < 4 {
            return rhs.err("mu expects (VAR) def* EXIT INIT");
        }
        let lv_name = match &parts[1] {
            Sexp::List(l, ..) if l.len() == 1 && l[0].atom().is_some() => {
                l[0].atom().unwrap().to_string()
            }
            _ => return parts[1].err("expected (LOOPVAR)"),
        };
        if self.used.contains(&lv_name) {
            return parts[1].err(format!("variable {lv_name} defined twice"));
        }
        let n = parts.len();
        let init = self.lookup(&parts[n - 1])?;
        if self.b.sort(init) != sort {
            return parts[n - 1].err("init sort does not match the declared sort");
        }
        let body_defs = &parts[2..n - 2];
        let exit_s = &parts[n - 2];
        let mut err: Option<ParseError> = None;
        let mut body_scope: Vec<String> = Vec::new();
        let r = {
            let this = &mut *self;
            let mut b = std::mem::take(&mut this.b);
            let out = b.mu(name, &lv_name, init, |bb, s| {
                std::mem::swap(&mut this.b, bb);
                this.used.insert(lv_name.clone());
                this.names.insert(lv_name.clone(), s);
                body_scope.push(lv_name.clone());
                let mut res = Ok(s);
                for d in body_defs {
                    if let Err(e) = this.def(d, &mut body_scope) {
                        err = Some(e);
                        res = Err(crate::wf::WfError::Scope(String::new()));
                        break;
                    }
                }
                if res.is_ok() {
                    match this.lookup(exit_s) {
                        Ok(e) => res = Ok(e),
                        Err(e) => {
                            err = Some(e);
                            res = Err(crate::wf::WfError::Scope(String::new()));
                        }
                    }
                }
                std::mem::swap(&mut this.b, bb);
                res
            });
            this.b = b;
            out
        };
        for n in body_scope {
            self.names.remove(&n);
        }
        if let Some(e) = err {
            return Err(e);
        }
        Self::wf(rhs, r)
    }
}

/// Parses a term from its text form.
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let items = read_sexps(text)?;
    let mut p = Parser {
        b: TermBuilder::new(),
        names: HashMap::new(),
        used: HashSet::new(),
    };
    let mut top_scope = Vec::new();
    let mut result = None;
    for (i, s) in items.iter().enumerate() {
        if let Sexp::List(l, ..) = s {
            if l.first().and_then(Sexp::atom) == Some("in") {
                if l.len() != 2 {
                    return s.err("in expects one variable");
                }
                if i + 1 != items.len() {
                    return items[i + 1].err("trailing input after (in ...)");
                }
                result = Some(p.lookup(&l[1])?);
                break;
            }
        }
        p.def(s, &mut top_scope)?;
    }
    let result = match result {
        Some(r) => r,
        None => {
            return Err(ParseError {
                line: 1,
                col: 1,
                message: "missing (in VAR)".into(),
            })
        }
    };
    p.b.finish(result).map_err(|e| ParseError {
        line: 1,
        col: 1,
        message: e.to_string(),
    })
}

fn is_plain_ident(s: &str) -> bool {
    !s.is_empty()
        && !s
            .chars()
            .any(|c| c.is_whitespace() || c == '(' || c == ')' || c == ';')
        && s.parse::<BigInt>().is_err()
        && s != "true"
        && s != "false"
}

/// Display names used when printing: the declared name when it is unique and
/// printable, otherwise the name suffixed with the variable id.
pub fn display_names(term: &Term) -> Vec<String> {
    let mut count: HashMap<&str, usize> = HashMap::new();
    for v in term.ctx.bound_vars() {
        *count.entry(term.vars.name(v)).or_default() += 1;
    }
    let mut taken: HashSet<String> = HashSet::new();
    let mut out = vec![String::new(); term.vars.len()];
    for v in term.ctx.bound_vars() {
        let n = term.vars.name(v);
        if count[n] == 1 && is_plain_ident(n) {
            taken.insert(n.to_string());
        }
    }
    for v in term.ctx.bound_vars() {
        let n = term.vars.name(v);
        out[v.index()] = if count[n] == 1 && is_plain_ident(n) {
            n.to_string()
        } else {
            let base: String = if n.is_empty() {
                "v".into()
            } else {
                n.chars()
                    .map(|c| {
                        if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                            '_'
                        } else {
                            c
                        }
                    })
                    .collect()
            };
            let mut cand = format!("{base}_{}", v.0);
            while taken.contains(&cand) || !is_plain_ident(&cand) {
                cand.push('_');
            }
            taken.insert(cand.clone());
            cand
        };
    }
    out
}

fn print_ctx(term: &Term, names: &[String], ctx: &Context, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    for d in &ctx.defs {
        let n = &names[d.var.index()];
        let sort = term.vars.sort(d.var);
        let _ = write!(out, "{pad}(let {n} {sort} ");
        match &d.rhs {
            Rhs::Op(Op::Lit(l), _) => {
                let _ = write!(out, "{l}");
            }
            Rhs::Op(op, args) => {
                let _ = write!(out, "({}", op.name());
                for a in args {
                    let _ = write!(out, " {}", names[a.index()]);
                }
                out.push(')');
            }
            Rhs::Nondet(a, b) => {
                let _ = write!(out, "(nondet {} {})", names[a.index()], names[b.index()]);
            }
            Rhs::Assume(c, v) => {
                let _ = write!(out, "(assume {} {})", names[c.index()], names[v.index()]);
            }
            Rhs::Unknown => out.push_str("(unknown)"),
            Rhs::Mu(mu) => {
                let _ = writeln!(out, "(mu ({})", names[mu.loopvar.index()]);
                print_ctx(term, names, &mu.body, indent + 1, out);
                let _ = write!(
                    out,
                    "{pad}  {} {})",
                    names[mu.exit.index()],
                    names[mu.init.index()]
                );
            }
        }
        out.push_str(")\n");
    }
}

/// Prints a term in the normalized text form.
pub fn print_term(term: &Term) -> String {
    let names = display_names(term);
    let mut out = String::new();
    print_ctx(term, &names, &term.ctx, 0, &mut out);
    let _ = writeln!(out, "(in {})", names[term.result.index()]);
    out
}

/// Integer literal helper for callers that need a machine integer view.
pub fn literal_as_i64(l: &Literal) -> Option<i64> {
    match l {
        Literal::Int(i) => i.to_i64(),
        Literal::Bool(b) => Some(*b as i64),
        Literal::BitVec { bits, .. } => i64::try_from(*bits).ok(),
    }
}
