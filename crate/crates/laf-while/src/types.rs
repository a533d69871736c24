//! Program variables and their sorts. A variable's sort is that of the
//! expressions assigned to it; variables never assigned a boolean are
//! integers.

use std::fmt;

use laf_core::Sort;

use crate::ast::{Expr, Program, Stmt, UnOp};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for TypeError {}

/// Variables in order of first occurrence, which is also their index in the
/// memory tuple.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProgVars {
    pub names: Vec<String>,
    pub sorts: Vec<Sort>,
}

impl ProgVars {
    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn sort(&self, name: &str) -> Option<&Sort> {
        self.index(name).map(|i| &self.sorts[i])
    }
}

fn collect_expr(e: &Expr, out: &mut Vec<String>) {
    match e {
        Expr::Var(v) => {
            if !out.contains(v) {
                out.push(v.clone());
            }
        }
        Expr::Un(_, a) => collect_expr(a, out),
        Expr::Bin(_, a, b) => {
            collect_expr(a, out);
            collect_expr(b, out);
        }
        _ => {}
    }
}

fn collect_stmts(stmts: &[Stmt], out: &mut Vec<String>) {
    for s in stmts {
        match s {
            Stmt::Assign { var, expr, .. } => {
                collect_expr(expr, out);
                if !out.contains(var) {
                    out.push(var.clone());
                }
            }
            Stmt::If {
                cond, then, els, ..
            } => {
                collect_expr(cond, out);
                collect_stmts(then, out);
                collect_stmts(els, out);
            }
            Stmt::While { cond, body, .. } => {
                collect_expr(cond, out);
                collect_stmts(body, out);
            }
            Stmt::Assert { expr, .. } => collect_expr(expr, out),
            Stmt::Skip => {}
        }
    }
}

fn assignments<'a>(stmts: &'a [Stmt], out: &mut Vec<(&'a str, &'a Expr)>) {
    for s in stmts {
        match s {
            Stmt::Assign { var, expr, .. } => out.push((var, expr)),
            Stmt::If { then, els, .. } => {
                assignments(then, out);
                assignments(els, out);
            }
            Stmt::While { body, .. } => assignments(body, out),
            _ => {}
        }
    }
}

/// Sort an expression has, judging by its head alone.
fn head_sort(e: &Expr, known: &dyn Fn(&str) -> Option<Sort>) -> Option<Sort> {
    match e {
        Expr::Var(v) => known(v),
        Expr::Int(_) | Expr::Un(UnOp::Neg, _) => Some(Sort::Int),
        Expr::Bool(_) | Expr::Un(UnOp::Not, _) => Some(Sort::Bool),
        Expr::Nondet => None,
        Expr::Bin(op, _, _) if op.is_arith() => Some(Sort::Int),
        Expr::Bin(..) => Some(Sort::Bool),
    }
}

pub(crate) struct Checker<'a> {
    pub vars: &'a ProgVars,
    pub line: usize,
}

impl Checker<'_> {
    fn err<T>(&self, message: String) -> Result<T, TypeError> {
        Err(TypeError {
            line: self.line,
            message,
        })
    }

    /// Sort of `e`; `want` resolves `nondet`, which defaults to int.
    pub fn expr(&self, e: &Expr, want: Option<&Sort>) -> Result<Sort, TypeError> {
        let expect = |e: &Expr, s: Sort| -> Result<(), TypeError> {
            let got = self.expr(e, Some(&s))?;
            if got != s {
                return self.err(format!("`{e}` has sort {got}, expected {s}"));
            }
            Ok(())
        };
        match e {
            Expr::Var(v) => Ok(self.vars.sort(v).cloned().expect("variable collected")),
            Expr::Int(_) => Ok(Sort::Int),
            Expr::Bool(_) => Ok(Sort::Bool),
            Expr::Nondet => Ok(want.cloned().unwrap_or(Sort::Int)),
            Expr::Un(UnOp::Neg, a) => expect(a, Sort::Int).map(|_| Sort::Int),
            Expr::Un(UnOp::Not, a) => expect(a, Sort::Bool).map(|_| Sort::Bool),
            Expr::Bin(op, a, b) if op.is_arith() => {
                expect(a, Sort::Int)?;
                expect(b, Sort::Int)?;
                Ok(Sort::Int)
            }
            Expr::Bin(op, a, b) if op.is_order() => {
                expect(a, Sort::Int)?;
                expect(b, Sort::Int)?;
                Ok(Sort::Bool)
            }
            Expr::Bin(op, a, b) if op.is_logic() => {
                expect(a, Sort::Bool)?;
                expect(b, Sort::Bool)?;
                Ok(Sort::Bool)
            }
            Expr::Bin(_, a, b) => {
                let s = if **a == Expr::Nondet {
                    self.expr(b, None)?
                } else {
                    self.expr(a, None)?
                };
                expect(a, s.clone())?;
                expect(b, s)?;
                Ok(Sort::Bool)
            }
        }
    }

    pub fn stmts(&mut self, stmts: &[Stmt]) -> Result<(), TypeError> {
        for s in stmts {
            match s {
                Stmt::Assign { var, expr, line } => {
                    self.line = *line;
                    let want = self.vars.sort(var).unwrap();
                    let got = self.expr(expr, Some(want))?;
                    if got != *want {
                        return self.err(format!(
                            "`{var}` is {want} but is assigned `{expr}` of sort {got}"
                        ));
                    }
                }
                Stmt::If {
                    cond,
                    then,
                    els,
                    line,
                } => {
                    self.cond(cond, *line)?;
                    self.stmts(then)?;
                    self.stmts(els)?;
                }
                Stmt::While { cond, body, line } => {
                    self.cond(cond, *line)?;
                    self.stmts(body)?;
                }
                Stmt::Assert { expr, line } => self.cond(expr, *line)?,
                Stmt::Skip => {}
            }
        }
        Ok(())
    }

    fn cond(&mut self, e: &Expr, line: usize) -> Result<(), TypeError> {
        self.line = line;
        let s = self.expr(e, Some(&Sort::Bool))?;
        if s != Sort::Bool {
            return self.err(format!("condition `{e}` has sort {s}"));
        }
        Ok(())
    }
}

/// Collects the program variables, infers their sorts and type-checks the
/// program.
pub fn check_program(p: &Program) -> Result<ProgVars, TypeError> {
    let mut names = Vec::new();
    collect_stmts(&p.stmts, &mut names);
    let mut assigns = Vec::new();
    assignments(&p.stmts, &mut assigns);
    let mut sorts: Vec<Option<Sort>> = vec![None; names.len()];
    let idx = |n: &str| names.iter().position(|m| m == n).unwrap();
    loop {
        let mut changed = false;
        for (v, e) in &assigns {
            let i = idx(v);
            if sorts[i].is_none() {
                if let Some(s) = head_sort(e, &|n| sorts[idx(n)].clone()) {
                    sorts[i] = Some(s);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let vars = ProgVars {
        names: names.clone(),
        sorts: sorts.into_iter().map(|s| s.unwrap_or(Sort::Int)).collect(),
    };
    Checker {
        vars: &vars,
        line: 0,
    }
    .stmts(&p.stmts)?;
    Ok(vars)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_while;

    #[test]
    fn sorts_follow_assignments() {
        let p = parse_while("b := x < 0; c := b; if (c) { y := 1; } z := nondet;").unwrap();
        let v = check_program(&p).unwrap();
        assert_eq!(v.names, ["x", "b", "c", "y", "z"]);
        assert_eq!(
            v.sorts,
            [Sort::Int, Sort::Bool, Sort::Bool, Sort::Int, Sort::Int]
        );
    }

    #[test]
    fn mismatches_are_reported() {
        let p = parse_while("b := true;\nb := 1;").unwrap();
        assert_eq!(check_program(&p).unwrap_err().line, 2);
        let p = parse_while("x := 1; if (x) { }").unwrap();
        assert!(check_program(&p).is_err());
        let p = parse_while("b := nondet == true; x := nondet + 1;").unwrap();
        assert!(check_program(&p).is_ok());
    }
}
