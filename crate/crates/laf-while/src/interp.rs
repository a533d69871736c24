//! Direct set-based interpreter for WHILE programs, used as the reference for
//! the translation. A store is the vector of variable values in
//! [`ProgVars`] order. Division by zero ends the execution path.

use indexmap::IndexSet;
use laf_core::Sort;
use laf_semantics::{BudgetError, EnumBudget, Value};
use num_bigint::BigInt;

use crate::ast::{BinOp, Expr, Program, Stmt, UnOp};
use crate::types::{Checker, ProgVars};

pub type Store = Vec<Value>;

struct Interp<'a> {
    vars: &'a ProgVars,
    budget: &'a EnumBudget,
}

fn values_of(sort: &Sort, budget: &EnumBudget) -> Vec<Value> {
    match sort {
        Sort::Bool => vec![Value::Bool(false), Value::Bool(true)],
        _ => (budget.int_window.0..=budget.int_window.1)
            .map(Value::int)
            .collect(),
    }
}

fn int(v: &Value) -> &BigInt {
    match v {
        Value::Int(i) => i,
        _ => unreachable!("type-checked program"),
    }
}

fn boolean(v: &Value) -> bool {
    match v {
        Value::Bool(b) => *b,
        _ => unreachable!("type-checked program"),
    }
}

fn apply(op: BinOp, a: &Value, b: &Value) -> Option<Value> {
    Some(match op {
        BinOp::Add => Value::Int(int(a) + int(b)),
        BinOp::Sub => Value::Int(int(a) - int(b)),
        BinOp::Mul => Value::Int(int(a) * int(b)),
        BinOp::Div => {
            if *int(b) == BigInt::from(0) {
                return None;
            }
            // BigInt division truncates toward zero, as C does.
            Value::Int(int(a) / int(b))
        }
        BinOp::Lt => Value::Bool(int(a) < int(b)),
        BinOp::Le => Value::Bool(int(a) <= int(b)),
        BinOp::Gt => Value::Bool(int(a) > int(b)),
        BinOp::Ge => Value::Bool(int(a) >= int(b)),
        BinOp::Eq => Value::Bool(a == b),
        BinOp::Ne => Value::Bool(a != b),
        BinOp::And => Value::Bool(boolean(a) && boolean(b)),
        BinOp::Or => Value::Bool(boolean(a) || boolean(b)),
    })
}

impl Interp<'_> {
    /// Every value `e` can take in `store`; `None` marks a failed evaluation.
    fn eval(&self, e: &Expr, want: Option<&Sort>, store: &Store) -> Vec<Option<Value>> {
        let ck = Checker {
            vars: self.vars,
            line: 0,
        };
        match e {
            Expr::Var(v) => vec![Some(store[self.vars.index(v).unwrap()].clone())],
            Expr::Int(i) => vec![Some(Value::int(*i))],
            Expr::Bool(b) => vec![Some(Value::Bool(*b))],
            Expr::Nondet => values_of(want.unwrap_or(&Sort::Int), self.budget)
                .into_iter()
                .map(Some)
                .collect(),
            Expr::Un(op, a) => {
                let s = if *op == UnOp::Neg {
                    Sort::Int
                } else {
                    Sort::Bool
                };
                self.eval(a, Some(&s), store)
                    .into_iter()
                    .map(|v| {
                        v.map(|v| match op {
                            UnOp::Neg => Value::Int(-int(&v)),
                            UnOp::Not => Value::Bool(!boolean(&v)),
                        })
                    })
                    .collect()
            }
            Expr::Bin(op, a, b) => {
                let arg = if op.is_logic() {
                    Sort::Bool
                } else if matches!(op, BinOp::Eq | BinOp::Ne) {
                    let side = if **a == Expr::Nondet { b } else { a };
                    ck.expr(side, None).expect("type-checked program")
                } else {
                    Sort::Int
                };
                let xs = self.eval(a, Some(&arg), store);
                let ys = self.eval(b, Some(&arg), store);
                let mut out = Vec::with_capacity(xs.len() * ys.len());
                for x in &xs {
                    for y in &ys {
                        out.push(match (x, y) {
                            (Some(x), Some(y)) => apply(*op, x, y),
                            _ => None,
                        });
                    }
                }
                out
            }
        }
    }

    fn branch(&self, cond: &Expr, stores: &IndexSet<Store>) -> (IndexSet<Store>, IndexSet<Store>) {
        let (mut yes, mut no) = (IndexSet::new(), IndexSet::new());
        for s in stores {
            for c in self.eval(cond, Some(&Sort::Bool), s).into_iter().flatten() {
                if boolean(&c) {
                    yes.insert(s.clone());
                } else {
                    no.insert(s.clone());
                }
            }
        }
        (yes, no)
    }

    fn stmts(
        &self,
        stmts: &[Stmt],
        mut stores: IndexSet<Store>,
    ) -> Result<IndexSet<Store>, BudgetError> {
        for s in stmts {
            stores = self.stmt(s, stores)?;
            if stores.len() > self.budget.max_env_count {
                return Err(BudgetError::EnvCount(self.budget.max_env_count));
            }
        }
        Ok(stores)
    }

    fn stmt(&self, s: &Stmt, stores: IndexSet<Store>) -> Result<IndexSet<Store>, BudgetError> {
        match s {
            Stmt::Assign { var, expr, .. } => {
                let i = self.vars.index(var).unwrap();
                let sort = &self.vars.sorts[i];
                let mut out = IndexSet::new();
                for st in &stores {
                    for v in self.eval(expr, Some(sort), st).into_iter().flatten() {
                        let mut n = st.clone();
                        n[i] = v;
                        out.insert(n);
                    }
                }
                Ok(out)
            }
            Stmt::If {
                cond, then, els, ..
            } => {
                let (yes, no) = self.branch(cond, &stores);
                let mut out = self.stmts(then, yes)?;
                out.extend(self.stmts(els, no)?);
                Ok(out)
            }
            Stmt::While { cond, body, line } => {
                let mut seen = stores.clone();
                let mut frontier = stores;
                let mut exits = IndexSet::new();
                let mut rounds = 0;
                while !frontier.is_empty() {
                    if rounds == self.budget.max_mu_iters {
                        return Err(BudgetError::MuIterations {
                            name: format!("while at line {line}"),
                            iters: rounds,
                        });
                    }
                    rounds += 1;
                    let (yes, no) = self.branch(cond, &frontier);
                    exits.extend(no);
                    frontier = IndexSet::new();
                    for st in self.stmts(body, yes)? {
                        if seen.insert(st.clone()) {
                            frontier.insert(st);
                        }
                    }
                }
                Ok(exits)
            }
            Stmt::Assert { .. } | Stmt::Skip => Ok(stores),
        }
    }
}

/// Initial stores: every combination of values of every variable.
pub fn initial_stores(vars: &ProgVars, budget: &EnumBudget) -> Vec<Store> {
    let mut out: Vec<Store> = vec![Vec::new()];
    for s in &vars.sorts {
        let vals = values_of(s, budget);
        out = out
            .into_iter()
            .flat_map(|p| {
                vals.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(v.clone());
                    q
                })
            })
            .collect();
    }
    out
}

/// Final stores reachable from any initial store, sorted.
pub fn final_stores(
    p: &Program,
    vars: &ProgVars,
    budget: &EnumBudget,
) -> Result<Vec<Store>, BudgetError> {
    let it = Interp { vars, budget };
    let init: IndexSet<Store> = initial_stores(vars, budget).into_iter().collect();
    let mut out: Vec<Store> = it.stmts(&p.stmts, init)?.into_iter().collect();
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_while;
    use crate::types::check_program;

    fn run(src: &str, lo: i64, hi: i64) -> Vec<Store> {
        let p = parse_while(src).unwrap();
        let v = check_program(&p).unwrap();
        final_stores(&p, &v, &EnumBudget::with_window(lo, hi)).unwrap()
    }

    #[test]
    fn counting_loop() {
        let out = run("x := 0; while (x < n) { x := x + 1; }", 0, 2);
        let got: Vec<(i64, i64)> = out
            .iter()
            .map(|s| {
                (
                    int(&s[0]).try_into().unwrap(),
                    int(&s[1]).try_into().unwrap(),
                )
            })
            .collect();
        assert_eq!(got, [(0, 0), (1, 1), (2, 2)]);
    }

    #[test]
    fn division_by_zero_and_divergence_end_paths() {
        assert_eq!(run("y := 1 / x;", 0, 0), Vec::<Store>::new());
        assert_eq!(run("while (true) { }", 0, 1), Vec::<Store>::new());
        assert_eq!(run("y := -7 / 2;", 0, 0), vec![vec![Value::int(-3)]]);
    }
}
