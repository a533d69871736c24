//! Turning an oracle environment into a model of the first-order formula.

use std::fmt;

use laf_core::{Op, Rhs, Term, Var};
use laf_semantics::{eval_op, Env, Value};

use crate::fo::{flatten, scalars, unflatten, FoFormula};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EmbedError {
    Loop(String),
    Unbound(String),
    /// The environment gives a variable a value its definition cannot produce.
    Inconsistent {
        var: String,
        detail: String,
    },
    /// The assignment built from the environment falsifies a conjunct.
    Falsified(usize),
}

impl fmt::Display for EmbedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmbedError::Loop(x) => write!(f, "loop {x}: only loop-free terms embed"),
            EmbedError::Unbound(x) => write!(f, "{x} is unbound in the environment"),
            EmbedError::Inconsistent { var, detail } => write!(f, "{var}: {detail}"),
            EmbedError::Falsified(i) => write!(f, "conjunct {i} is false"),
        }
    }
}

impl std::error::Error for EmbedError {}

/// Extends `env` to an assignment of every solver variable of `f`: `c_x` is
/// false exactly where `env` has ⊥, and `v_x` holds the value otherwise. Values
/// of ⊥ variables are whatever their definitions compute, or a default where
/// unconstrained. The result is checked against the formula.
pub fn embed_model(
    term: &Term,
    f: &FoFormula,
    env: &Env,
) -> Result<Vec<Option<Value>>, EmbedError> {
    let mut asg: Vec<Option<Value>> = vec![None; f.svars.len()];
    // Components assigned to each LAF variable.
    let mut comps: Vec<Option<Vec<Value>>> = vec![None; term.vars.len()];
    for def in &term.ctx.defs {
        let x = def.var;
        let name = || term.vars.name(x).to_string();
        if matches!(def.rhs, Rhs::Mu(_)) {
            return Err(EmbedError::Loop(name()));
        }
        let val = env
            .get(x.index())
            .cloned()
            .flatten()
            .ok_or_else(|| EmbedError::Unbound(name()))?;
        let sort = term.vars.sort(x);
        let arg = |a: Var, comps: &[Option<Vec<Value>>]| {
            unflatten(term.vars.sort(a), comps[a.index()].as_ref().unwrap())
        };
        let (defined, cs) = match flatten(&val) {
            Some(cs) => (true, cs),
            None => {
                let computed = match &def.rhs {
                    Rhs::Op(Op::Div, _) => None,
                    Rhs::Op(op, args) => {
                        let vals: Vec<Value> = args.iter().map(|a| arg(*a, &comps)).collect();
                        flatten(&eval_op(op, &vals))
                    }
                    Rhs::Assume(_, v) => comps[v.index()].clone(),
                    Rhs::Unknown => {
                        return Err(EmbedError::Inconsistent {
                            var: name(),
                            detail: "an unknown is never ⊥".into(),
                        })
                    }
                    _ => None,
                };
                let cs = computed
                    .unwrap_or_else(|| scalars(sort).iter().map(|s| s.default_value()).collect());
                (false, cs)
            }
        };
        let p = f.pair(x).expect("every top-level variable is translated");
        if cs.len() != p.v.len() {
            return Err(EmbedError::Inconsistent {
                var: name(),
                detail: format!("{val} does not have sort {sort}"),
            });
        }
        asg[p.c.index()] = Some(Value::Bool(defined));
        for (s, v) in p.v.iter().zip(&cs) {
            asg[s.index()] = Some(v.clone());
        }
        comps[x.index()] = Some(cs);
    }
    match f.first_failure(&asg) {
        Some(i) => Err(EmbedError::Falsified(i)),
        None => Ok(asg),
    }
}
