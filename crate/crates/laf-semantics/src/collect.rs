use indexmap::IndexSet;
use laf_core::{Context, Def, Mu, Rhs, Sort, Term, VarTable};
use num_bigint::BigInt;

use crate::value::{eval_op, mask, Value};

/// Environment indexed by variable id; `None` marks a variable not yet evaluated.
pub type Env = Vec<Option<Value>>;

/// Bounds that make the collecting semantics computable on small instances.
#[derive(Clone, Debug)]
pub struct EnumBudget {
    /// Inclusive range enumerated for `unknown` integers.
    pub int_window: (i64, i64),
    pub max_mu_iters: usize,
    pub max_env_count: usize,
    /// State cap for the small-step machine.
    pub max_states: usize,
    /// Stop every loop after exactly `max_mu_iters` iterations instead of
    /// failing. Used for bounded-unrolling comparisons.
    pub truncate_mu: bool,
}

impl Default for EnumBudget {
    fn default() -> Self {
        EnumBudget {
            int_window: (-8, 8),
            max_mu_iters: 64,
            max_env_count: 200_000,
            max_states: 2_000_000,
            truncate_mu: false,
        }
    }
}

impl EnumBudget {
    pub fn with_window(lo: i64, hi: i64) -> Self {
        EnumBudget {
            int_window: (lo, hi),
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum BudgetError {
    #[error("loop {name} did not converge within {iters} iterations")]
    MuIterations { name: String, iters: usize },
    #[error("more than {0} environments")]
    EnvCount(usize),
    #[error("more than {0} machine states")]
    States(usize),
}

/// Values of a sort under the enumeration bounds: booleans exactly, integers
/// over the window, bitvectors exactly up to 8 bits and otherwise the window
/// reduced modulo 2^width.
pub fn enumerate_sort(sort: &Sort, budget: &EnumBudget) -> Vec<Value> {
    match sort {
        Sort::Bool => vec![Value::Bool(false), Value::Bool(true)],
        Sort::Int => (budget.int_window.0..=budget.int_window.1)
            .map(|i| Value::Int(BigInt::from(i)))
            .collect(),
        Sort::BitVec(w) if *w <= 8 => (0..(1u64 << w))
            .map(|bits| Value::BitVec { width: *w, bits })
            .collect(),
        Sort::BitVec(w) => {
            let mut seen = IndexSet::new();
            for i in budget.int_window.0..=budget.int_window.1 {
                seen.insert((i as u64) & mask(*w));
            }
            seen.into_iter()
                .map(|bits| Value::BitVec { width: *w, bits })
                .collect()
        }
        Sort::Tuple(elems) => {
            let mut out: Vec<Vec<Value>> = vec![Vec::new()];
            for s in elems {
                let vals = enumerate_sort(s, budget);
                let mut next = Vec::with_capacity(out.len() * vals.len());
                for prefix in &out {
                    for v in &vals {
                        let mut p = prefix.clone();
                        p.push(v.clone());
                        next.push(p);
                    }
                }
                out = next;
            }
            out.into_iter().map(Value::Tuple).collect()
        }
    }
}

fn get(env: &Env, v: laf_core::Var) -> Value {
    env[v.index()]
        .clone()
        .expect("variable read before definition")
}

/// Value of an `assume`; a ⊥ condition also yields ⊥.
pub(crate) fn assume_value(cond: &Value, val: Value) -> Value {
    match cond {
        Value::Bool(true) => val,
        _ => Value::Bottom,
    }
}

struct Collector<'a> {
    vars: &'a VarTable,
    budget: &'a EnumBudget,
}

impl Collector<'_> {
    fn context(&self, ctx: &Context, envs: IndexSet<Env>) -> Result<IndexSet<Env>, BudgetError> {
        let mut envs = envs;
        for def in &ctx.defs {
            let mut next = IndexSet::new();
            for env in &envs {
                self.def(def, env, &mut next)?;
                if next.len() > self.budget.max_env_count {
                    return Err(BudgetError::EnvCount(self.budget.max_env_count));
                }
            }
            envs = next;
        }
        Ok(envs)
    }

    fn def(&self, def: &Def, env: &Env, out: &mut IndexSet<Env>) -> Result<(), BudgetError> {
        let x = def.var.index();
        let mut push = |v: Value| {
            let mut e = env.clone();
            e[x] = Some(v);
            out.insert(e);
        };
        match &def.rhs {
            Rhs::Op(op, args) => {
                let vals: Vec<Value> = args.iter().map(|a| get(env, *a)).collect();
                push(eval_op(op, &vals));
            }
            Rhs::Nondet(a, b) => {
                push(get(env, *a));
                push(get(env, *b));
            }
            Rhs::Assume(c, v) => push(assume_value(&get(env, *c), get(env, *v))),
            Rhs::Unknown => {
                for v in enumerate_sort(self.vars.sort(def.var), self.budget) {
                    push(v);
                }
            }
            Rhs::Mu(mu) => {
                for v in self.mu_values(def, mu, env)? {
                    push(v);
                }
            }
        }
        Ok(())
    }

    /// Least set containing the initial value and closed under one body
    /// iteration, computed by frontier iteration.
    fn mu_values(&self, def: &Def, mu: &Mu, env: &Env) -> Result<IndexSet<Value>, BudgetError> {
        let mut all: IndexSet<Value> = IndexSet::new();
        all.insert(get(env, mu.init));
        let mut frontier: Vec<Value> = all.iter().cloned().collect();
        let mut rounds = 0;
        while !frontier.is_empty() {
            if rounds == self.budget.max_mu_iters {
                if self.budget.truncate_mu {
                    break;
                }
                return Err(BudgetError::MuIterations {
                    name: self.vars.name(def.var).to_string(),
                    iters: self.budget.max_mu_iters,
                });
            }
            rounds += 1;
            let mut starts = IndexSet::new();
            for v in &frontier {
                let mut e = env.clone();
                e[mu.loopvar.index()] = Some(v.clone());
                starts.insert(e);
            }
            let ends = self.context(&mu.body, starts)?;
            let mut next = Vec::new();
            for e in &ends {
                let v = get(e, mu.exit);
                if all.insert(v.clone()) {
                    next.push(v);
                }
            }
            if all.len() > self.budget.max_env_count {
                return Err(BudgetError::EnvCount(self.budget.max_env_count));
            }
            frontier = next;
        }
        Ok(all)
    }
}

/// Collecting semantics of `ctx` from `env`. `vars` must cover every variable
/// of the context.
///
/// For a loop the fixpoint is the least set S containing Γ[x_init] and every
/// Γ_b[x_exit] with Γ_b in the body's semantics from Γ[x_s ↦ v], v ∈ S.
pub fn collect(
    vars: &VarTable,
    ctx: &Context,
    env: &Env,
    budget: &EnumBudget,
) -> Result<Vec<Env>, BudgetError> {
    let mut start = env.clone();
    if start.len() < vars.len() {
        start.resize(vars.len(), None);
    }
    let c = Collector { vars, budget };
    let mut init = IndexSet::new();
    init.insert(start);
    Ok(c.context(ctx, init)?.into_iter().collect())
}

/// Collecting semantics of a closed term from the empty environment.
pub fn collect_term(term: &Term, budget: &EnumBudget) -> Result<Vec<Env>, BudgetError> {
    collect(&term.vars, &term.ctx, &vec![None; term.vars.len()], budget)
}

/// Distinct values of the result variable over all final environments.
pub fn result_values(term: &Term, budget: &EnumBudget) -> Result<Vec<Value>, BudgetError> {
    let mut out: IndexSet<Value> = IndexSet::new();
    for env in collect_term(term, budget)? {
        out.insert(get(&env, term.result));
    }
    let mut v: Vec<Value> = out.into_iter().collect();
    v.sort();
    Ok(v)
}
