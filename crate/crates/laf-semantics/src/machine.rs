use std::collections::{HashSet, VecDeque};
use std::hash::{Hash, Hasher};

use indexmap::IndexSet;
use laf_core::{Context, Rhs, Term};

use crate::collect::{assume_value, enumerate_sort, BudgetError, EnumBudget, Env};
use crate::value::{eval_op, Value};

/// One stack frame: the values computed so far and the remaining definitions
/// of `ctx` starting at `pc`.
#[derive(Clone, Debug)]
pub struct Frame<'a> {
    pub env: Env,
    pub ctx: &'a Context,
    pub pc: usize,
}

impl PartialEq for Frame<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.ctx, other.ctx) && self.pc == other.pc && self.env == other.env
    }
}

impl Eq for Frame<'_> {}

impl Hash for Frame<'_> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        (self.ctx as *const Context as usize).hash(state);
        self.pc.hash(state);
        self.env.hash(state);
    }
}

/// Machine state: the frame stack, innermost loop last. Depth is the loop
/// nesting depth plus one.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MachineState<'a> {
    pub frames: Vec<Frame<'a>>,
}

impl<'a> MachineState<'a> {
    pub fn initial(term: &'a Term) -> Self {
        MachineState {
            frames: vec![Frame {
                env: vec![None; term.vars.len()],
                ctx: &term.ctx,
                pc: 0,
            }],
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.frames.len() == 1 && self.frames[0].pc == self.frames[0].ctx.len()
    }
}

fn value(env: &Env, v: laf_core::Var) -> Value {
    env[v.index()]
        .clone()
        .expect("variable read before definition")
}

/// Successor states. Terminal states have none.
pub fn step<'a>(
    term: &'a Term,
    st: &MachineState<'a>,
    budget: &EnumBudget,
) -> Vec<MachineState<'a>> {
    let depth = st.frames.len();
    let top = &st.frames[depth - 1];
    let mut out = Vec::new();
    if top.pc < top.ctx.len() {
        let def = &top.ctx.defs[top.pc];
        let with = |v: Value| {
            let mut s = st.clone();
            let f = s.frames.last_mut().unwrap();
            f.env[def.var.index()] = Some(v);
            f.pc += 1;
            s
        };
        match &def.rhs {
            Rhs::Op(op, args) => {
                let vals: Vec<Value> = args.iter().map(|a| value(&top.env, *a)).collect();
                out.push(with(eval_op(op, &vals)));
            }
            Rhs::Nondet(a, b) => {
                out.push(with(value(&top.env, *a)));
                out.push(with(value(&top.env, *b)));
            }
            Rhs::Assume(c, v) => out.push(with(assume_value(
                &value(&top.env, *c),
                value(&top.env, *v),
            ))),
            Rhs::Unknown => {
                for v in enumerate_sort(term.vars.sort(def.var), budget) {
                    out.push(with(v));
                }
            }
            Rhs::Mu(mu) => {
                let init = value(&top.env, mu.init);
                // do not enter loop
                out.push(with(init.clone()));
                // enter loop
                let mut s = st.clone();
                let mut env = top.env.clone();
                env[mu.loopvar.index()] = Some(init);
                s.frames.push(Frame {
                    env,
                    ctx: &mu.body,
                    pc: 0,
                });
                out.push(s);
            }
        }
        return out;
    }
    if depth == 1 {
        return out;
    }
    let parent = &st.frames[depth - 2];
    let def = &parent.ctx.defs[parent.pc];
    let mu = match &def.rhs {
        Rhs::Mu(mu) => mu,
        _ => unreachable!("inner frame without an enclosing loop"),
    };
    let exit = value(&top.env, mu.exit);
    // loop exit
    let mut s = st.clone();
    s.frames.pop();
    let p = s.frames.last_mut().unwrap();
    p.env[def.var.index()] = Some(exit.clone());
    p.pc += 1;
    out.push(s);
    // loop again
    let mut s = st.clone();
    let mut env = parent.env.clone();
    env[mu.loopvar.index()] = Some(exit);
    *s.frames.last_mut().unwrap() = Frame {
        env,
        ctx: &mu.body,
        pc: 0,
    };
    out.push(s);
    out
}

/// Final environments reachable from the initial state of a closed term.
pub fn reachable_results(term: &Term, budget: &EnumBudget) -> Result<Vec<Env>, BudgetError> {
    let init = MachineState::initial(term);
    let mut seen: HashSet<MachineState<'_>> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(init.clone());
    queue.push_back(init);
    let mut finals: IndexSet<Env> = IndexSet::new();
    while let Some(st) = queue.pop_front() {
        if st.is_terminal() {
            finals.insert(st.frames[0].env.clone());
            continue;
        }
        for n in step(term, &st, budget) {
            if !seen.contains(&n) {
                if seen.len() >= budget.max_states {
                    return Err(BudgetError::States(budget.max_states));
                }
                seen.insert(n.clone());
                queue.push_back(n);
            }
        }
    }
    Ok(finals.into_iter().collect())
}
