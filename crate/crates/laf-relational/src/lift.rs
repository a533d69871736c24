//! Lifting of the equality domain to LAF terms: every variable gets an
//! element relating it to the variables it transitively depends on, valid
//! whenever the variable is not ⊥.

use std::collections::{BTreeSet, HashMap};

use laf_core::{Context, Op, Rhs, Sort, Term, Var, VarTable};
use laf_domain_api::AbstractDomain;
use laf_semantics::{eval_op, BudgetError, Env, Value};
use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::eqrel::{EqRel, Node, Path};

/// Fixpoint rounds after which a loop result is given up on (set to ⊤).
/// Joins over a fixed set of paths stabilize long before this.
const MAX_FIX_ROUNDS: usize = 10_000;

fn tracked(s: &Sort) -> bool {
    matches!(s, Sort::Int | Sort::Bool)
}

/// Tracked paths of a variable of sort `s`.
pub fn paths_of(v: Var, s: &Sort) -> Vec<Path> {
    match s {
        Sort::Tuple(elems) => elems
            .iter()
            .enumerate()
            .filter(|(_, e)| tracked(e))
            .map(|(i, _)| Path::comp(v, i))
            .collect(),
        s if tracked(s) => vec![Path::var(v)],
        _ => Vec::new(),
    }
}

/// Integer encoding of a tracked scalar value; booleans are 1 and 0.
pub fn encode(v: &Value) -> Option<BigInt> {
    match v {
        Value::Int(i) => Some(i.clone()),
        Value::Bool(b) => Some(if *b { BigInt::one() } else { BigInt::zero() }),
        _ => None,
    }
}

fn decode(k: &BigInt, s: &Sort) -> Option<Value> {
    match s {
        Sort::Int => Some(Value::Int(k.clone())),
        Sort::Bool if k.is_zero() => Some(Value::Bool(false)),
        Sort::Bool if k.is_one() => Some(Value::Bool(true)),
        _ => None,
    }
}

/// Value of path `p` in a concrete environment, when bound, not ⊥ and tracked.
fn path_value(env: &Env, p: &Path) -> Option<BigInt> {
    let v = env.get(p.var.index())?.as_ref()?;
    match (p.comp, v) {
        (None, v) => encode(v),
        (Some(i), Value::Tuple(vs)) => vs.get(i).and_then(encode),
        _ => None,
    }
}

/// One element per variable; `None` for variables not evaluated.
#[derive(Clone, Debug, Default)]
pub struct RelEnv {
    pub elems: Vec<Option<EqRel>>,
}

impl RelEnv {
    pub fn new(nvars: usize) -> Self {
        RelEnv {
            elems: vec![None; nvars],
        }
    }

    pub fn get(&self, v: Var) -> &EqRel {
        self.elems[v.index()]
            .as_ref()
            .expect("variable read before evaluation")
    }

    fn set(&mut self, v: Var, d: EqRel) {
        self.elems[v.index()] = Some(d);
    }
}

#[derive(Clone, Debug, Default)]
pub struct RelationalLift;

struct Eval<'a> {
    vars: &'a VarTable,
    /// Operation definitions, for the `assume` transfer.
    ops: HashMap<Var, (&'a Op, &'a [Var])>,
}

impl Eval<'_> {
    fn sort(&self, v: Var) -> &Sort {
        self.vars.sort(v)
    }

    /// `{| dst ← src |}` for a variable copy; tuples are copied componentwise.
    fn copy(&self, mut d: EqRel, dst: Var, src: Var) -> EqRel {
        d.forget_var(dst);
        for (p, q) in paths_of(dst, self.sort(dst))
            .into_iter()
            .zip(paths_of(src, self.sort(src)))
        {
            d.add_eq(p, q, BigInt::zero());
        }
        d
    }

    fn constant(&self, d: &EqRel, v: Var) -> Option<BigInt> {
        tracked(self.sort(v))
            .then(|| d.constant(Path::var(v)))
            .flatten()
    }

    /// `{| x ← op(args) |}`.
    fn assign(&self, mut d: EqRel, x: Var, op: &Op, args: &[Var]) -> EqRel {
        d.forget_var(x);
        if d.is_bottom() {
            return d;
        }
        let px = Path::var(x);
        let xs = self.sort(x);
        let consts: Option<Vec<Value>> = args
            .iter()
            .map(|a| {
                self.constant(&d, *a)
                    .and_then(|k| decode(&k, self.sort(*a)))
            })
            .collect();
        if let Some(vals) = consts {
            if tracked(xs) {
                match eval_op(op, &vals) {
                    Value::Bottom => return EqRel::bottom(),
                    v => {
                        if let Some(k) = encode(&v) {
                            d.add_const(px, k);
                            return d;
                        }
                    }
                }
            }
        }
        let scalar = |a: Var| tracked(self.sort(a));
        let diff =
            |a: Var, b: Var| d.difference(Node::Path(Path::var(a)), Node::Path(Path::var(b)));
        let truth = |b: Option<bool>| b.map(|b| if b { BigInt::one() } else { BigInt::zero() });
        match (op, args) {
            (Op::Mk, _) => {
                for (i, a) in args.iter().enumerate() {
                    if scalar(*a) {
                        d.add_eq(Path::comp(x, i), Path::var(*a), BigInt::zero());
                    }
                }
            }
            (Op::Get(i), [t]) if tracked(xs) && matches!(self.sort(*t), Sort::Tuple(_)) => {
                d.add_eq(px, Path::comp(*t, *i), BigInt::zero());
            }
            (Op::Add, [a, b]) if *xs == Sort::Int => {
                if let Some(k) = self.constant(&d, *b) {
                    d.add_eq(px, Path::var(*a), k);
                } else if let Some(k) = self.constant(&d, *a) {
                    d.add_eq(px, Path::var(*b), k);
                }
            }
            (Op::Sub, [a, b]) if *xs == Sort::Int => {
                if let Some(k) = self.constant(&d, *b) {
                    d.add_eq(px, Path::var(*a), -k);
                }
            }
            (Op::Lt | Op::Le | Op::Eq, [a, b]) if scalar(*a) && scalar(*b) => {
                let known = diff(*a, *b).map(|k| match op {
                    Op::Lt => k < BigInt::zero(),
                    Op::Le => k <= BigInt::zero(),
                    _ => k.is_zero(),
                });
                if let Some(k) = truth(known) {
                    d.add_const(px, k);
                }
            }
            _ => {}
        }
        d
    }

    /// `{| assume c |}`: `c` holds, and so does the equality defining it.
    fn assume(&self, mut d: EqRel, c: Var) -> EqRel {
        if *self.sort(c) != Sort::Bool {
            return d;
        }
        d.add_const(Path::var(c), BigInt::one());
        match self.ops.get(&c) {
            Some((Op::Eq, [a, b])) if tracked(self.sort(*a)) => {
                d.add_eq(Path::var(*a), Path::var(*b), BigInt::zero());
            }
            Some((Op::Not, [a])) => d.add_const(Path::var(*a), BigInt::zero()),
            _ => {}
        }
        d
    }

    fn ctx(&self, ctx: &Context, env: &mut RelEnv) {
        for def in &ctx.defs {
            let x = def.var;
            let d = match &def.rhs {
                Rhs::Op(op, args) => {
                    let mut d = EqRel::top();
                    for a in args {
                        d.meet_with(env.get(*a));
                    }
                    self.assign(d, x, op, args)
                }
                Rhs::Nondet(a, b) => {
                    let d1 = self.copy(env.get(*a).clone(), x, *a);
                    let d2 = self.copy(env.get(*b).clone(), x, *b);
                    d1.join(&d2)
                }
                Rhs::Unknown => EqRel::top(),
                Rhs::Assume(c, v) => {
                    let d = env.get(*c).meet(env.get(*v));
                    let d = self.assume(d, *c);
                    self.copy(d, x, *v)
                }
                Rhs::Mu(mu) => {
                    let di = self.copy(env.get(mu.init).clone(), x, mu.init);
                    let mut kill: BTreeSet<Var> = mu.body.bound_vars().into_iter().collect();
                    kill.insert(mu.loopvar);
                    let mut d = di.clone();
                    let mut rounds = 0;
                    loop {
                        env.set(mu.loopvar, self.copy(d.clone(), mu.loopvar, x));
                        self.ctx(&mu.body, env);
                        let mut de = self.copy(env.get(mu.exit).clone(), x, mu.exit);
                        de.forget_vars(&kill);
                        let next = di.join(&de);
                        if next.leq(&d) {
                            break next;
                        }
                        rounds += 1;
                        if rounds == MAX_FIX_ROUNDS {
                            break EqRel::top();
                        }
                        // The widening is the join: chains are finite.
                        d = d.join(&next);
                    }
                }
            };
            env.set(x, d);
        }
    }
}

impl RelationalLift {
    pub fn run(&self, term: &Term) -> RelEnv {
        self.eval_term(term)
    }

    /// `Some(b)` when `x` is entailed to be `b` whenever it is defined. A
    /// variable that is never defined is reported as `Some(true)`.
    pub fn truth(&self, st: &RelEnv, x: Var) -> Option<bool> {
        let d = st.elems.get(x.index())?.as_ref()?;
        if d.is_bottom() {
            return Some(true);
        }
        match d.constant(Path::var(x))? {
            k if k.is_one() => Some(true),
            k if k.is_zero() => Some(false),
            _ => None,
        }
    }

    /// Per-binding concretization: each non-⊥ binding `x ↦ v` of `env` must
    /// be realizable in every element stored for a variable that is not ⊥ in
    /// `env`. Elements of ⊥ variables describe nothing, since they only hold
    /// where their variable is defined.
    pub fn gamma_rel(&self, term: &Term, st: &RelEnv, env: &Env) -> bool {
        let holders: Vec<&EqRel> = env
            .iter()
            .zip(&st.elems)
            .filter_map(|(v, d)| match (v, d) {
                (Some(v), Some(d)) if !v.is_bottom() => Some(d),
                _ => None,
            })
            .collect();
        env.iter().enumerate().all(|(i, v)| {
            if v.as_ref().is_none_or(Value::is_bottom) {
                return true;
            }
            let x = Var(i as u32);
            let known: Vec<(Path, BigInt)> = paths_of(x, term.vars.sort(x))
                .into_iter()
                .filter_map(|p| path_value(env, &p).map(|k| (p, k)))
                .collect();
            holders.iter().all(|d| d.admits(&known))
        })
    }
}

impl AbstractDomain for RelationalLift {
    type State = RelEnv;

    fn name(&self) -> String {
        "relational".into()
    }

    fn initial(&self, term: &Term) -> RelEnv {
        RelEnv::new(term.vars.len())
    }

    fn eval(&self, term: &Term, ctx: &Context, mut st: RelEnv) -> RelEnv {
        let mut ops = HashMap::new();
        term.ctx.walk(&mut |d| {
            if let Rhs::Op(op, args) = &d.rhs {
                ops.insert(d.var, (op, args.as_slice()));
            }
        });
        if st.elems.len() < term.vars.len() {
            st.elems.resize(term.vars.len(), None);
        }
        Eval {
            vars: &term.vars,
            ops,
        }
        .ctx(ctx, &mut st);
        st
    }

    /// Joint check, stronger than [`RelationalLift::gamma_rel`]: for every
    /// variable defined in `env`, the values `env` gives to the paths of its
    /// element must satisfy that element simultaneously.
    fn check_env(
        &self,
        term: &Term,
        st: &RelEnv,
        env: &Env,
    ) -> Result<Option<String>, BudgetError> {
        for (i, v) in env.iter().enumerate() {
            let (Some(v), Some(Some(d))) = (v, st.elems.get(i)) else {
                continue;
            };
            if v.is_bottom() {
                continue;
            }
            let known: Vec<(Path, BigInt)> = d
                .paths()
                .into_iter()
                .chain(paths_of(Var(i as u32), term.vars.sort(Var(i as u32))))
                .filter_map(|p| path_value(env, &p).map(|k| (p, k)))
                .collect();
            if !d.admits(&known) {
                let name = term.vars.name(Var(i as u32));
                let shown: Vec<String> = known
                    .iter()
                    .map(|(p, k)| format!("{}={k}", p.show(&term.vars)))
                    .collect();
                return Ok(Some(format!(
                    "{name} = {v}: [{}] violates {}",
                    shown.join(", "),
                    d.show(&term.vars)
                )));
            }
        }
        Ok(None)
    }
}
