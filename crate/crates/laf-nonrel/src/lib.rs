//! Non-relational abstract domain: one abstract value per variable, with
//! targeted joins at `nondet` and a widening fixpoint at loops.

use laf_core::{Context, Def, Rhs, Term, VarTable};
use laf_domain_api::AbstractDomain;
use laf_lattices::{AbsValue, IntFlavor};
use laf_semantics::{BudgetError, Env};

#[derive(Clone, Debug, Default)]
pub struct NonRelConfig {
    pub flavor: IntFlavor,
    /// Number of fixpoint rounds that join instead of widening.
    pub widen_delay: usize,
    pub thresholds: Vec<i64>,
}

/// Abstract environment indexed by variable id.
#[derive(Clone, Debug, Default)]
pub struct NonRelEnv {
    pub vals: Vec<Option<AbsValue>>,
    /// Scalar lattice operations performed so far.
    pub op_counter: u64,
}

impl NonRelEnv {
    pub fn new(nvars: usize) -> Self {
        NonRelEnv {
            vals: vec![None; nvars],
            op_counter: 0,
        }
    }

    pub fn get(&self, v: laf_core::Var) -> &AbsValue {
        self.vals[v.index()]
            .as_ref()
            .expect("variable read before evaluation")
    }

    pub fn set(&mut self, v: laf_core::Var, a: AbsValue) {
        self.vals[v.index()] = Some(a);
    }
}

#[derive(Clone, Debug, Default)]
pub struct NonRel {
    pub cfg: NonRelConfig,
}

impl NonRel {
    pub fn new(cfg: NonRelConfig) -> Self {
        NonRel { cfg }
    }

    pub fn eval_ctx(&self, vars: &VarTable, ctx: &Context, env: &mut NonRelEnv) {
        if env.vals.len() < vars.len() {
            env.vals.resize(vars.len(), None);
        }
        for def in &ctx.defs {
            self.eval_def(vars, def, env);
        }
    }

    fn eval_def(&self, vars: &VarTable, def: &Def, env: &mut NonRelEnv) {
        let v = match &def.rhs {
            Rhs::Op(op, args) => {
                let a: Vec<AbsValue> = args.iter().map(|x| env.get(*x).clone()).collect();
                if !matches!(op, laf_core::Op::Mk | laf_core::Op::Get(_)) {
                    env.op_counter += 1;
                }
                AbsValue::transfer(op, &a, self.cfg.flavor)
            }
            Rhs::Nondet(a, b) => {
                let (x, y) = (env.get(*a), env.get(*b));
                let j = x.join(y);
                env.op_counter += j.scalar_count() as u64;
                j
            }
            Rhs::Assume(_, v) => env.get(*v).clone(),
            Rhs::Unknown => AbsValue::top(vars.sort(def.var), self.cfg.flavor),
            Rhs::Mu(mu) => {
                let li = env.get(mu.init).clone();
                let n = li.scalar_count() as u64;
                let mut l = li.clone();
                let mut round = 0;
                loop {
                    env.set(mu.loopvar, l.clone());
                    self.eval_ctx(vars, &mu.body, env);
                    let lp = env.get(mu.exit).join(&li);
                    env.op_counter += 2 * n;
                    if lp.leq(&l) {
                        break;
                    }
                    l = if round < self.cfg.widen_delay {
                        l.join(&lp)
                    } else {
                        l.widen(&lp, &self.cfg.thresholds)
                    };
                    env.op_counter += n;
                    round += 1;
                }
                l
            }
        };
        env.set(def.var, v);
    }

    /// Scalar lattice operations attributable to evaluating `def` in `env`.
    pub fn count_ops_for(&self, vars: &VarTable, def: &Def, env: &NonRelEnv) -> u64 {
        let mut e = env.clone();
        let before = e.op_counter;
        self.eval_def(vars, def, &mut e);
        e.op_counter - before
    }
}

impl AbstractDomain for NonRel {
    type State = NonRelEnv;

    fn name(&self) -> String {
        match self.cfg.flavor {
            IntFlavor::Interval => "interval".into(),
            IntFlavor::Constant => "constants".into(),
        }
    }

    fn initial(&self, term: &Term) -> NonRelEnv {
        NonRelEnv::new(term.vars.len())
    }

    fn eval(&self, term: &Term, ctx: &Context, mut st: NonRelEnv) -> NonRelEnv {
        self.eval_ctx(&term.vars, ctx, &mut st);
        st
    }

    fn check_env(
        &self,
        term: &Term,
        st: &NonRelEnv,
        env: &Env,
    ) -> Result<Option<String>, BudgetError> {
        for (i, v) in env.iter().enumerate() {
            let (Some(v), Some(Some(a))) = (v, st.vals.get(i)) else {
                continue;
            };
            if !a.contains(v) {
                let name = term.vars.name(laf_core::Var(i as u32));
                return Ok(Some(format!("{name} = {v} not in {a}")));
            }
        }
        Ok(None)
    }
}
