use laf_core::{Context, Term, Var};
use laf_domain_api::AbstractDomain;
use laf_semantics::{collect, BudgetError, EnumBudget, Env, Value};

use crate::engine::{RewriteState, Translator};
use crate::rule::{default_rulesets, RewriteRule};

/// How an abstract state is concretized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GammaMode {
    /// Some environment of the output term agrees on every mapped variable.
    Exact,
    /// Agreement is only required where the input environment is not ⊥.
    OverApprox,
}

#[derive(Clone, Debug)]
pub struct RewriteDomain {
    pub rules: Vec<RewriteRule>,
    pub mode: GammaMode,
    /// Enumeration budget of the membership test, which runs the output term.
    pub budget: EnumBudget,
    /// Push `get` through `nondet`. Sound, but two projections of the same
    /// tuple become independent choices, so it is off when the output term
    /// must keep the input's result set.
    pub split_nondet: bool,
}

impl RewriteDomain {
    pub fn new(rules: Vec<RewriteRule>, mode: GammaMode) -> Self {
        RewriteDomain {
            rules,
            mode,
            budget: EnumBudget::default(),
            split_nondet: true,
        }
    }

    /// Shipped exact rules with the exact concretization.
    pub fn exact() -> Self {
        Self::new(default_rulesets().0, GammaMode::Exact)
    }

    /// Shipped exact and over-approximating rules with the relaxed concretization.
    pub fn over_approx() -> Self {
        let (mut e, a) = default_rulesets();
        e.extend(a);
        Self::new(e, GammaMode::OverApprox)
    }

    pub fn preserving_results(mut self) -> Self {
        self.split_nondet = false;
        self
    }

    pub fn with_budget(mut self, budget: EnumBudget) -> Self {
        self.budget = budget;
        self
    }

    /// Translates a whole term.
    pub fn run(&self, term: &Term) -> RewriteState {
        self.eval_term(term)
    }
}

fn show(env: &Env, term: &Term, pairs: &[(usize, Var)]) -> String {
    pairs
        .iter()
        .map(|(i, _)| {
            format!(
                "{}={}",
                term.vars.name(Var(*i as u32)),
                env[*i].as_ref().unwrap()
            )
        })
        .collect::<Vec<_>>()
        .join(", ")
}

impl AbstractDomain for RewriteDomain {
    type State = RewriteState;

    fn name(&self) -> String {
        match self.mode {
            GammaMode::Exact => "rewrite".into(),
            GammaMode::OverApprox => "rewrite-approx".into(),
        }
    }

    fn initial(&self, term: &Term) -> RewriteState {
        RewriteState::new(term.vars.len())
    }

    fn eval(&self, term: &Term, ctx: &Context, st: RewriteState) -> RewriteState {
        let mut t = Translator::new(st, &self.rules, term.vars.len());
        t.split_nondet = self.split_nondet;
        t.translate(&term.vars, ctx);
        t.st
    }

    fn check_env(
        &self,
        term: &Term,
        st: &RewriteState,
        env: &Env,
    ) -> Result<Option<String>, BudgetError> {
        let outs = st
            .oracle
            .get_or_init(|| collect(&st.vars, &st.out, &vec![None; st.vars.len()], &self.budget))
            .as_ref()
            .map_err(Clone::clone)?;
        let pairs: Vec<(usize, Var)> = env
            .iter()
            .enumerate()
            .filter_map(|(i, v)| {
                let v = v.as_ref()?;
                if self.mode == GammaMode::OverApprox && v.is_bottom() {
                    return None;
                }
                Some((i, st.map.get(i).copied().flatten()?))
            })
            .collect();
        let outv: Vec<Var> = pairs.iter().map(|(_, v)| *v).collect();
        let key: Vec<Option<Value>> = pairs.iter().map(|(i, _)| env[*i].clone()).collect();
        let mut cache = st.images.borrow_mut();
        let images = cache.entry(outv).or_insert_with_key(|outv| {
            outs.iter()
                .map(|o| outv.iter().map(|v| o[v.index()].clone()).collect())
                .collect()
        });
        if images.contains(&key) {
            Ok(None)
        } else {
            Ok(Some(format!(
                "no environment of the rewritten term agrees with {}",
                show(env, term, &pairs)
            )))
        }
    }
}
