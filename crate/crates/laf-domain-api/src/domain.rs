use laf_core::{Context, Term};
use laf_semantics::{collect_term, BudgetError, EnumBudget, Env};

/// An abstract domain: abstract states, abstract evaluation of a context,
/// an initial state and a concretization given as a membership test.
pub trait AbstractDomain {
    type State: Clone;

    fn name(&self) -> String;

    /// State describing the empty environment.
    fn initial(&self, term: &Term) -> Self::State;

    /// Abstract evaluation of `ctx` (a context of `term`) from `st`.
    fn eval(&self, term: &Term, ctx: &Context, st: Self::State) -> Self::State;

    /// `Ok(None)` when `env` is in the concretization of `st`, otherwise a
    /// description of the rejection (which variable, which abstract value).
    fn check_env(
        &self,
        term: &Term,
        st: &Self::State,
        env: &Env,
    ) -> Result<Option<String>, BudgetError>;

    fn gamma_contains(
        &self,
        term: &Term,
        st: &Self::State,
        env: &Env,
    ) -> Result<bool, BudgetError> {
        Ok(self.check_env(term, st, env)?.is_none())
    }

    /// Evaluation of the whole term from the initial state.
    fn eval_term(&self, term: &Term) -> Self::State {
        self.eval(term, &term.ctx, self.initial(term))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    Counterexample { env: Env, detail: String },
    Inconclusive(String),
}

impl Verdict {
    pub fn is_counterexample(&self) -> bool {
        matches!(self, Verdict::Counterexample { .. })
    }
}

/// Checks that every environment of the oracle is accepted by the final
/// abstract state, and that the initial state accepts the empty environment.
pub fn soundness_check<D: AbstractDomain>(dom: &D, term: &Term, budget: &EnumBudget) -> Verdict {
    let envs = match collect_term(term, budget) {
        Ok(e) => e,
        Err(e) => return Verdict::Inconclusive(e.to_string()),
    };
    let init = dom.initial(term);
    let empty: Env = vec![None; term.vars.len()];
    match dom.check_env(term, &init, &empty) {
        Ok(None) => {}
        Ok(Some(detail)) => {
            return Verdict::Counterexample {
                env: empty,
                detail: format!("initial state rejects the empty environment: {detail}"),
            }
        }
        Err(e) => return Verdict::Inconclusive(e.to_string()),
    }
    let st = dom.eval(term, &term.ctx, init);
    for env in envs {
        match dom.check_env(term, &st, &env) {
            Ok(None) => {}
            Ok(Some(detail)) => return Verdict::Counterexample { env, detail },
            Err(e) => return Verdict::Inconclusive(e.to_string()),
        }
    }
    Verdict::Ok
}

/// Outcome of running the soundness check over many generated terms.
#[derive(Clone, Debug, Default)]
pub struct SuiteReport {
    pub checked: usize,
    pub inconclusive: usize,
    /// (seed, printed term, detail)
    pub counterexamples: Vec<(u64, String, String)>,
}

/// Runs `soundness_check` on generated terms until `want` conclusive
/// verdicts are collected (or `10 * want` seeds are exhausted).
pub fn soundness_suite<D: AbstractDomain>(
    dom: &D,
    want: usize,
    cfg: &crate::gen::TermGenConfig,
    budget: &EnumBudget,
) -> SuiteReport {
    let mut rep = SuiteReport::default();
    let mut seed = cfg.seed;
    while rep.checked < want && seed < cfg.seed + 10 * want as u64 {
        let t = crate::gen::gen_term(&crate::gen::TermGenConfig {
            seed,
            ..cfg.clone()
        });
        match soundness_check(dom, &t, budget) {
            Verdict::Ok => rep.checked += 1,
            Verdict::Inconclusive(_) => rep.inconclusive += 1,
            Verdict::Counterexample { detail, .. } => {
                rep.checked += 1;
                rep.counterexamples
                    .push((seed, laf_core::print_term(&t), detail));
            }
        }
        seed += 1;
    }
    rep
}

/// Convenience: the oracle environments of a closed term.
pub fn oracle(term: &Term, budget: &EnumBudget) -> Result<Vec<Env>, BudgetError> {
    collect_term(term, budget)
}
