use std::collections::HashMap;

use laf_core::{Context, Term, Var};
use laf_domain_api::AbstractDomain;
use laf_lattices::{AbsValue, BoolSet};
use laf_semantics::{BudgetError, Env, Value};

use crate::cond::Cond;
use crate::gen::Gen;
use crate::state::{ConstraintConfig, ConstraintState, Entries};

#[derive(Clone, Debug, Default)]
pub struct ConstraintDomain {
    pub cfg: ConstraintConfig,
}

/// What the analysis concludes about a boolean output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    /// True whenever it is defined (possibly never defined).
    Proved,
    /// False whenever it is defined, and defined in some abstract case.
    False,
    Unknown,
}

impl ConstraintDomain {
    pub fn new(cfg: ConstraintConfig) -> Self {
        ConstraintDomain { cfg }
    }

    pub fn run(&self, term: &Term) -> ConstraintState {
        self.eval_term(term)
    }

    /// Abstract value of an input variable under its own condition.
    pub fn value_of(&self, st: &ConstraintState, x: Var) -> Option<AbsValue> {
        let im = st.image(x)?;
        let c = im.cond.as_ref()?;
        Some(st.query(im.val, c, &self.cfg))
    }

    /// Condition map of the constraint variable holding an input variable.
    pub fn binding(&self, st: &ConstraintState, x: Var) -> Option<Entries> {
        st.image(x).map(|im| st.sorted_entries(im.val))
    }

    pub fn status(&self, st: &ConstraintState, x: Var) -> Status {
        let Some(im) = st.image(x) else {
            return Status::Unknown;
        };
        let Some(c) = &im.cond else {
            return Status::Proved;
        };
        match st.query(im.val, c, &self.cfg).as_bools() {
            Some(b) if !b.f => Status::Proved,
            Some(b) if b == BoolSet::FALSE => Status::False,
            _ => Status::Unknown,
        }
    }
}

impl AbstractDomain for ConstraintDomain {
    type State = ConstraintState;

    fn name(&self) -> String {
        "constraint".into()
    }

    fn initial(&self, term: &Term) -> ConstraintState {
        ConstraintState::new(term.vars.len())
    }

    fn eval(&self, term: &Term, ctx: &Context, mut st: ConstraintState) -> ConstraintState {
        let mut g = Gen::new(&mut st, &self.cfg);
        g.translate(&term.vars, ctx);
        g.finish();
        st
    }

    /// Looks for an assignment of the constraint variables that satisfies the
    /// store and agrees with `env`. Variables not forced by `env` can always
    /// be taken as ⊥, which satisfies every entry and falsifies every
    /// condition mentioning them, so only forced values need checking.
    fn check_env(
        &self,
        term: &Term,
        st: &ConstraintState,
        env: &Env,
    ) -> Result<Option<String>, BudgetError> {
        let mut pins: HashMap<Var, (Value, Var)> = HashMap::new();
        let mut undefined: Vec<Var> = Vec::new();
        let name = |x: Var| term.vars.name(x).to_string();
        for (i, v) in env.iter().enumerate() {
            let Some(v) = v else { continue };
            let x = Var(i as u32);
            let Some(im) = st.image(x) else { continue };
            if v.is_bottom() {
                undefined.push(x);
                continue;
            }
            let Some(c) = &im.cond else {
                return Ok(Some(format!(
                    "{} = {v} although its condition is false",
                    name(x)
                )));
            };
            let mut want = vec![(im.val, v.clone())];
            want.extend(c.lits().iter().map(|l| (l.var, Value::Bool(l.pos))));
            for (cv, val) in want {
                if let Some((old, by)) = pins.get(&cv) {
                    if *old != val {
                        return Ok(Some(format!(
                            "{} and {} need {} = {old} and = {val}",
                            name(*by),
                            name(x),
                            st.vars.name(cv)
                        )));
                    }
                } else {
                    pins.insert(cv, (val, x));
                }
            }
        }
        let holds = |c: &Cond| {
            c.lits()
                .iter()
                .all(|l| matches!(pins.get(&l.var), Some((Value::Bool(b), _)) if *b == l.pos))
        };
        for x in undefined {
            let im = st.image(x).unwrap();
            if let Some(c) = &im.cond {
                if holds(c) && pins.contains_key(&im.val) {
                    return Ok(Some(format!(
                        "{} = ⊥ but {} holds and {} is defined",
                        name(x),
                        st.show_cond(c),
                        st.vars.name(im.val)
                    )));
                }
            }
        }
        for (cv, (val, by)) in &pins {
            for (c, a) in st.entries(*cv) {
                if holds(c) && !a.contains(val) {
                    return Ok(Some(format!(
                        "{} = {val} (via {}) violates {} ⊩ {a}",
                        st.vars.name(*cv),
                        name(*by),
                        st.show_cond(c)
                    )));
                }
            }
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use laf_core::parse_term;
    use laf_domain_api::{soundness_check, Verdict};
    use laf_lattices::itv;
    use laf_semantics::{collect_term, EnumBudget};

    const SRC: &str = "(let x int (unknown))(let z int 0)(let c bool (lt x z))
        (let a int (assume c x))(let n int (neg a))(in n)";

    #[test]
    fn tightened_entry_is_caught() {
        let t = parse_term(SRC).unwrap();
        let d = ConstraintDomain::default();
        let mut st = d.run(&t);
        let x = st.image(t.var_named("x").unwrap()).unwrap().val;
        let envs = collect_term(&t, &EnumBudget::with_window(-2, 2)).unwrap();
        assert!(envs
            .iter()
            .all(|e| d.check_env(&t, &st, e).unwrap().is_none()));
        // Claim x ≤ -2 under c: the environment x = -1 must now be rejected.
        for e in st.store[x.index()].iter_mut() {
            if !e.0.is_true() {
                e.1 = itv(None, Some(-2));
            }
        }
        let rejected: Vec<String> = envs
            .iter()
            .filter_map(|e| d.check_env(&t, &st, e).unwrap())
            .collect();
        assert!(!rejected.is_empty());
        assert!(rejected[0].contains("violates"), "{}", rejected[0]);
    }

    #[test]
    fn undefined_input_with_a_holding_condition_is_caught() {
        let t = parse_term(SRC).unwrap();
        let d = ConstraintDomain::default();
        let st = d.run(&t);
        let mut env = collect_term(&t, &EnumBudget::with_window(-1, -1))
            .unwrap()
            .remove(0);
        // x = -1 makes c true, so a cannot be ⊥.
        env[t.var_named("a").unwrap().index()] = Some(Value::Bottom);
        assert!(d.check_env(&t, &st, &env).unwrap().is_some());
        assert_eq!(
            soundness_check(&d, &t, &EnumBudget::with_window(-2, 2)),
            Verdict::Ok
        );
    }
}
