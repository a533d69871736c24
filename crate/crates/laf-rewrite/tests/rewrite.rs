use laf_core::{check_wf, parse_term, Literal, Rhs, Term, Var};
use laf_domain_api::{
    oracle, soundness_check, soundness_suite, AbstractDomain, OpWeights, TermGenConfig, Verdict,
};
use laf_rewrite::{
    aggressive_rules, check_rule, default_rulesets, parse_rules, projection_rules, CheckConfig,
    GammaMode, RewriteDomain, RewriteRule, RewriteState,
};
use laf_semantics::{collect_term, EnumBudget, Env, Value};

const MEMORY_EXAMPLE: &str = include_str!("../../../fixtures/memory_example.laf");
const MUL_ZERO: &str = include_str!("../../../fixtures/assume_mul_zero.laf");

fn var(t: &Term, n: &str) -> Var {
    t.var_named(n).unwrap()
}

fn out_term(st: &RewriteState, t: &Term) -> Term {
    st.to_term(t.result).unwrap()
}

#[test]
fn memory_example_proves_assertion() {
    let t = parse_term(MEMORY_EXAMPLE).unwrap();
    let st = RewriteDomain::exact().run(&t);
    let x = st.image(var(&t, "X")).unwrap();
    for alias in ["X1", "X2", "X3", "t0"] {
        assert_eq!(st.image(var(&t, alias)), Some(x), "{alias}");
    }
    let a = st.image(var(&t, "assertion")).unwrap();
    assert_eq!(st.literal_of(a), Some(&Literal::Bool(true)));
    assert!(check_wf(&out_term(&st, &t)).is_ok());
}

#[test]
fn memory_example_needs_projection_and_full_extract() {
    // without the full-width extract rule the concat only becomes X[15..0]
    let (mut rules, _) = default_rulesets();
    rules.remove(1);
    let t = parse_term(MEMORY_EXAMPLE).unwrap();
    let st = RewriteDomain::new(rules, GammaMode::Exact).run(&t);
    let a = st.image(var(&t, "assertion")).unwrap();
    assert_eq!(st.literal_of(a), None);
}

/// The same shape at 4 bits, small enough for the oracle.
fn small_memory_example() -> Term {
    let s = MEMORY_EXAMPLE
        .replace("(bv 16)", "(bv 4)")
        .replace("(bv 8)", "(bv 2)")
        .replace("extract.7.0", "extract.1.0")
        .replace("extract.15.8", "extract.3.2");
    parse_term(&s).unwrap()
}

#[test]
fn memory_example_small_is_sound_and_proved() {
    let t = small_memory_example();
    let d = RewriteDomain::exact();
    assert_eq!(soundness_check(&d, &t, &EnumBudget::default()), Verdict::Ok);
    let st = d.run(&t);
    let a = st.image(var(&t, "assertion")).unwrap();
    assert_eq!(st.literal_of(a), Some(&Literal::Bool(true)));
    let vals = laf_semantics::result_values(&t, &EnumBudget::default()).unwrap();
    assert_eq!(vals, vec![Value::Bool(true)]);
}

#[test]
fn nondet_of_same_var_aliases() {
    let t = parse_term("(let x int (unknown))(let y int (nondet x x))(in y)").unwrap();
    let st = RewriteDomain::exact().run(&t);
    assert_eq!(st.image(var(&t, "y")), st.image(var(&t, "x")));
    assert_eq!(st.out.len(), 1);
}

#[test]
fn constant_folding_reassociates() {
    let t = parse_term("(let two int 2)(let x int (unknown))(let a int (add two x))(let three int 3)(let b int (add a three))(in b)")
        .unwrap();
    let st = RewriteDomain::exact().run(&t);
    let b = st.image(var(&t, "b")).unwrap();
    let Some(Rhs::Op(laf_core::Op::Add, args)) = st.def_of(b) else {
        panic!("{:?}", st.def_of(b))
    };
    assert_eq!(args[0], st.image(var(&t, "x")).unwrap());
    assert_eq!(st.literal_of(args[1]), Some(&Literal::int(5)));
}

#[test]
fn no_matching_rule_is_a_renaming() {
    let src = "(let x int (unknown))(let y int (unknown))(let s int (add x y))(let c bool (lt s x))(let d int (assume c s))(in d)";
    let t = parse_term(src).unwrap();
    let st = RewriteDomain::exact().run(&t);
    let o = out_term(&st, &t);
    assert_eq!(laf_core::print_term(&o), laf_core::print_term(&t));
}

#[test]
fn loops_are_translated_inside() {
    let src = "(let z int 2)(let one int 1)(let r int (mu (x) (let a int (mul one x)) (let n int (neg a)) n z))(in r)";
    let t = parse_term(src).unwrap();
    let st = RewriteDomain::exact().run(&t);
    let o = out_term(&st, &t);
    assert!(check_wf(&o).is_ok());
    // 1*x disappears from the body
    assert_eq!(o.ctx.deep_len(), t.ctx.deep_len() - 1);
    assert_eq!(
        soundness_check(&RewriteDomain::exact(), &t, &EnumBudget::default()),
        Verdict::Ok
    );
}

#[test]
fn hash_consing_is_scoped_to_loop_bodies() {
    // `s` inside the body must not be reused after the loop closes
    let src = "(let z int 0)(let one int 1)
               (let r int (mu (x) (let s int (add z one)) (let n int (add x s)) n z))
               (let s2 int (add z one))(let q int (add r s2))(in q)";
    let t = parse_term(src).unwrap();
    let st = RewriteDomain::exact().run(&t);
    assert!(check_wf(&out_term(&st, &t)).is_ok());
}

fn env_of(t: &Term, pairs: &[(&str, Value)]) -> Env {
    let mut e: Env = vec![None; t.vars.len()];
    for (n, v) in pairs {
        e[var(t, n).index()] = Some(v.clone());
    }
    e
}

#[test]
fn over_approximating_gamma_accepts_dead_values() {
    let t = parse_term(MUL_ZERO).unwrap();
    let env = env_of(
        &t,
        &[
            ("u", Value::int(3)),
            ("three", Value::int(3)),
            ("e", Value::Bool(true)),
            ("ne", Value::Bool(false)),
            ("v", Value::Bottom),
            ("zero", Value::int(0)),
            ("s", Value::Bottom),
        ],
    );
    let (_, approx) = default_rulesets();
    let exact_gamma = RewriteDomain::new(approx.clone(), GammaMode::Exact);
    let over_gamma = RewriteDomain::new(approx, GammaMode::OverApprox);
    let st = exact_gamma.run(&t);
    assert_eq!(st.image(var(&t, "s")), st.image(var(&t, "zero")));
    assert!(!exact_gamma.gamma_contains(&t, &st, &env).unwrap());
    assert!(over_gamma
        .gamma_contains(&t, &over_gamma.run(&t), &env)
        .unwrap());
    // the environment is a real one, so the exact pairing is unsound
    assert!(oracle(&t, &EnumBudget::default()).unwrap().contains(&env));
    assert!(soundness_check(&exact_gamma, &t, &EnumBudget::default()).is_counterexample());
    assert_eq!(
        soundness_check(&over_gamma, &t, &EnumBudget::default()),
        Verdict::Ok
    );
}

#[test]
fn self_division_is_over_approximating() {
    let t = parse_term("(let x int (unknown))(let d int (div x x))(in d)").unwrap();
    let d = RewriteDomain::over_approx();
    let st = d.run(&t);
    assert_eq!(
        st.literal_of(st.image(var(&t, "d")).unwrap()),
        Some(&Literal::int(1))
    );
    for env in collect_term(&t, &EnumBudget::default()).unwrap() {
        assert!(d.gamma_contains(&t, &st, &env).unwrap());
    }
}

#[test]
fn identity_rewrite_gamma_is_oracle_membership() {
    let d =
        RewriteDomain::new(vec![], GammaMode::Exact).with_budget(EnumBudget::with_window(-4, 4));
    let budget = EnumBudget::with_window(-4, 4);
    let mut checked = 0;
    for seed in 0..60 {
        let t = laf_domain_api::gen_term(&TermGenConfig {
            seed,
            ..TermGenConfig::loop_free()
        });
        let Ok(envs) = collect_term(&t, &budget) else {
            continue;
        };
        let st = d.run(&t);
        for env in &envs {
            assert!(d.gamma_contains(&t, &st, env).unwrap());
            // perturb one integer value: membership must follow the oracle
            let mut other = env.clone();
            if let Some(slot) = other.iter_mut().find(|v| matches!(v, Some(Value::Int(_)))) {
                *slot = Some(Value::int(1000));
                assert_eq!(
                    d.gamma_contains(&t, &st, &other).unwrap(),
                    envs.contains(&other)
                );
            }
        }
        checked += 1;
    }
    assert!(checked > 40);
}

#[test]
fn shipped_rules_are_valid() {
    let (exact, approx) = default_rulesets();
    let cfg = CheckConfig::default();
    for r in exact.iter().chain(&approx).chain(&aggressive_rules()) {
        check_rule(r, &cfg).unwrap();
    }
    // every shipped exact rule is exact, not just over-approximating
    for r in &exact {
        assert_eq!(r.kind, laf_rewrite::RuleKind::Exact);
    }
}

#[test]
fn projections_are_exact() {
    use laf_core::Sort;
    let cfg = CheckConfig {
        int_window: (-1, 1),
        sorts: vec![
            Sort::Bool,
            Sort::Int,
            Sort::Tuple(vec![Sort::Int, Sort::Bool]),
            Sort::Tuple(vec![Sort::Bool, Sort::Int, Sort::Int]),
        ],
        ..Default::default()
    };
    for r in projection_rules(3) {
        check_rule(&r, &cfg).unwrap();
    }
}

#[test]
fn checker_rejects_invalid_rules() {
    let cfg = CheckConfig::default();
    for bad in [
        "(sub ?x ?x) => 0 exact",
        "(eq ?x ?x) => true exact",
        "(div ?x ?y) => 1 approx",
        "(mul 0 ?x) => 0 exact",
        "(concat (extract ?a ?b ?x) (extract ?c ?d ?y)) => (extract ?a ?d ?x) exact",
        "(lt (div 1 ?x) 1) => true approx",
    ] {
        let r = RewriteRule::parse(bad).unwrap();
        assert!(check_rule(&r, &cfg).is_err(), "{bad}");
    }
    let mut no_live = projection_rules(2)[1].clone();
    no_live.guards.clear();
    assert!(check_rule(&no_live, &cfg).is_err());
}

#[test]
fn shipped_rules_do_not_grow_definitions() {
    let (exact, approx) = default_rulesets();
    for r in exact.iter().chain(&approx) {
        assert!(r.rhs.size() <= r.lhs.size(), "{r}");
    }
}

#[test]
fn user_rules_from_text() {
    let rules = parse_rules("(add ?x 0) => ?x exact ; right identity\n").unwrap();
    let t = parse_term("(let x int (unknown))(let z int 0)(let y int (add x z))(in y)").unwrap();
    let st = RewriteDomain::new(rules, GammaMode::Exact).run(&t);
    assert_eq!(st.image(var(&t, "y")), st.image(var(&t, "x")));
}

#[test]
fn ill_sorted_instances_are_skipped() {
    // the rule would replace an int by a bool; it must not fire
    let rules = parse_rules("(add ?x ?x) => true exact").unwrap();
    let t = parse_term("(let x int (unknown))(let y int (add x x))(in y)").unwrap();
    let st = RewriteDomain::new(rules, GammaMode::Exact).run(&t);
    assert!(check_wf(&out_term(&st, &t)).is_ok());
    assert_eq!(st.out.len(), 2);
}

#[test]
fn random_terms_sound_exact() {
    let budget = EnumBudget::with_window(-4, 4);
    let d = RewriteDomain::exact().with_budget(budget.clone());
    let rep = soundness_suite(
        &d,
        300,
        &TermGenConfig {
            seed: 7,
            ..Default::default()
        },
        &budget,
    );
    assert!(
        rep.counterexamples.is_empty(),
        "{:?}",
        rep.counterexamples.first()
    );
    assert_eq!(rep.checked, 300);
}

#[test]
fn random_terms_sound_over_approx() {
    let budget = EnumBudget::with_window(-4, 4);
    let mut rules = RewriteDomain::over_approx().rules;
    rules.extend(aggressive_rules());
    let d = RewriteDomain::new(rules, GammaMode::OverApprox).with_budget(budget.clone());
    let rep = soundness_suite(
        &d,
        300,
        &TermGenConfig {
            seed: 11,
            ..Default::default()
        },
        &budget,
    );
    assert!(
        rep.counterexamples.is_empty(),
        "{:?}",
        rep.counterexamples.first()
    );
}

#[test]
fn random_bitvector_terms_sound() {
    let budget = EnumBudget::with_window(-3, 3);
    let d = RewriteDomain::exact().with_budget(budget.clone());
    let cfg = TermGenConfig {
        seed: 500,
        op_weights: OpWeights {
            bitvec: 6,
            ..Default::default()
        },
        ..Default::default()
    };
    let rep = soundness_suite(&d, 150, &cfg, &budget);
    assert!(
        rep.counterexamples.is_empty(),
        "{:?}",
        rep.counterexamples.first()
    );
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(200))]
    #[test]
    fn exact_rewriting_keeps_result_sets(seed in 0u64..100_000) {
        let t = laf_domain_api::gen_term(&TermGenConfig { seed, ..TermGenConfig::loop_free() });
        let budget = EnumBudget::with_window(-3, 3);
        let Ok(want) = laf_semantics::result_values(&t, &budget) else { return Ok(()) };
        let out = out_term(&RewriteDomain::exact().preserving_results().run(&t), &t);
        proptest::prop_assert!(check_wf(&out).is_ok());
        let got = laf_semantics::result_values(&out, &budget).unwrap();
        proptest::prop_assert_eq!(got, want);
    }
}
