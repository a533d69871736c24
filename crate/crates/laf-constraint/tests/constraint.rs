use laf_constraint::{
    Cond, ConstraintConfig, ConstraintDomain, ConstraintState, Direction, Status,
};
use laf_core::{parse_term, Term};
use laf_domain_api::{
    gen_term, soundness_check, soundness_suite, OpWeights, TermGenConfig, Verdict,
};
use laf_lattices::{itv, AbsValue};
use laf_semantics::EnumBudget;

fn fixture(name: &str) -> Term {
    let p = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    parse_term(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn dom(f: impl FnOnce(&mut ConstraintConfig)) -> ConstraintDomain {
    let mut cfg = ConstraintConfig::default();
    f(&mut cfg);
    ConstraintDomain::new(cfg)
}

/// Entries of an input variable as printed (`cond ⊩ value`), sorted.
fn shown(st: &ConstraintState, d: &ConstraintDomain, t: &Term, name: &str) -> Vec<String> {
    d.binding(st, t.var_named(name).unwrap())
        .unwrap()
        .iter()
        .map(|(c, a)| format!("{} ⊩ {a}", st.show_cond(c)))
        .collect()
}

fn heavy() -> OpWeights {
    OpWeights {
        cmp: 6,
        assume: 7,
        nondet: 4,
        boolean: 3,
        tuple: 3,
        unknown: 3,
        ..Default::default()
    }
}

#[test]
fn abs_example_bindings() {
    let t = fixture("abs_example_terms.laf");
    let d = ConstraintDomain::default();
    let st = d.run(&t);
    assert_eq!(
        shown(&st, &d, &t, "x"),
        [
            "true ⊩ [-∞;+∞]",
            "c1 ⊩ [-∞;-1]",
            "¬c1 ⊩ [0;+∞]",
            "c1 ∧ c2 ⊩ [-8;-1]",
            "¬c1 ∧ c2 ⊩ [0;8]"
        ]
    );
    assert_eq!(
        shown(&st, &d, &t, "nx"),
        [
            "true ⊩ [-∞;+∞]",
            "c1 ⊩ [1;+∞]",
            "¬c1 ⊩ [-∞;0]",
            "c1 ∧ c2 ⊩ [1;8]",
            "¬c1 ∧ c2 ⊩ [-8;0]"
        ]
    );
    assert_eq!(shown(&st, &d, &t, "abs"), ["true ⊩ [0;+∞]", "c2 ⊩ [0;8]"]);
    assert_eq!(
        shown(&st, &d, &t, "c1"),
        ["true ⊩ {true;false}", "c1 ⊩ {true}", "¬c1 ⊩ {false}"]
    );
    assert_eq!(
        shown(&st, &d, &t, "c2"),
        ["true ⊩ {true;false}", "c2 ⊩ {true}"]
    );
    // nabs is -|x|: either x when x < 0 or -x otherwise.
    assert_eq!(shown(&st, &d, &t, "nabs"), ["true ⊩ [-∞;0]"]);
    assert_eq!(shown(&st, &d, &t, "c4"), ["c2 ⊩ {true}"]);
    assert_eq!(d.status(&st, t.var_named("c4").unwrap()), Status::Proved);
    assert_eq!(d.status(&st, t.var_named("c3").unwrap()), Status::Unknown);
    assert_eq!(
        soundness_check(&d, &t, &EnumBudget::with_window(-12, 12)),
        Verdict::Ok
    );
}

#[test]
fn value_under_a_condition_splits_on_total_literals() {
    let t = fixture("abs_example_terms.laf");
    let d = ConstraintDomain::default();
    let st = d.run(&t);
    let x = st.image(t.var_named("x").unwrap()).unwrap().val;
    let c2 = st.image(t.var_named("c2").unwrap()).unwrap().val;
    let k = Cond::lit(laf_constraint::Lit::new(c2, true));
    assert_eq!(st.query(x, &k, &d.cfg), itv(Some(-8), Some(8)));
    let xdiv2 = t.var_named("xdiv2").unwrap();
    assert_eq!(d.value_of(&st, xdiv2).unwrap(), itv(Some(0), Some(0)));
}

#[test]
fn limit_zero_keeps_only_the_assumed_literal() {
    let t = fixture("abs_example_terms.laf");
    let d = dom(|c| c.prop_limit = Some(0));
    let st = d.run(&t);
    assert_eq!(shown(&st, &d, &t, "x"), ["true ⊩ [-∞;+∞]"]);
    assert_eq!(
        shown(&st, &d, &t, "c2"),
        ["true ⊩ {true;false}", "c2 ⊩ {true}"]
    );
    assert_eq!(d.status(&st, t.var_named("c4").unwrap()), Status::Unknown);
    // One refined variable per assumption is not enough either: the chain
    // from c2 back to x has several links.
    let d1 = dom(|c| c.prop_limit = Some(1));
    assert_eq!(
        d1.status(&d1.run(&t), t.var_named("c4").unwrap()),
        Status::Unknown
    );
}

#[test]
fn backward_only_omits_forward_facts() {
    let t = fixture("abs_example_terms.laf");
    let d = dom(|c| c.direction = Direction::Backward);
    let st = d.run(&t);
    assert_eq!(
        shown(&st, &d, &t, "nx"),
        ["true ⊩ [-∞;+∞]", "c1 ∧ c2 ⊩ [1;8]"]
    );
    assert_eq!(d.status(&st, t.var_named("c4").unwrap()), Status::Proved);
}

#[test]
fn exclusive_branches_merge_to_true() {
    let t = parse_term(
        "(let x int (unknown))(let z int 0)(let c bool (lt x z))(let n bool (not c))
         (let a int (assume c x))(let b int (assume n x))(let m int (nondet a b))(in m)",
    )
    .unwrap();
    let d = ConstraintDomain::default();
    let st = d.run(&t);
    let im = st.image(t.var_named("m").unwrap()).unwrap();
    assert_eq!(im.cond, Some(Cond::top()));
    // `not c` is read as the negative literal on c.
    let b = st.image(t.var_named("b").unwrap()).unwrap();
    let c = st.image(t.var_named("c").unwrap()).unwrap().val;
    assert_eq!(b.cond, Some(Cond::lit(laf_constraint::Lit::new(c, false))));
    assert_eq!(
        d.value_of(&st, t.var_named("m").unwrap()).unwrap(),
        itv(None, None)
    );
}

#[test]
fn unrelated_branch_conditions_get_a_disjunction_literal() {
    let t = parse_term(
        "(let x int (unknown))(let y int (unknown))(let z int 0)(let p bool (lt x z))(let q bool (lt y z))
         (let a int (assume p x))(let b int (assume q y))(let m int (nondet a b))(in m)",
    )
    .unwrap();
    let d = ConstraintDomain::default();
    let st = d.run(&t);
    let im = st.image(t.var_named("m").unwrap()).unwrap();
    let c = im.cond.clone().unwrap();
    assert_eq!(c.len(), 1);
    assert_eq!(st.vars.name(c.lits()[0].var), "disj");
    assert_eq!(
        d.value_of(&st, t.var_named("m").unwrap()).unwrap(),
        itv(None, Some(-1))
    );
    assert_eq!(
        soundness_check(&d, &t, &EnumBudget::with_window(-3, 3)),
        Verdict::Ok
    );
}

#[test]
fn constant_conditions_simplify() {
    let t = parse_term(
        "(let x int (unknown))(let t bool true)(let f bool false)(let a int (assume t x))
         (let nt bool (not t))(let b int (assume nt x))(let z int 0)(let e bool (eq b z))(in e)",
    )
    .unwrap();
    let d = ConstraintDomain::default();
    let st = d.run(&t);
    assert_eq!(
        st.image(t.var_named("a").unwrap()).unwrap().cond,
        Some(Cond::top())
    );
    assert_eq!(st.image(t.var_named("b").unwrap()).unwrap().cond, None);
    // An assertion that is never defined holds vacuously.
    assert_eq!(d.status(&st, t.var_named("e").unwrap()), Status::Proved);
    assert_eq!(st.stats.seeds, 0);
}

#[test]
fn a_definitely_false_assertion_is_reported() {
    let t = parse_term("(let x int (unknown))(let z int 0)(let c bool (lt x z))(let a int (assume c x))(let e bool (le z a))(in e)")
        .unwrap();
    let d = ConstraintDomain::default();
    let st = d.run(&t);
    assert_eq!(d.status(&st, t.var_named("e").unwrap()), Status::False);
}

const BOUNDED_LOOP: &str = "(let zero int 0)(let ten int 10)(let one int 1)(let n int (unknown))
  (let r int (mu (i) (let c bool (lt i ten)) (let j int (assume c i)) (let k int (add j one))
     (let m bool (lt k n)) (let k2 int (assume m k)) k2 zero))
  (let done bool (le r ten))(in done)";

#[test]
fn loop_fixpoint_with_assumptions_in_the_body() {
    let t = parse_term(BOUNDED_LOOP).unwrap();
    let d = ConstraintDomain::default();
    let st = d.run(&t);
    assert_eq!(
        d.value_of(&st, t.var_named("r").unwrap()).unwrap(),
        itv(Some(0), Some(10))
    );
    assert_eq!(d.status(&st, t.var_named("done").unwrap()), Status::Proved);
    // n was refined under the body literal m during the loop; that fact is
    // dropped when the loop is left.
    assert_eq!(shown(&st, &d, &t, "n"), ["true ⊩ [-∞;+∞]"]);
    assert_eq!(
        soundness_check(&d, &t, &EnumBudget::with_window(-3, 12)),
        Verdict::Ok
    );
}

#[test]
fn loop_widening_and_thresholds() {
    // Without the bound in the body the counter is unbounded above.
    let t = parse_term(
        "(let zero int 0)(let one int 1)(let r int (mu (i) (let k int (add i one)) k zero))(in r)",
    )
    .unwrap();
    let d = ConstraintDomain::default();
    let st = d.run(&t);
    assert_eq!(
        d.value_of(&st, t.var_named("r").unwrap()).unwrap(),
        itv(Some(0), None)
    );
    assert!(st.stats.loop_rounds <= 4, "{:?}", st.stats);
    // Nested loops reach a fixpoint as well.
    let t = parse_term(
        "(let zero int 0)(let one int 1)(let three int 3)
         (let r int (mu (i) (let c bool (lt i three)) (let j int (assume c i))
            (let s int (mu (q) (let w bool (lt q j)) (let q2 int (assume w q)) (let q3 int (add q2 one)) q3 zero))
            (let k int (add j one)) k zero))
         (in r)",
    )
    .unwrap();
    let st = d.run(&t);
    assert_eq!(
        d.value_of(&st, t.var_named("r").unwrap()).unwrap(),
        itv(Some(0), Some(3))
    );
    assert_eq!(
        soundness_check(&d, &t, &EnumBudget::with_window(-1, 4)),
        Verdict::Ok
    );
}

#[test]
fn dump_format() {
    let t = fixture("abs_example_terms.laf");
    let d = ConstraintDomain::default();
    let st = d.run(&t);
    let dump = st.dump();
    assert!(dump.lines().any(|l| l == "c4 : c2 ⊩ {true}"), "{dump}");
    assert!(
        dump.lines().any(|l| l == "abs : true ⊩ [0;+∞], c2 ⊩ [0;8]"),
        "{dump}"
    );
}

#[test]
fn raising_the_limit_never_loses_precision() {
    let mut terms = vec![fixture("abs_example_terms.laf")];
    for seed in 0..50 {
        terms.push(gen_term(&TermGenConfig {
            seed,
            max_defs: 22,
            allow_mu: false,
            op_weights: heavy(),
            max_unknowns: 3,
            ..Default::default()
        }));
    }
    for t in &terms {
        let mut prev: Option<Vec<Option<AbsValue>>> = None;
        for lim in [Some(0), Some(1), Some(2), None] {
            let d = dom(|c| c.prop_limit = lim);
            let st = d.run(t);
            let vals: Vec<Option<AbsValue>> = (0..t.vars.len())
                .map(|i| d.value_of(&st, laf_core::Var(i as u32)))
                .collect();
            if let Some(p) = &prev {
                for (i, (a, b)) in p.iter().zip(&vals).enumerate() {
                    if let (Some(a), Some(b)) = (a, b) {
                        assert!(
                            b.leq(a),
                            "{}: {a} became {b} at limit {lim:?}",
                            t.vars.name(laf_core::Var(i as u32))
                        );
                    }
                }
            }
            prev = Some(vals);
        }
    }
}

#[test]
fn sound_on_random_terms() {
    let budget = EnumBudget::with_window(-3, 3);
    let runs = [
        (false, Direction::Both, None, 500),
        (true, Direction::Both, None, 500),
        (true, Direction::Backward, Some(1), 200),
        (false, Direction::Backward, Some(2), 200),
    ];
    for (i, (mu, dir, lim, n)) in runs.into_iter().enumerate() {
        let d = dom(|c| {
            c.direction = dir;
            c.prop_limit = lim;
        });
        let cfg = TermGenConfig {
            seed: 7_000 * (i as u64 + 1),
            max_defs: 22,
            allow_mu: mu,
            op_weights: heavy(),
            max_unknowns: 3,
            ..Default::default()
        };
        let rep = soundness_suite(&d, n, &cfg, &budget);
        assert!(
            rep.counterexamples.is_empty(),
            "{:?}",
            rep.counterexamples.first()
        );
        assert_eq!(rep.checked, n);
    }
}

#[test]
fn sound_on_default_generator_mix() {
    let d = ConstraintDomain::default();
    let rep = soundness_suite(
        &d,
        300,
        &TermGenConfig {
            seed: 31,
            ..Default::default()
        },
        &EnumBudget::with_window(-3, 3),
    );
    assert!(
        rep.counterexamples.is_empty(),
        "{:?}",
        rep.counterexamples.first()
    );
}
