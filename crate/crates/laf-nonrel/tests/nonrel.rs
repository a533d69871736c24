use laf_core::{parse_term, Op, Sort, Term, TermBuilder};
use laf_domain_api::{soundness_check, soundness_suite, AbstractDomain, TermGenConfig, Verdict};
use laf_lattices::{itv, AbsValue, IntFlavor, Interval};
use laf_nonrel::{NonRel, NonRelConfig, NonRelEnv};
use laf_semantics::EnumBudget;

fn value(t: &Term, st: &NonRelEnv, name: &str) -> AbsValue {
    st.get(t.var_named(name).unwrap()).clone()
}

#[test]
fn shared_nondet_loses_the_symbolic_zero() {
    let t =
        parse_term("(let a int 2)(let b int 7)(let v int (nondet a b))(let r int (sub v v))(in r)")
            .unwrap();
    let d = NonRel::default();
    let st = d.eval_term(&t);
    assert_eq!(value(&t, &st, "v"), itv(Some(2), Some(7)));
    assert_eq!(value(&t, &st, "r"), itv(Some(-5), Some(5)));
}

#[test]
fn counting_loop_widens() {
    let t = parse_term(
        "(let z int 0)(let one int 1)(let r int (mu (x) (let n int (add x one)) n z))(in r)",
    )
    .unwrap();
    let d = NonRel::default();
    let st = d.eval_term(&t);
    assert_eq!(value(&t, &st, "r"), itv(Some(0), None));
    // post-fixpoint: exit ⊔ init ⊑ result
    let exit = value(&t, &st, "n");
    let r = value(&t, &st, "r");
    assert!(exit.join(&itv(Some(0), Some(0))).leq(&r));
}

#[test]
fn widening_delay_and_thresholds() {
    // x alternates between 1 and -1
    let t =
        parse_term("(let one int 1)(let r int (mu (x) (let n int (neg x)) n one))(in r)").unwrap();
    let plain = NonRel::default().eval_term(&t);
    assert_eq!(value(&t, &plain, "r"), AbsValue::Itv(Interval::top()));
    let thr = NonRel::new(NonRelConfig {
        thresholds: vec![-1, 0, 1, 8],
        ..Default::default()
    })
    .eval_term(&t);
    assert_eq!(value(&t, &thr, "r"), itv(Some(-1), Some(1)));
    let delayed = NonRel::new(NonRelConfig {
        widen_delay: 1,
        ..Default::default()
    })
    .eval_term(&t);
    assert_eq!(value(&t, &delayed, "r"), itv(Some(-1), Some(1)));
}

#[test]
fn unknown_is_top() {
    let t = parse_term("(let x int (unknown))(in x)").unwrap();
    let st = NonRel::default().eval_term(&t);
    assert_eq!(value(&t, &st, "x"), AbsValue::Itv(Interval::top()));
}

#[test]
fn assume_is_ignored_but_sound() {
    let t = parse_term(
        "(let f bool false)(let one int 1)(let x int (assume f one))(let y int 2)(in y)",
    )
    .unwrap();
    let d = NonRel::default();
    assert_eq!(value(&t, &d.eval_term(&t), "x"), itv(Some(1), Some(1)));
    assert_eq!(soundness_check(&d, &t, &EnumBudget::default()), Verdict::Ok);
}

#[test]
fn op_counts_per_definition() {
    let t = parse_term(
        "(let x int (unknown))(let y int (add x x))(let b bool (unknown))(let p (tuple int int bool) (mk x y b))
         (let q (tuple int int bool) (assume b p))(let w (tuple int int bool) (nondet p q))(in w)",
    )
    .unwrap();
    let d = NonRel::default();
    let mut env = NonRelEnv::new(t.vars.len());
    let mut counts = Vec::new();
    for def in &t.ctx.defs {
        counts.push(d.count_ops_for(&t.vars, def, &env));
        d.eval_ctx(
            &t.vars,
            &laf_core::Context {
                defs: vec![def.clone()],
            },
            &mut env,
        );
    }
    // unknown, add, unknown, mk, assume, nondet of a 3-tuple
    assert_eq!(counts, vec![0, 1, 0, 0, 0, 3]);
}

/// A term with `n` integer unknowns packed pairwise, ending in a nondet over a k-tuple.
fn wide_term(n: usize, k: usize) -> Term {
    let mut b = TermBuilder::new();
    let mut xs = Vec::new();
    for i in 0..n {
        xs.push(b.unknown(&format!("x{i}"), Sort::Int).unwrap());
    }
    let t1 = b.op("t1", Op::Mk, &xs[..k]).unwrap();
    let t2 = b.op("t2", Op::Mk, &xs[n - k..]).unwrap();
    let r = b.nondet("r", t1, t2).unwrap();
    b.finish(r).unwrap()
}

#[test]
fn nondet_cost_is_independent_of_store_size() {
    let d = NonRel::default();
    for k in [1, 4, 7] {
        let mut costs = Vec::new();
        for n in [100, 10_000] {
            let t = wide_term(n, k);
            let mut env = NonRelEnv::new(t.vars.len());
            let (last, prefix) = t.ctx.defs.split_last().unwrap();
            d.eval_ctx(
                &t.vars,
                &laf_core::Context {
                    defs: prefix.to_vec(),
                },
                &mut env,
            );
            costs.push(d.count_ops_for(&t.vars, last, &env));
        }
        assert_eq!(costs, vec![k as u64, k as u64]);
    }
}

#[test]
fn straight_line_cost_is_linear() {
    let d = NonRel::default();
    let mut ratios = Vec::new();
    for n in [100usize, 1000, 10_000] {
        let mut b = TermBuilder::new();
        let mut last = b.unknown("x", Sort::Int).unwrap();
        let one = b.int("one", 1).unwrap();
        for i in 0..n {
            last = b.op(&format!("y{i}"), Op::Add, &[last, one]).unwrap();
        }
        let t = b.finish(last).unwrap();
        let st = d.eval_term(&t);
        ratios.push(st.op_counter as f64 / t.ctx.len() as f64);
    }
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    assert!((hi - lo) / hi < 0.05, "{ratios:?}");
}

#[test]
fn constants_flavor() {
    let t = parse_term("(let a int 2)(let b int 3)(let s int (add a b))(let u int (unknown))(let v int (add s u))(in v)").unwrap();
    let d = NonRel::new(NonRelConfig {
        flavor: IntFlavor::Constant,
        ..Default::default()
    });
    let st = d.eval_term(&t);
    assert_eq!(value(&t, &st, "s").to_string(), "5");
    assert_eq!(value(&t, &st, "v").to_string(), "⊤");
}

#[test]
fn random_terms_are_sound() {
    let budget = EnumBudget::with_window(-4, 4);
    for d in [
        NonRel::default(),
        NonRel::new(NonRelConfig {
            flavor: IntFlavor::Constant,
            ..Default::default()
        }),
        NonRel::new(NonRelConfig {
            widen_delay: 2,
            thresholds: vec![-1, 0, 1, 8],
            ..Default::default()
        }),
    ] {
        let rep = soundness_suite(
            &d,
            300,
            &TermGenConfig {
                seed: 1000,
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
}
