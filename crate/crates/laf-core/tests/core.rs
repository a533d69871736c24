use laf_core::{
    check_wf, parse_term, print_term, Context, Def, Literal, Op, Rhs, Sort, TermBuilder, Var,
    WfError,
};

const ABS_TERMS: &str = include_str!("../../../fixtures/abs_example_terms.laf");

#[test]
fn append_is_persistent() {
    let mut b = TermBuilder::new();
    let x = b.int("x", 12).unwrap();
    let one = b.int("one", 1).unwrap();
    let t = b.finish(one).unwrap();
    let mut vars = t.vars.clone();
    let y = vars.fresh("y", Sort::Int);
    let before = t.ctx.clone();
    let ext = t
        .ctx
        .append(
            &vars,
            Def {
                var: y,
                rhs: Rhs::Op(Op::Add, vec![x, one]),
            },
        )
        .unwrap();
    assert_eq!(t.ctx, before);
    assert_eq!(ext.len(), 3);
    assert_eq!(ext.defs[2].var, y);
}

#[test]
fn append_to_empty() {
    let mut vars = laf_core::VarTable::new();
    let x = vars.fresh("x", Sort::Int);
    let ctx = Context::new()
        .append(
            &vars,
            Def {
                var: x,
                rhs: Rhs::Op(Op::Lit(Literal::int(5)), vec![]),
            },
        )
        .unwrap();
    assert_eq!(ctx.len(), 1);
}

#[test]
fn append_rejects_unbound_argument() {
    let mut vars = laf_core::VarTable::new();
    let z = vars.fresh("z", Sort::Int);
    let y = vars.fresh("y", Sort::Int);
    let err = Context::new()
        .append(
            &vars,
            Def {
                var: y,
                rhs: Rhs::Op(Op::Neg, vec![z]),
            },
        )
        .unwrap_err();
    assert!(matches!(err, WfError::Scope(ref n) if n == "z"));
}

#[test]
fn append_rejects_duplicate_and_sort_errors() {
    let mut b = TermBuilder::new();
    let x = b.int("x", 1).unwrap();
    let t = b.finish(x).unwrap();
    let dup = t.ctx.append(
        &t.vars,
        Def {
            var: x,
            rhs: Rhs::Op(Op::Lit(Literal::int(2)), vec![]),
        },
    );
    assert!(matches!(dup, Err(WfError::Duplicate(_))));
    let mut vars = t.vars.clone();
    let y = vars.fresh("y", Sort::Int);
    let bad = t.ctx.append(
        &vars,
        Def {
            var: y,
            rhs: Rhs::Assume(x, x),
        },
    );
    assert!(matches!(bad, Err(WfError::Sort { .. })));
}

#[test]
fn abs_example_terms_are_well_formed() {
    let t = parse_term(ABS_TERMS).unwrap();
    assert!(check_wf(&t).is_ok());
    let c1 = t.var_named("c1").unwrap();
    assert_eq!(t.sort_of(c1), Some(&Sort::Bool));
    let t1 = t.var_named("t1").unwrap();
    assert_eq!(
        t.sort_of(t1),
        Some(&Sort::Tuple(vec![Sort::Int, Sort::Int]))
    );
    assert_eq!(t.sort_of(Var(10_000)), None);
}

#[test]
fn abs_terms_round_trip() {
    let t = parse_term(ABS_TERMS).unwrap();
    let printed = print_term(&t);
    let t2 = parse_term(&printed).unwrap();
    assert_eq!(t, t2);
    assert_eq!(print_term(&t2), printed);
    // comments and layout are normalized away
    assert!(!printed.contains(';'));
}

#[test]
fn wf_reports_assume_on_int_condition() {
    let mut b = TermBuilder::new();
    let y = b.int("y", 1).unwrap();
    let z = b.int("z", 2).unwrap();
    let t = b.finish(z).unwrap();
    let mut bad = t.clone();
    let x = bad.vars.fresh("x", Sort::Int);
    bad.ctx.defs.push(Def {
        var: x,
        rhs: Rhs::Assume(y, z),
    });
    let diags = check_wf(&bad).unwrap_err();
    assert_eq!(diags.len(), 1);
    assert_eq!(diags[0].def_index, 2);
    assert!(diags[0].message.contains("bool"));
}

#[test]
fn wf_reports_duplicate_binder() {
    let mut b = TermBuilder::new();
    let x = b.int("x", 1).unwrap();
    let mut t = b.finish(x).unwrap();
    let again = t.ctx.defs[0].clone();
    t.ctx.defs.push(again);
    let diags = check_wf(&t).unwrap_err();
    assert!(diags
        .iter()
        .any(|d| d.message.contains("twice") && d.def_index == 1));
}

#[test]
fn parse_errors_carry_positions() {
    let e = parse_term("(let y int 1)\n(let x int (nondet y))\n(in x)").unwrap_err();
    assert_eq!((e.line, e.col), (2, 12));
    assert!(e.message.contains("2 arguments"));
    let e = parse_term("(let x int (add x x))(in x)").unwrap_err();
    assert!(e.message.contains("unbound"));
    let e = parse_term("(let x int 1").unwrap_err();
    assert_eq!((e.line, e.col), (1, 1));
    assert!(parse_term("(let x int 1)").is_err());
}

#[test]
fn mu_parse_and_scope() {
    let src = "(let zero int 0)\n(let one int 1)\n(let r int (mu (s)\n  (let n int (add s one))\n  n zero))\n(in r)\n";
    let t = parse_term(src).unwrap();
    assert!(check_wf(&t).is_ok());
    assert_eq!(print_term(&t), src);
    // body variables are not visible after the loop
    let bad = "(let zero int 0)(let r int (mu (s) (let n int (add s s)) n zero))(in n)";
    assert!(parse_term(bad).is_err());
    // exit must be in the body scope
    let bad = "(let zero int 0)(let r int (mu (s) zero zero))(in r)";
    assert!(parse_term(bad).is_ok());
}

#[test]
fn bitvector_ops() {
    let src = "(let x (bv 16) (unknown))\n(let hi (bv 8) (extract.15.8 x))\n(let lo (bv 8) (extract.7.0 x))\n(let y (bv 16) (concat hi lo))\n(let k (bv 16) 255)\n(let e bool (eq y k))\n(in e)\n";
    let t = parse_term(src).unwrap();
    assert_eq!(print_term(&t), src);
    assert!(parse_term("(let x (bv 8) (unknown))(let y (bv 8) (extract.8.0 x))(in y)").is_err());
    assert!(parse_term("(let x (bv 0) (unknown))(in x)").is_err());
}

#[test]
fn duplicate_display_names_are_uniquified() {
    let mut b = TermBuilder::new();
    let a = b.int("a", 1).unwrap();
    let a2 = b.op("a", Op::Neg, &[a]).unwrap();
    let t = b.finish(a2).unwrap();
    let printed = print_term(&t);
    let back = parse_term(&printed).unwrap();
    assert_eq!(back.ctx, t.ctx);
    assert_eq!(back.vars.len(), 2);
}

#[test]
fn defs_visit_vars_in_id_order() {
    let t = parse_term(ABS_TERMS).unwrap();
    let ids: Vec<u32> = t.ctx.bound_vars().iter().map(|v| v.0).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    assert_eq!(ids.len(), t.vars.len());
}

#[test]
fn literal_sorts() {
    assert_eq!(Literal::Bool(true).sort(), Sort::Bool);
    assert_eq!(
        Literal::BitVec { width: 4, bits: 3 }.sort(),
        Sort::BitVec(4)
    );
}
