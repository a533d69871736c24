use laf_core::Op;
use laf_lattices::{itv, refine_args, AbsValue, BoolSet, Bound, BvSet, Flat, IntFlavor, Interval};
use laf_semantics::{eval_op, Value};
use num_bigint::BigInt;
use proptest::prelude::*;

const WIN: i64 = 12;

fn members(i: &Interval) -> Vec<i64> {
    (-WIN..=WIN)
        .filter(|z| i.contains(&BigInt::from(*z)))
        .collect()
}

fn interval() -> impl Strategy<Value = Interval> {
    (-6i64..6, 0i64..6, any::<bool>(), any::<bool>(), 0u8..10).prop_map(
        |(lo, len, inf_lo, inf_hi, e)| {
            if e == 0 {
                return Interval::Empty;
            }
            let l = if inf_lo && e < 3 {
                Bound::NegInf
            } else {
                Bound::fin(lo)
            };
            let h = if inf_hi && e > 7 {
                Bound::PosInf
            } else {
                Bound::fin(lo + len)
            };
            Interval::new(l, h)
        },
    )
}

fn bools() -> impl Strategy<Value = BoolSet> {
    (any::<bool>(), any::<bool>()).prop_map(|(t, f)| BoolSet { t, f })
}

fn int_binop() -> impl Strategy<Value = Op> {
    prop_oneof![
        Just(Op::Add),
        Just(Op::Sub),
        Just(Op::Mul),
        Just(Op::Div),
        Just(Op::Lt),
        Just(Op::Le),
        Just(Op::Eq)
    ]
}

#[test]
fn join_of_sign_halves() {
    assert_eq!(
        itv(Some(-8), Some(-1)).join(&itv(Some(0), Some(8))),
        itv(Some(-8), Some(8))
    );
}

#[test]
fn widening_goes_to_infinity() {
    assert_eq!(
        itv(Some(0), Some(1)).widen(&itv(Some(0), Some(2)), &[]),
        itv(Some(0), None)
    );
}

#[test]
fn forward_examples() {
    let f = IntFlavor::Interval;
    assert_eq!(
        AbsValue::transfer(
            &Op::Div,
            &[itv(Some(-8), Some(8)), itv(Some(9), Some(9))],
            f
        ),
        itv(Some(0), Some(0))
    );
    assert_eq!(
        AbsValue::transfer(&Op::Lt, &[itv(None, Some(-1)), itv(Some(0), Some(0))], f),
        AbsValue::Bools(BoolSet::TRUE)
    );
    let x = itv(Some(-3), Some(10));
    assert_eq!(
        AbsValue::transfer(&Op::Add, &[x.clone(), itv(Some(0), Some(0))], f),
        x
    );
}

#[test]
fn membership_examples() {
    assert!(itv(Some(0), Some(8)).contains(&Value::int(5)));
    assert!(AbsValue::Itv(Interval::Empty).contains(&Value::Bottom));
    assert!(!AbsValue::Bools(BoolSet::FALSE).contains(&Value::Bool(true)));
    assert!(!AbsValue::Itv(Interval::Empty).contains(&Value::int(0)));
}

#[test]
fn constants_flavor() {
    let f = IntFlavor::Constant;
    let two = AbsValue::Const(Flat::Const(BigInt::from(2)));
    let three = AbsValue::Const(Flat::Const(BigInt::from(3)));
    assert_eq!(
        AbsValue::transfer(&Op::Add, &[two.clone(), three.clone()], f),
        AbsValue::Const(Flat::Const(BigInt::from(5)))
    );
    assert_eq!(two.join(&three), AbsValue::Const(Flat::Top));
    assert_eq!(
        AbsValue::transfer(
            &Op::Div,
            &[two.clone(), AbsValue::Const(Flat::Const(BigInt::from(0)))],
            f
        ),
        AbsValue::Const(Flat::Bot)
    );
    assert_eq!(
        AbsValue::transfer(&Op::Lt, &[two, three], f),
        AbsValue::Bools(BoolSet::TRUE)
    );
}

#[test]
fn bitvector_sets() {
    let x = AbsValue::Bvs(BvSet::Set(16, [0x1234u64, 0xabcd].into_iter().collect()));
    let hi = AbsValue::transfer(
        &Op::Extract { hi: 15, lo: 8 },
        std::slice::from_ref(&x),
        IntFlavor::Interval,
    );
    let lo = AbsValue::transfer(
        &Op::Extract { hi: 7, lo: 0 },
        std::slice::from_ref(&x),
        IntFlavor::Interval,
    );
    let back = AbsValue::transfer(&Op::Concat, &[hi, lo], IntFlavor::Interval);
    assert!(x.leq(&back));
    assert!(back.contains(&Value::BitVec {
        width: 16,
        bits: 0x12cd
    }));
    let top = AbsValue::Bvs(BvSet::Top(8));
    assert_eq!(
        AbsValue::transfer(&Op::Eq, &[top.clone(), top], IntFlavor::Interval),
        AbsValue::Bools(BoolSet::TOP)
    );
}

#[test]
fn tuples_are_componentwise() {
    let a = AbsValue::Tuple(vec![itv(Some(0), Some(1)), AbsValue::Bools(BoolSet::TRUE)]);
    let b = AbsValue::Tuple(vec![itv(Some(3), Some(4)), AbsValue::Bools(BoolSet::FALSE)]);
    let j = a.join(&b);
    assert_eq!(
        j,
        AbsValue::Tuple(vec![itv(Some(0), Some(4)), AbsValue::Bools(BoolSet::TOP)])
    );
    assert!(j.contains(&Value::Tuple(vec![Value::int(2), Value::Bool(false)])));
    assert_eq!(j.scalar_count(), 2);
}

#[test]
fn refinement_examples() {
    // xdiv = x / 9 with xdiv ∈ [0;0] keeps x ∈ [-8;8]
    let r = refine_args(
        &Op::Div,
        &itv(Some(0), Some(0)),
        &[AbsValue::Itv(Interval::top()), itv(Some(9), Some(9))],
    );
    assert_eq!(r[0], itv(Some(-8), Some(8)));
    // x < 0 is true: x ∈ [-∞;-1]
    let r = refine_args(
        &Op::Lt,
        &AbsValue::Bools(BoolSet::TRUE),
        &[AbsValue::Itv(Interval::top()), itv(Some(0), Some(0))],
    );
    assert_eq!(r[0], itv(None, Some(-1)));
    // abs <= 8 with abs ∈ [0;+∞]
    let r = refine_args(
        &Op::Le,
        &AbsValue::Bools(BoolSet::TRUE),
        &[itv(Some(0), None), itv(Some(8), Some(8))],
    );
    assert_eq!(r[0], itv(Some(0), Some(8)));
    // nx = -x with nx ∈ [1;8]
    let r = refine_args(
        &Op::Neg,
        &itv(Some(1), Some(8)),
        &[AbsValue::Itv(Interval::top())],
    );
    assert_eq!(r[0], itv(Some(-8), Some(-1)));
}

proptest! {
    #[test]
    fn forward_transfer_is_sound(op in int_binop(), a in interval(), b in interval()) {
        let out = AbsValue::transfer(&op, &[AbsValue::Itv(a.clone()), AbsValue::Itv(b.clone())], IntFlavor::Interval);
        for x in members(&a) {
            for y in members(&b) {
                let v = eval_op(&op, &[Value::int(x), Value::int(y)]);
                prop_assert!(out.contains(&v), "{:?}({}, {}) = {} not in {}", op, x, y, v, out);
            }
        }
    }

    #[test]
    fn neg_is_sound(a in interval()) {
        let out = AbsValue::transfer(&Op::Neg, &[AbsValue::Itv(a.clone())], IntFlavor::Interval);
        for x in members(&a) {
            prop_assert!(out.contains(&Value::int(-x)));
        }
    }

    #[test]
    fn bool_ops_are_exact(op in prop_oneof![Just(Op::And), Just(Op::Or), Just(Op::Eq)], a in bools(), b in bools()) {
        let out = AbsValue::transfer(&op, &[AbsValue::Bools(a), AbsValue::Bools(b)], IntFlavor::Interval);
        let mut exact = BoolSet::EMPTY;
        for x in [true, false] {
            for y in [true, false] {
                if (if x { a.t } else { a.f }) && (if y { b.t } else { b.f }) {
                    let v = eval_op(&op, &[Value::Bool(x), Value::Bool(y)]);
                    if v == Value::Bool(true) { exact.t = true } else { exact.f = true }
                }
            }
        }
        prop_assert_eq!(out, AbsValue::Bools(exact));
    }

    #[test]
    fn backward_refinement_keeps_preimage(op in int_binop(), a in interval(), b in interval(), r in interval(), rb in bools()) {
        let res = match op {
            Op::Lt | Op::Le | Op::Eq => AbsValue::Bools(rb),
            _ => AbsValue::Itv(r),
        };
        let args = [AbsValue::Itv(a.clone()), AbsValue::Itv(b.clone())];
        let refined = refine_args(&op, &res, &args);
        prop_assert!(refined[0].leq(&args[0]) && refined[1].leq(&args[1]));
        for x in members(&a) {
            for y in members(&b) {
                let v = eval_op(&op, &[Value::int(x), Value::int(y)]);
                if !v.is_bottom() && res.contains(&v) {
                    prop_assert!(refined[0].contains(&Value::int(x)), "{:?} lost x={} (y={}, res {})", op, x, y, res);
                    prop_assert!(refined[1].contains(&Value::int(y)), "{:?} lost y={} (x={}, res {})", op, y, x, res);
                }
            }
        }
    }

    #[test]
    fn mul_by_constant_refinement(a in interval(), k in -3i64..4, r in interval()) {
        let args = [AbsValue::Itv(a.clone()), itv(Some(k), Some(k))];
        let refined = refine_args(&Op::Mul, &AbsValue::Itv(r.clone()), &args);
        for x in members(&a) {
            if r.contains(&BigInt::from(x * k)) {
                prop_assert!(refined[0].contains(&Value::int(x)));
            }
        }
    }

    #[test]
    fn join_laws(a in interval(), b in interval(), c in interval()) {
        let (a, b, c) = (AbsValue::Itv(a), AbsValue::Itv(b), AbsValue::Itv(c));
        prop_assert_eq!(a.join(&a), a.clone());
        prop_assert_eq!(a.join(&b), b.join(&a));
        prop_assert_eq!(a.join(&b).join(&c), a.join(&b.join(&c)));
        prop_assert!(a.leq(&a.join(&b)) && b.leq(&a.join(&b)));
        prop_assert!(a.meet(&b).leq(&a));
    }

    #[test]
    fn leq_is_sound_for_membership(a in interval(), b in interval()) {
        if a.leq(&b) {
            for x in members(&a) {
                prop_assert!(b.contains(&BigInt::from(x)));
            }
        }
    }

    #[test]
    fn widening_stabilizes(start in interval(), steps in proptest::collection::vec(interval(), 1..8), thr in any::<bool>()) {
        let thresholds: &[i64] = if thr { &[-1, 0, 1, 8] } else { &[] };
        // ascending chain a_k = a_{k-1} ⊔ s_k
        let mut chain = vec![start];
        for s in &steps {
            let next = chain.last().unwrap().join(s);
            chain.push(next);
        }
        let mut w = chain[0].clone();
        let mut changes = 0;
        for a in &chain[1..] {
            let n = w.widen(a, thresholds);
            prop_assert!(w.leq(&n) && a.leq(&n));
            if n != w {
                changes += 1;
            }
            w = n;
        }
        // each bound can move at most once to infinity, plus threshold hops
        let limit = if thr { 2 + 2 * 4 } else { 3 };
        prop_assert!(changes <= limit, "{} changes", changes);
    }

    #[test]
    fn transfer_is_monotone(op in int_binop(), a in interval(), b in interval(), c in interval()) {
        let small = AbsValue::transfer(&op, &[AbsValue::Itv(a.clone()), AbsValue::Itv(b.clone())], IntFlavor::Interval);
        let big = AbsValue::transfer(&op, &[AbsValue::Itv(a.join(&c)), AbsValue::Itv(b)], IntFlavor::Interval);
        prop_assert!(small.leq(&big));
    }
}
