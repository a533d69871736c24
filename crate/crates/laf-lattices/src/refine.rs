//! Backward transfer functions. Given the arguments of an operation and an
//! abstraction of its (non-⊥) result, each function returns refined
//! arguments that still contain every argument tuple producing a non-⊥
//! result inside the result abstraction.

use laf_core::Op;
use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::interval::{Bound, Interval};
use crate::value::{AbsValue, BoolSet, BvSet, Flat};

fn back(like: &AbsValue, i: Interval) -> AbsValue {
    let v = match like {
        AbsValue::Const(_) => AbsValue::Const(match i.as_singleton() {
            Some(z) => Flat::Const(z.clone()),
            None if i.is_empty() => Flat::Bot,
            None => Flat::Top,
        }),
        _ => AbsValue::Itv(i),
    };
    like.meet(&v)
}

fn bools(v: &AbsValue) -> BoolSet {
    v.as_bools().expect("boolean abstract value")
}

/// `x ∈ lo..=hi` where `x` ranges over `a` and the divisor over `b`, for `z = a / b`.
fn div_dividend(z: &Interval, b: &Interval) -> Interval {
    let (neg, pos) = b.split_nonzero();
    let m = match b.shave_zero().max_abs() {
        Some(m) => m,
        None => return Interval::top(),
    };
    let slack = &m - BigInt::one();
    let rem = Interval::new(Bound::Fin(-slack.clone()), Bound::Fin(slack));
    z.mul(&neg).join(&z.mul(&pos)).add(&rem)
}

/// Refined arguments for a non-⊥ result of `op` abstracted by `res`.
pub fn refine_args(op: &Op, res: &AbsValue, args: &[AbsValue]) -> Vec<AbsValue> {
    if res.is_empty() {
        return args.iter().map(AbsValue::bottom_like).collect();
    }
    let ints = || -> Vec<Interval> {
        args.iter()
            .map(|a| a.to_interval().expect("integer argument"))
            .collect()
    };
    match op {
        Op::Lit(_) => vec![],
        Op::Add | Op::Sub | Op::Mul | Op::Div | Op::Neg => {
            let z = res.to_interval().expect("integer result");
            let xs = ints();
            let out: Vec<Interval> = match op {
                Op::Neg => vec![xs[0].meet(&z.neg())],
                Op::Add => vec![xs[0].meet(&z.sub(&xs[1])), xs[1].meet(&z.sub(&xs[0]))],
                Op::Sub => vec![xs[0].meet(&z.add(&xs[1])), xs[1].meet(&xs[0].sub(&z))],
                Op::Mul => {
                    let mut x = xs[0].clone();
                    let mut y = xs[1].clone();
                    if let Some(k) = xs[1].as_singleton().filter(|k| !k.is_zero()) {
                        x = x.meet(&z.exact_div_by(k));
                    }
                    if let Some(k) = xs[0].as_singleton().filter(|k| !k.is_zero()) {
                        y = y.meet(&z.exact_div_by(k));
                    }
                    vec![x, y]
                }
                _ => {
                    let y = xs[1].shave_zero();
                    let x = xs[0].meet(&div_dividend(&z, &y));
                    vec![x, y]
                }
            };
            args.iter().zip(out).map(|(a, i)| back(a, i)).collect()
        }
        Op::Lt | Op::Le => {
            let r = bools(res);
            let xs = ints();
            let (x, y) = (&xs[0], &xs[1]);
            let (x2, y2) = match (r.t, r.f, op) {
                (true, false, Op::Lt) => (x.meet(&upper(y, -1)), y.meet(&lower(x, 1))),
                (true, false, _) => (x.meet(&upper(y, 0)), y.meet(&lower(x, 0))),
                (false, true, Op::Lt) => (x.meet(&lower(y, 0)), y.meet(&upper(x, 0))),
                (false, true, _) => (x.meet(&lower(y, 1)), y.meet(&upper(x, -1))),
                _ => (x.clone(), y.clone()),
            };
            vec![back(&args[0], x2), back(&args[1], y2)]
        }
        Op::Eq => {
            let r = bools(res);
            if r.t && !r.f {
                let m = args[0].meet(&args[1]);
                vec![m.clone(), m]
            } else if r.f && !r.t {
                vec![differ(&args[0], &args[1]), differ(&args[1], &args[0])]
            } else {
                args.to_vec()
            }
        }
        Op::Not => {
            let r = bools(res);
            vec![args[0].meet(&AbsValue::Bools(BoolSet { t: r.f, f: r.t }))]
        }
        Op::And | Op::Or => {
            let r = bools(res);
            let a = bools(&args[0]);
            let b = bools(&args[1]);
            // keep the argument pairs whose result is allowed
            let mut na = BoolSet::EMPTY;
            let mut nb = BoolSet::EMPTY;
            for x in [true, false] {
                for y in [true, false] {
                    let inx = if x { a.t } else { a.f };
                    let iny = if y { b.t } else { b.f };
                    let out = if *op == Op::And { x && y } else { x || y };
                    let ok = if out { r.t } else { r.f };
                    if inx && iny && ok {
                        if x {
                            na.t = true
                        } else {
                            na.f = true
                        }
                        if y {
                            nb.t = true
                        } else {
                            nb.f = true
                        }
                    }
                }
            }
            vec![AbsValue::Bools(na), AbsValue::Bools(nb)]
        }
        Op::Mk => match res {
            AbsValue::Tuple(rs) => args.iter().zip(rs).map(|(a, r)| a.meet(r)).collect(),
            _ => args.to_vec(),
        },
        Op::Get(i) => match &args[0] {
            AbsValue::Tuple(vs) => {
                let mut vs = vs.clone();
                vs[*i] = vs[*i].meet(res);
                vec![AbsValue::Tuple(vs)]
            }
            _ => args.to_vec(),
        },
        Op::Extract { .. } | Op::Concat => args.to_vec(),
    }
}

/// `[-∞; hi(i) + k]`.
fn upper(i: &Interval, k: i64) -> Interval {
    match i.bounds() {
        Some((_, Bound::Fin(h))) => Interval::new(Bound::NegInf, Bound::Fin(h + k)),
        Some(_) => Interval::top(),
        None => Interval::Empty,
    }
}

/// `[lo(i) + k; +∞]`.
fn lower(i: &Interval, k: i64) -> Interval {
    match i.bounds() {
        Some((Bound::Fin(l), _)) => Interval::new(Bound::Fin(l + k), Bound::PosInf),
        Some(_) => Interval::top(),
        None => Interval::Empty,
    }
}

/// `a` refined by `a ≠ b`: only a singleton `b` can shave `a`.
fn differ(a: &AbsValue, b: &AbsValue) -> AbsValue {
    match (a, b) {
        (AbsValue::Bools(x), AbsValue::Bools(y)) => {
            let mut x = *x;
            if *y == BoolSet::TRUE {
                x.t = false;
            } else if *y == BoolSet::FALSE {
                x.f = false;
            }
            AbsValue::Bools(x)
        }
        (AbsValue::Bvs(BvSet::Set(w, xs)), AbsValue::Bvs(BvSet::Set(_, ys))) if ys.len() == 1 => {
            let mut xs = xs.clone();
            xs.remove(ys.iter().next().unwrap());
            AbsValue::Bvs(BvSet::Set(*w, xs))
        }
        (AbsValue::Tuple(_), _) | (AbsValue::Bvs(_), _) => a.clone(),
        _ => {
            let x = a.to_interval().expect("integer argument");
            let y = b.to_interval().expect("integer argument");
            match y.as_singleton() {
                Some(k) => back(a, x.shave(k)),
                None => a.clone(),
            }
        }
    }
}
