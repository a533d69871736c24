use std::collections::BTreeSet;
use std::fmt;

use laf_core::{Literal, Op, Sort};
use laf_semantics::Value;
use num_bigint::BigInt;

use crate::interval::{Bound, Interval};

/// Maximum number of explicit bitvector constants before going to ⊤.
pub const BV_SET_CAP: usize = 16;

/// Which abstraction represents integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum IntFlavor {
    #[default]
    Interval,
    Constant,
}

/// Flat lattice of constants.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Flat {
    Bot,
    Const(BigInt),
    Top,
}

/// Subset of {true, false}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct BoolSet {
    pub t: bool,
    pub f: bool,
}

impl BoolSet {
    pub const TOP: BoolSet = BoolSet { t: true, f: true };
    pub const EMPTY: BoolSet = BoolSet { t: false, f: false };
    pub const TRUE: BoolSet = BoolSet { t: true, f: false };
    pub const FALSE: BoolSet = BoolSet { t: false, f: true };

    pub fn of(b: bool) -> BoolSet {
        if b {
            Self::TRUE
        } else {
            Self::FALSE
        }
    }

    fn values(self) -> impl Iterator<Item = bool> {
        [(self.t, true), (self.f, false)]
            .into_iter()
            .filter(|p| p.0)
            .map(|p| p.1)
    }
}

/// Explicit set of bitvector constants of one width, or ⊤.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BvSet {
    Set(u32, BTreeSet<u64>),
    Top(u32),
}

impl BvSet {
    pub fn width(&self) -> u32 {
        match self {
            BvSet::Set(w, _) | BvSet::Top(w) => *w,
        }
    }

    fn from_iter(width: u32, it: impl IntoIterator<Item = u64>) -> BvSet {
        let mut s = BTreeSet::new();
        for b in it {
            s.insert(b);
            if s.len() > BV_SET_CAP {
                return BvSet::Top(width);
            }
        }
        BvSet::Set(width, s)
    }
}

/// Abstract value of a LAF sort.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AbsValue {
    Itv(Interval),
    Const(Flat),
    Bools(BoolSet),
    Bvs(BvSet),
    Tuple(Vec<AbsValue>),
}

impl AbsValue {
    pub fn top(sort: &Sort, flavor: IntFlavor) -> AbsValue {
        match sort {
            Sort::Bool => AbsValue::Bools(BoolSet::TOP),
            Sort::Int => match flavor {
                IntFlavor::Interval => AbsValue::Itv(Interval::top()),
                IntFlavor::Constant => AbsValue::Const(Flat::Top),
            },
            Sort::BitVec(w) => AbsValue::Bvs(BvSet::Top(*w)),
            Sort::Tuple(es) => {
                AbsValue::Tuple(es.iter().map(|s| AbsValue::top(s, flavor)).collect())
            }
        }
    }

    /// The least element: only ⊥ concretizes into it.
    pub fn empty(sort: &Sort, flavor: IntFlavor) -> AbsValue {
        match sort {
            Sort::Bool => AbsValue::Bools(BoolSet::EMPTY),
            Sort::Int => match flavor {
                IntFlavor::Interval => AbsValue::Itv(Interval::Empty),
                IntFlavor::Constant => AbsValue::Const(Flat::Bot),
            },
            Sort::BitVec(w) => AbsValue::Bvs(BvSet::Set(*w, BTreeSet::new())),
            Sort::Tuple(es) => {
                AbsValue::Tuple(es.iter().map(|s| AbsValue::empty(s, flavor)).collect())
            }
        }
    }

    /// Best abstraction of a single non-⊥ value (⊥ maps to the empty value).
    pub fn from_value(v: &Value, sort: &Sort, flavor: IntFlavor) -> AbsValue {
        match (v, sort) {
            (Value::Bottom, _) => AbsValue::empty(sort, flavor),
            (Value::Bool(b), _) => AbsValue::Bools(BoolSet::of(*b)),
            (Value::Int(z), _) => AbsValue::int_const(z.clone(), flavor),
            (Value::BitVec { width, bits }, _) => AbsValue::Bvs(BvSet::from_iter(*width, [*bits])),
            (Value::Tuple(vs), Sort::Tuple(ss)) => AbsValue::Tuple(
                vs.iter()
                    .zip(ss)
                    .map(|(v, s)| AbsValue::from_value(v, s, flavor))
                    .collect(),
            ),
            (Value::Tuple(_), _) => panic!("tuple value for a scalar sort"),
        }
    }

    pub fn int_const(z: BigInt, flavor: IntFlavor) -> AbsValue {
        match flavor {
            IntFlavor::Interval => AbsValue::Itv(Interval::singleton(z)),
            IntFlavor::Constant => AbsValue::Const(Flat::Const(z)),
        }
    }

    pub fn interval(i: Interval) -> AbsValue {
        AbsValue::Itv(i)
    }

    pub fn bools(b: BoolSet) -> AbsValue {
        AbsValue::Bools(b)
    }

    /// Number of scalar components.
    pub fn scalar_count(&self) -> usize {
        match self {
            AbsValue::Tuple(vs) => vs.iter().map(AbsValue::scalar_count).sum(),
            _ => 1,
        }
    }

    /// True when only ⊥ concretizes into the value.
    pub fn is_empty(&self) -> bool {
        match self {
            AbsValue::Itv(i) => i.is_empty(),
            AbsValue::Const(c) => *c == Flat::Bot,
            AbsValue::Bools(b) => *b == BoolSet::EMPTY,
            AbsValue::Bvs(BvSet::Set(_, s)) => s.is_empty(),
            AbsValue::Bvs(BvSet::Top(_)) => false,
            AbsValue::Tuple(vs) => vs.iter().any(AbsValue::is_empty),
        }
    }

    pub fn as_bools(&self) -> Option<BoolSet> {
        match self {
            AbsValue::Bools(b) => Some(*b),
            _ => None,
        }
    }

    /// Integer abstraction viewed as an interval.
    pub fn to_interval(&self) -> Option<Interval> {
        match self {
            AbsValue::Itv(i) => Some(i.clone()),
            AbsValue::Const(Flat::Bot) => Some(Interval::Empty),
            AbsValue::Const(Flat::Const(z)) => Some(Interval::singleton(z.clone())),
            AbsValue::Const(Flat::Top) => Some(Interval::top()),
            _ => None,
        }
    }

    fn same_flavor(&self, i: Interval) -> AbsValue {
        match self {
            AbsValue::Const(_) => AbsValue::Const(match &i {
                Interval::Empty => Flat::Bot,
                _ => match i.as_singleton() {
                    Some(z) => Flat::Const(z.clone()),
                    None => Flat::Top,
                },
            }),
            _ => AbsValue::Itv(i),
        }
    }

    pub fn flavor(&self) -> IntFlavor {
        match self {
            AbsValue::Const(_) => IntFlavor::Constant,
            AbsValue::Tuple(vs) => vs.first().map(AbsValue::flavor).unwrap_or_default(),
            _ => IntFlavor::Interval,
        }
    }

    pub fn join(&self, o: &AbsValue) -> AbsValue {
        match (self, o) {
            (AbsValue::Itv(a), AbsValue::Itv(b)) => AbsValue::Itv(a.join(b)),
            (AbsValue::Const(a), AbsValue::Const(b)) => AbsValue::Const(match (a, b) {
                (Flat::Bot, x) | (x, Flat::Bot) => x.clone(),
                (Flat::Const(x), Flat::Const(y)) if x == y => a.clone(),
                _ => Flat::Top,
            }),
            (AbsValue::Bools(a), AbsValue::Bools(b)) => AbsValue::Bools(BoolSet {
                t: a.t || b.t,
                f: a.f || b.f,
            }),
            (AbsValue::Bvs(a), AbsValue::Bvs(b)) => AbsValue::Bvs(match (a, b) {
                (BvSet::Set(w, x), BvSet::Set(_, y)) => {
                    BvSet::from_iter(*w, x.iter().chain(y).copied())
                }
                _ => BvSet::Top(a.width()),
            }),
            (AbsValue::Tuple(a), AbsValue::Tuple(b)) => {
                if self.is_empty() {
                    return o.clone();
                }
                if o.is_empty() {
                    return self.clone();
                }
                AbsValue::Tuple(a.iter().zip(b).map(|(x, y)| x.join(y)).collect())
            }
            _ => panic!("join of mismatched abstract values {self} and {o}"),
        }
    }

    pub fn meet(&self, o: &AbsValue) -> AbsValue {
        match (self, o) {
            (AbsValue::Itv(a), AbsValue::Itv(b)) => AbsValue::Itv(a.meet(b)),
            (AbsValue::Const(a), AbsValue::Const(b)) => AbsValue::Const(match (a, b) {
                (Flat::Top, x) | (x, Flat::Top) => x.clone(),
                (Flat::Const(x), Flat::Const(y)) if x == y => a.clone(),
                _ => Flat::Bot,
            }),
            (AbsValue::Bools(a), AbsValue::Bools(b)) => AbsValue::Bools(BoolSet {
                t: a.t && b.t,
                f: a.f && b.f,
            }),
            (AbsValue::Bvs(a), AbsValue::Bvs(b)) => AbsValue::Bvs(match (a, b) {
                (BvSet::Top(_), x) | (x, BvSet::Top(_)) => x.clone(),
                (BvSet::Set(w, x), BvSet::Set(_, y)) => {
                    BvSet::Set(*w, x.intersection(y).copied().collect())
                }
            }),
            (AbsValue::Tuple(a), AbsValue::Tuple(b)) => {
                AbsValue::Tuple(a.iter().zip(b).map(|(x, y)| x.meet(y)).collect())
            }
            _ => panic!("meet of mismatched abstract values {self} and {o}"),
        }
    }

    pub fn leq(&self, o: &AbsValue) -> bool {
        if self.is_empty() {
            return true;
        }
        match (self, o) {
            (AbsValue::Itv(a), AbsValue::Itv(b)) => a.leq(b),
            (AbsValue::Const(a), AbsValue::Const(b)) => match (a, b) {
                (Flat::Bot, _) | (_, Flat::Top) => true,
                (Flat::Const(x), Flat::Const(y)) => x == y,
                _ => false,
            },
            (AbsValue::Bools(a), AbsValue::Bools(b)) => (!a.t || b.t) && (!a.f || b.f),
            (AbsValue::Bvs(a), AbsValue::Bvs(b)) => match (a, b) {
                (_, BvSet::Top(_)) => true,
                (BvSet::Top(_), _) => false,
                (BvSet::Set(_, x), BvSet::Set(_, y)) => x.is_subset(y),
            },
            (AbsValue::Tuple(a), AbsValue::Tuple(b)) => a.iter().zip(b).all(|(x, y)| x.leq(y)),
            _ => panic!("leq of mismatched abstract values {self} and {o}"),
        }
    }

    /// Widening. Only intervals have infinite ascending chains; the other
    /// scalar lattices are finite and widen by join.
    pub fn widen(&self, o: &AbsValue, thresholds: &[i64]) -> AbsValue {
        match (self, o) {
            (AbsValue::Itv(a), AbsValue::Itv(b)) => AbsValue::Itv(a.widen(b, thresholds)),
            (AbsValue::Tuple(a), AbsValue::Tuple(b)) => {
                if self.is_empty() {
                    return o.clone();
                }
                if o.is_empty() {
                    return self.clone();
                }
                AbsValue::Tuple(
                    a.iter()
                        .zip(b)
                        .map(|(x, y)| x.widen(y, thresholds))
                        .collect(),
                )
            }
            _ => self.join(o),
        }
    }

    /// Membership of a concrete value in the concretization. ⊥ belongs to
    /// every abstract value.
    pub fn contains(&self, v: &Value) -> bool {
        match (self, v) {
            (_, Value::Bottom) => true,
            (AbsValue::Itv(i), Value::Int(z)) => i.contains(z),
            (AbsValue::Const(c), Value::Int(z)) => match c {
                Flat::Top => true,
                Flat::Const(k) => k == z,
                Flat::Bot => false,
            },
            (AbsValue::Bools(b), Value::Bool(x)) => {
                if *x {
                    b.t
                } else {
                    b.f
                }
            }
            (AbsValue::Bvs(s), Value::BitVec { bits, .. }) => match s {
                BvSet::Top(_) => true,
                BvSet::Set(_, xs) => xs.contains(bits),
            },
            (AbsValue::Tuple(avs), Value::Tuple(vs)) => {
                avs.len() == vs.len() && avs.iter().zip(vs).all(|(a, v)| a.contains(v))
            }
            _ => false,
        }
    }

    /// Sound abstract counterpart of `eval_op`.
    pub fn transfer(op: &Op, args: &[AbsValue], flavor: IntFlavor) -> AbsValue {
        if let Op::Lit(l) = op {
            return match l {
                Literal::Bool(b) => AbsValue::Bools(BoolSet::of(*b)),
                Literal::Int(z) => AbsValue::int_const(z.clone(), flavor),
                Literal::BitVec { width, bits } => AbsValue::Bvs(BvSet::from_iter(*width, [*bits])),
            };
        }
        match op {
            Op::Mk => return AbsValue::Tuple(args.to_vec()),
            Op::Get(i) => {
                return match &args[0] {
                    AbsValue::Tuple(vs) if args[0].is_empty() => vs[*i].bottom_like(),
                    AbsValue::Tuple(vs) => vs[*i].clone(),
                    a => panic!("get on non-tuple abstract value {a}"),
                }
            }
            _ => {}
        }
        match op {
            Op::Add | Op::Sub | Op::Mul | Op::Div | Op::Neg => {
                let a = args[0].to_interval().expect("integer argument");
                let r = match op {
                    Op::Neg => a.neg(),
                    _ => {
                        let b = args[1].to_interval().expect("integer argument");
                        match op {
                            Op::Add => a.add(&b),
                            Op::Sub => a.sub(&b),
                            Op::Mul => a.mul(&b),
                            _ => a.div(&b),
                        }
                    }
                };
                args[0].same_flavor(r)
            }
            Op::Lt | Op::Le => {
                let a = args[0].to_interval().expect("integer argument");
                let b = args[1].to_interval().expect("integer argument");
                let (t, f) = if *op == Op::Lt { a.lt(&b) } else { a.le(&b) };
                AbsValue::Bools(BoolSet { t, f })
            }
            Op::Eq => {
                let (t, f) = eq_outcomes(&args[0], &args[1]);
                AbsValue::Bools(BoolSet { t, f })
            }
            Op::And | Op::Or | Op::Not => {
                let a = args[0].as_bools().expect("boolean argument");
                let b = if *op == Op::Not {
                    BoolSet::TRUE
                } else {
                    args[1].as_bools().expect("boolean argument")
                };
                let mut out = BoolSet::EMPTY;
                for x in a.values() {
                    for y in b.values() {
                        let r = match op {
                            Op::And => x && y,
                            Op::Or => x || y,
                            _ => !x,
                        };
                        if r {
                            out.t = true;
                        } else {
                            out.f = true;
                        }
                    }
                }
                AbsValue::Bools(out)
            }
            Op::Extract { hi, lo } => {
                let width = hi - lo + 1;
                match &args[0] {
                    AbsValue::Bvs(BvSet::Set(_, xs)) => AbsValue::Bvs(BvSet::from_iter(
                        width,
                        xs.iter().map(|b| (b >> lo) & mask(width)),
                    )),
                    AbsValue::Bvs(BvSet::Top(_)) => AbsValue::Bvs(BvSet::Top(width)),
                    a => panic!("extract on {a}"),
                }
            }
            Op::Concat => match (&args[0], &args[1]) {
                (AbsValue::Bvs(a), AbsValue::Bvs(b)) => {
                    let (wa, wb) = (a.width(), b.width());
                    let width = wa + wb;
                    match (a, b) {
                        (BvSet::Set(_, xs), BvSet::Set(_, ys))
                            if xs.len() * ys.len() <= BV_SET_CAP =>
                        {
                            AbsValue::Bvs(BvSet::from_iter(
                                width,
                                xs.iter().flat_map(|x| {
                                    ys.iter().map(move |y| ((x << wb) | y) & mask(width))
                                }),
                            ))
                        }
                        _ if args[0].is_empty() || args[1].is_empty() => {
                            AbsValue::Bvs(BvSet::Set(width, BTreeSet::new()))
                        }
                        _ => AbsValue::Bvs(BvSet::Top(width)),
                    }
                }
                _ => panic!("concat on non-bitvectors"),
            },
            _ => unreachable!(),
        }
        .strict(args)
    }

    /// The empty value of the same shape.
    pub fn bottom_like(&self) -> AbsValue {
        match self {
            AbsValue::Itv(_) => AbsValue::Itv(Interval::Empty),
            AbsValue::Const(_) => AbsValue::Const(Flat::Bot),
            AbsValue::Bools(_) => AbsValue::Bools(BoolSet::EMPTY),
            AbsValue::Bvs(s) => AbsValue::Bvs(BvSet::Set(s.width(), BTreeSet::new())),
            AbsValue::Tuple(vs) => AbsValue::Tuple(vs.iter().map(AbsValue::bottom_like).collect()),
        }
    }

    fn strict(self, args: &[AbsValue]) -> AbsValue {
        if args.iter().any(AbsValue::is_empty) {
            self.bottom_like()
        } else {
            self
        }
    }
}

pub(crate) fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// Possible outcomes of `a = b` as (can be true, can be false).
fn eq_outcomes(a: &AbsValue, b: &AbsValue) -> (bool, bool) {
    if a.is_empty() || b.is_empty() {
        return (false, false);
    }
    match (a, b) {
        (AbsValue::Tuple(xs), AbsValue::Tuple(ys)) => {
            let mut t = true;
            let mut f = false;
            for (x, y) in xs.iter().zip(ys) {
                let (ct, cf) = eq_outcomes(x, y);
                t &= ct;
                f |= cf;
            }
            (t, f)
        }
        (AbsValue::Bools(x), AbsValue::Bools(y)) => {
            let t = (x.t && y.t) || (x.f && y.f);
            let f = (x.t && y.f) || (x.f && y.t);
            (t, f)
        }
        (AbsValue::Bvs(x), AbsValue::Bvs(y)) => match (x, y) {
            (BvSet::Set(_, xs), BvSet::Set(_, ys)) => {
                let t = xs.intersection(ys).next().is_some();
                let f = !(xs.len() == 1 && xs == ys);
                (t, f)
            }
            _ => (true, true),
        },
        _ => {
            let x = a.to_interval().expect("integer argument");
            let y = b.to_interval().expect("integer argument");
            x.eq_outcomes(&y)
        }
    }
}

impl fmt::Display for BoolSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.t, self.f) {
            (true, true) => write!(f, "{{true;false}}"),
            (true, false) => write!(f, "{{true}}"),
            (false, true) => write!(f, "{{false}}"),
            (false, false) => write!(f, "∅"),
        }
    }
}

impl fmt::Display for AbsValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbsValue::Itv(i) => write!(f, "{i}"),
            AbsValue::Const(Flat::Bot) => write!(f, "∅"),
            AbsValue::Const(Flat::Const(z)) => write!(f, "{z}"),
            AbsValue::Const(Flat::Top) => write!(f, "⊤"),
            AbsValue::Bools(b) => write!(f, "{b}"),
            AbsValue::Bvs(BvSet::Top(w)) => write!(f, "⊤:bv{w}"),
            AbsValue::Bvs(BvSet::Set(w, s)) if s.is_empty() => write!(f, "∅:bv{w}"),
            AbsValue::Bvs(BvSet::Set(w, s)) => {
                let items: Vec<String> = s.iter().map(|b| b.to_string()).collect();
                write!(f, "{{{}}}:bv{w}", items.join(";"))
            }
            AbsValue::Tuple(vs) => {
                write!(f, "⟨")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "⟩")
            }
        }
    }
}

impl From<Interval> for AbsValue {
    fn from(i: Interval) -> Self {
        AbsValue::Itv(i)
    }
}

/// Convenience for tests and reports: `[lo;hi]` with `None` as infinity.
pub fn itv(lo: Option<i64>, hi: Option<i64>) -> AbsValue {
    AbsValue::Itv(Interval::new(
        lo.map(Bound::fin).unwrap_or(Bound::NegInf),
        hi.map(Bound::fin).unwrap_or(Bound::PosInf),
    ))
}
