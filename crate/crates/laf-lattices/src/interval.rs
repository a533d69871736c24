use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

/// Interval endpoint. Variant order gives `NegInf < Fin(_) < PosInf`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bound {
    NegInf,
    Fin(BigInt),
    PosInf,
}

impl Bound {
    pub fn fin(i: i64) -> Bound {
        Bound::Fin(BigInt::from(i))
    }

    fn sign(&self) -> Ordering {
        match self {
            Bound::NegInf => Ordering::Less,
            Bound::PosInf => Ordering::Greater,
            Bound::Fin(z) => z.cmp(&BigInt::zero()),
        }
    }

    fn neg(&self) -> Bound {
        match self {
            Bound::NegInf => Bound::PosInf,
            Bound::PosInf => Bound::NegInf,
            Bound::Fin(z) => Bound::Fin(-z),
        }
    }

    /// Sum of two bounds on the same side; mixed infinities do not occur for
    /// normalized intervals.
    fn add(&self, o: &Bound) -> Bound {
        match (self, o) {
            (Bound::Fin(a), Bound::Fin(b)) => Bound::Fin(a + b),
            (Bound::NegInf, _) | (_, Bound::NegInf) => Bound::NegInf,
            _ => Bound::PosInf,
        }
    }

    /// Product with `0 · ∞ = 0`.
    fn mul(&self, o: &Bound) -> Bound {
        match (self, o) {
            (Bound::Fin(a), Bound::Fin(b)) => Bound::Fin(a * b),
            _ if self.sign() == Ordering::Equal || o.sign() == Ordering::Equal => {
                Bound::Fin(BigInt::zero())
            }
            _ if self.sign() == o.sign() => Bound::PosInf,
            _ => Bound::NegInf,
        }
    }

    /// Truncating division by a nonzero bound; `x / ±∞ = 0` and `∞ / ∞ = 0`.
    fn div(&self, d: &Bound) -> Bound {
        match (self, d) {
            (Bound::Fin(a), Bound::Fin(b)) => Bound::Fin(trunc_div(a, b)),
            (Bound::Fin(_), _) => Bound::Fin(BigInt::zero()),
            (_, Bound::Fin(_)) => {
                if self.sign() == d.sign() {
                    Bound::PosInf
                } else {
                    Bound::NegInf
                }
            }
            _ => Bound::Fin(BigInt::zero()),
        }
    }

    fn offset(&self, k: i64) -> Bound {
        match self {
            Bound::Fin(z) => Bound::Fin(z + k),
            b => b.clone(),
        }
    }
}

fn trunc_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_rem(b).0
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::NegInf => write!(f, "-∞"),
            Bound::PosInf => write!(f, "+∞"),
            Bound::Fin(z) => write!(f, "{z}"),
        }
    }
}

/// Integer interval. A nonempty interval has `lo ≤ hi`, `lo ≠ +∞`, `hi ≠ -∞`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Interval {
    Empty,
    Range { lo: Bound, hi: Bound },
}

impl Interval {
    pub fn new(lo: Bound, hi: Bound) -> Interval {
        if lo > hi || lo == Bound::PosInf || hi == Bound::NegInf {
            Interval::Empty
        } else {
            Interval::Range { lo, hi }
        }
    }

    pub fn of(lo: i64, hi: i64) -> Interval {
        Interval::new(Bound::fin(lo), Bound::fin(hi))
    }

    pub fn singleton(z: BigInt) -> Interval {
        Interval::new(Bound::Fin(z.clone()), Bound::Fin(z))
    }

    pub fn top() -> Interval {
        Interval::Range {
            lo: Bound::NegInf,
            hi: Bound::PosInf,
        }
    }

    pub fn at_least(lo: i64) -> Interval {
        Interval::new(Bound::fin(lo), Bound::PosInf)
    }

    pub fn at_most(hi: i64) -> Interval {
        Interval::new(Bound::NegInf, Bound::fin(hi))
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Interval::Empty)
    }

    pub fn bounds(&self) -> Option<(&Bound, &Bound)> {
        match self {
            Interval::Empty => None,
            Interval::Range { lo, hi } => Some((lo, hi)),
        }
    }

    pub fn as_singleton(&self) -> Option<&BigInt> {
        match self {
            Interval::Range {
                lo: Bound::Fin(a),
                hi: Bound::Fin(b),
            } if a == b => Some(a),
            _ => None,
        }
    }

    pub fn contains(&self, z: &BigInt) -> bool {
        match self {
            Interval::Empty => false,
            Interval::Range { lo, hi } => {
                let b = Bound::Fin(z.clone());
                *lo <= b && b <= *hi
            }
        }
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&BigInt::zero())
    }

    pub fn leq(&self, o: &Interval) -> bool {
        match (self, o) {
            (Interval::Empty, _) => true,
            (_, Interval::Empty) => false,
            (Interval::Range { lo: a, hi: b }, Interval::Range { lo: c, hi: d }) => {
                c <= a && b <= d
            }
        }
    }

    pub fn join(&self, o: &Interval) -> Interval {
        match (self, o) {
            (Interval::Empty, x) | (x, Interval::Empty) => x.clone(),
            (Interval::Range { lo: a, hi: b }, Interval::Range { lo: c, hi: d }) => {
                Interval::new(a.min(c).clone(), b.max(d).clone())
            }
        }
    }

    pub fn meet(&self, o: &Interval) -> Interval {
        match (self, o) {
            (Interval::Empty, _) | (_, Interval::Empty) => Interval::Empty,
            (Interval::Range { lo: a, hi: b }, Interval::Range { lo: c, hi: d }) => {
                Interval::new(a.max(c).clone(), b.min(d).clone())
            }
        }
    }

    /// Standard widening; unstable bounds jump to the nearest threshold
    /// beyond them, or to infinity.
    pub fn widen(&self, o: &Interval, thresholds: &[i64]) -> Interval {
        match (self, o) {
            (Interval::Empty, x) => x.clone(),
            (x, Interval::Empty) => x.clone(),
            (Interval::Range { lo: a, hi: b }, Interval::Range { lo: c, hi: d }) => {
                let lo = if c < a {
                    thresholds
                        .iter()
                        .map(|t| Bound::fin(*t))
                        .filter(|t| t <= c)
                        .max()
                        .unwrap_or(Bound::NegInf)
                } else {
                    a.clone()
                };
                let hi = if d > b {
                    thresholds
                        .iter()
                        .map(|t| Bound::fin(*t))
                        .filter(|t| t >= d)
                        .min()
                        .unwrap_or(Bound::PosInf)
                } else {
                    b.clone()
                };
                Interval::new(lo, hi)
            }
        }
    }

    pub fn add(&self, o: &Interval) -> Interval {
        match (self.bounds(), o.bounds()) {
            (Some((a, b)), Some((c, d))) => Interval::new(a.add(c), b.add(d)),
            _ => Interval::Empty,
        }
    }

    pub fn neg(&self) -> Interval {
        match self.bounds() {
            Some((a, b)) => Interval::new(b.neg(), a.neg()),
            None => Interval::Empty,
        }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        match (self.bounds(), o.bounds()) {
            (Some((a, b)), Some((c, d))) => {
                let ps = [a.mul(c), a.mul(d), b.mul(c), b.mul(d)];
                let lo = ps.iter().min().unwrap().clone();
                let hi = ps.iter().max().unwrap().clone();
                Interval::new(lo, hi)
            }
            _ => Interval::Empty,
        }
    }

    /// Negative and positive parts of the interval (zero removed).
    pub fn split_nonzero(&self) -> (Interval, Interval) {
        (
            self.meet(&Interval::at_most(-1)),
            self.meet(&Interval::at_least(1)),
        )
    }

    /// The interval without zero, when zero is one of its endpoints.
    pub fn shave_zero(&self) -> Interval {
        self.shave(&BigInt::zero())
    }

    /// Removes `z` when it is an endpoint.
    pub fn shave(&self, z: &BigInt) -> Interval {
        match self {
            Interval::Range { lo, hi } => {
                let zb = Bound::Fin(z.clone());
                let lo2 = if *lo == zb { lo.offset(1) } else { lo.clone() };
                let hi2 = if *hi == zb { hi.offset(-1) } else { hi.clone() };
                Interval::new(lo2, hi2)
            }
            Interval::Empty => Interval::Empty,
        }
    }

    /// Truncating division; zero divisors contribute nothing (they yield ⊥).
    pub fn div(&self, o: &Interval) -> Interval {
        let (a, b) = match self.bounds() {
            Some(x) => x,
            None => return Interval::Empty,
        };
        let (neg, pos) = o.split_nonzero();
        let mut out = Interval::Empty;
        for part in [neg, pos] {
            if let Some((c, d)) = part.bounds() {
                let qs = [a.div(c), a.div(d), b.div(c), b.div(d)];
                let lo = qs.iter().min().unwrap().clone();
                let hi = qs.iter().max().unwrap().clone();
                out = out.join(&Interval::new(lo, hi));
            }
        }
        out
    }

    /// Possible outcomes of `self < o` as (can be true, can be false).
    pub fn lt(&self, o: &Interval) -> (bool, bool) {
        match (self.bounds(), o.bounds()) {
            (Some((a, b)), Some((c, d))) => (a < d, b >= c),
            _ => (false, false),
        }
    }

    pub fn le(&self, o: &Interval) -> (bool, bool) {
        match (self.bounds(), o.bounds()) {
            (Some((a, b)), Some((c, d))) => (a <= d, b > c),
            _ => (false, false),
        }
    }

    pub fn eq_outcomes(&self, o: &Interval) -> (bool, bool) {
        if self.is_empty() || o.is_empty() {
            return (false, false);
        }
        let t = !self.meet(o).is_empty();
        let f = !(self.as_singleton().is_some() && self.as_singleton() == o.as_singleton());
        (t, f)
    }

    /// Integers `x` with `x * k ∈ self`, for a nonzero constant `k`.
    pub fn exact_div_by(&self, k: &BigInt) -> Interval {
        let (lo, hi) = match self.bounds() {
            Some(x) => x,
            None => return Interval::Empty,
        };
        let (lo, hi) = if k.is_negative() {
            (hi.neg(), lo.neg())
        } else {
            (lo.clone(), hi.clone())
        };
        let k = k.abs();
        let lo = match lo {
            Bound::Fin(z) => Bound::Fin(z.div_ceil(&k)),
            b => b,
        };
        let hi = match hi {
            Bound::Fin(z) => Bound::Fin(z.div_floor(&k)),
            b => b,
        };
        Interval::new(lo, hi)
    }

    /// Largest absolute value, or `None` when unbounded.
    pub fn max_abs(&self) -> Option<BigInt> {
        match self.bounds()? {
            (Bound::Fin(a), Bound::Fin(b)) => Some(a.abs().max(b.abs())),
            _ => None,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Interval::Empty => write!(f, "∅"),
            Interval::Range { lo, hi } => write!(f, "[{lo};{hi}]"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn join_of_halves() {
        assert_eq!(
            Interval::of(-8, -1).join(&Interval::of(0, 8)),
            Interval::of(-8, 8)
        );
    }

    #[test]
    fn widen_jumps() {
        assert_eq!(
            Interval::of(0, 1).widen(&Interval::of(0, 2), &[]),
            Interval::at_least(0)
        );
        assert_eq!(
            Interval::of(0, 1).widen(&Interval::of(0, 2), &[-1, 0, 1, 8]),
            Interval::of(0, 8)
        );
        assert_eq!(
            Interval::of(0, 1).widen(&Interval::of(-3, 1), &[-1, 0, 1, 8]),
            Interval::at_most(1)
        );
    }

    #[test]
    fn division_examples() {
        assert_eq!(
            Interval::of(-8, 8).div(&Interval::of(9, 9)),
            Interval::of(0, 0)
        );
        assert_eq!(
            Interval::of(5, 5).div(&Interval::at_least(1)),
            Interval::of(0, 5)
        );
        assert_eq!(Interval::of(1, 1).div(&Interval::of(0, 0)), Interval::Empty);
        assert_eq!(
            Interval::of(-7, 7).div(&Interval::of(-2, 2)),
            Interval::of(-7, 7)
        );
    }

    #[test]
    fn comparisons() {
        assert_eq!(Interval::at_most(-1).lt(&Interval::of(0, 0)), (true, false));
        assert_eq!(Interval::of(0, 3).le(&Interval::of(3, 9)), (true, false));
    }

    #[test]
    fn mul_with_infinity() {
        assert_eq!(Interval::of(0, 0).mul(&Interval::top()), Interval::of(0, 0));
        assert_eq!(
            Interval::of(-1, 2).mul(&Interval::at_least(1)),
            Interval::top()
        );
    }
}
