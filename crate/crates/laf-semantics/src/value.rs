use std::fmt;

use laf_core::{Literal, Op};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

/// Concrete runtime value. `Bottom` is the dead value and inhabits every sort.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bottom,
    Bool(bool),
    Int(BigInt),
    BitVec { width: u32, bits: u64 },
    Tuple(Vec<Value>),
}

impl Value {
    pub fn int(i: i64) -> Value {
        Value::Int(BigInt::from(i))
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, Value::Bottom)
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Value::Int(i) => Some(i),
            _ => None,
        }
    }

    pub fn from_literal(l: &Literal) -> Value {
        match l {
            Literal::Bool(b) => Value::Bool(*b),
            Literal::Int(i) => Value::Int(i.clone()),
            Literal::BitVec { width, bits } => Value::BitVec {
                width: *width,
                bits: *bits,
            },
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bottom => write!(f, "⊥"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::BitVec { width, bits } => write!(f, "{bits}:bv{width}"),
            Value::Tuple(vs) => {
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

pub(crate) fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// Integer division truncating toward zero; `None` on a zero divisor.
pub fn div_trunc(a: &BigInt, b: &BigInt) -> Option<BigInt> {
    if b.is_zero() {
        return None;
    }
    let (q, _) = a.div_rem(b);
    Some(q)
}

/// Applies a theory operation. Any ⊥ argument gives ⊥, and so does division by zero.
/// Arguments are assumed well-sorted.
pub fn eval_op(op: &Op, args: &[Value]) -> Value {
    if args.iter().any(Value::is_bottom) {
        return Value::Bottom;
    }
    let int = |i: usize| match &args[i] {
        Value::Int(z) => z,
        v => panic!("expected an integer argument, got {v}"),
    };
    let boolean = |i: usize| match &args[i] {
        Value::Bool(b) => *b,
        v => panic!("expected a boolean argument, got {v}"),
    };
    match op {
        Op::Lit(l) => Value::from_literal(l),
        Op::Add => Value::Int(int(0) + int(1)),
        Op::Sub => Value::Int(int(0) - int(1)),
        Op::Mul => Value::Int(int(0) * int(1)),
        Op::Neg => Value::Int(-int(0)),
        Op::Div => match div_trunc(int(0), int(1)) {
            Some(q) => Value::Int(q),
            None => Value::Bottom,
        },
        Op::Lt => Value::Bool(int(0) < int(1)),
        Op::Le => Value::Bool(int(0) <= int(1)),
        Op::Eq => Value::Bool(args[0] == args[1]),
        Op::And => Value::Bool(boolean(0) && boolean(1)),
        Op::Or => Value::Bool(boolean(0) || boolean(1)),
        Op::Not => Value::Bool(!boolean(0)),
        Op::Mk => Value::Tuple(args.to_vec()),
        Op::Get(i) => match &args[0] {
            Value::Tuple(vs) => vs[*i].clone(),
            v => panic!("get on non-tuple {v}"),
        },
        Op::Extract { hi, lo } => match &args[0] {
            Value::BitVec { bits, .. } => {
                let width = hi - lo + 1;
                Value::BitVec {
                    width,
                    bits: (bits >> lo) & mask(width),
                }
            }
            v => panic!("extract on non-bitvector {v}"),
        },
        Op::Concat => match (&args[0], &args[1]) {
            (Value::BitVec { width: wa, bits: a }, Value::BitVec { width: wb, bits: b }) => {
                let width = wa + wb;
                let hi = if *wb >= 64 { 0 } else { a << wb };
                Value::BitVec {
                    width,
                    bits: (hi | b) & mask(width),
                }
            }
            _ => panic!("concat on non-bitvectors"),
        },
    }
}
