use std::fmt;

use num_bigint::BigInt;

/// Sort of a LAF variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Bool,
    Int,
    BitVec(u32),
    Tuple(Vec<Sort>),
}

impl Sort {
    pub fn is_tuple(&self) -> bool {
        matches!(self, Sort::Tuple(_))
    }

    /// Number of scalar leaves (a scalar sort counts as one).
    pub fn scalar_count(&self) -> usize {
        match self {
            Sort::Tuple(elems) => elems.iter().map(Sort::scalar_count).sum(),
            _ => 1,
        }
    }

    pub fn bv_width(&self) -> Option<u32> {
        match self {
            Sort::BitVec(w) => Some(*w),
            _ => None,
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => write!(f, "bool"),
            Sort::Int => write!(f, "int"),
            Sort::BitVec(w) => write!(f, "(bv {w})"),
            Sort::Tuple(elems) => {
                write!(f, "(tuple")?;
                for s in elems {
                    write!(f, " {s}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarInfo {
    pub name: String,
    pub sort: Sort,
}

/// Side table holding display names and sorts, indexed by variable id.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VarTable {
    infos: Vec<VarInfo>,
}

impl VarTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh(&mut self, name: impl Into<String>, sort: Sort) -> Var {
        let v = Var(self.infos.len() as u32);
        self.infos.push(VarInfo {
            name: name.into(),
            sort,
        });
        v
    }

    pub fn len(&self) -> usize {
        self.infos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.infos.is_empty()
    }

    pub fn get(&self, v: Var) -> Option<&VarInfo> {
        self.infos.get(v.index())
    }

    pub fn name(&self, v: Var) -> &str {
        &self.infos[v.index()].name
    }

    pub fn sort(&self, v: Var) -> &Sort {
        &self.infos[v.index()].sort
    }

    pub fn rename(&mut self, v: Var, name: impl Into<String>) {
        self.infos[v.index()].name = name.into();
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, &VarInfo)> {
        self.infos
            .iter()
            .enumerate()
            .map(|(i, info)| (Var(i as u32), info))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    Bool(bool),
    Int(BigInt),
    BitVec { width: u32, bits: u64 },
}

impl Literal {
    pub fn sort(&self) -> Sort {
        match self {
            Literal::Bool(_) => Sort::Bool,
            Literal::Int(_) => Sort::Int,
            Literal::BitVec { width, .. } => Sort::BitVec(*width),
        }
    }

    pub fn int(i: i64) -> Self {
        Literal::Int(BigInt::from(i))
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Bool(b) => write!(f, "{b}"),
            Literal::Int(i) => write!(f, "{i}"),
            Literal::BitVec { bits, .. } => write!(f, "{bits}"),
        }
    }
}

/// Theory operations. Literals are nullary operations.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Lit(Literal),
    Add,
    Sub,
    Neg,
    Mul,
    Div,
    Lt,
    Le,
    Eq,
    And,
    Or,
    Not,
    Mk,
    Get(usize),
    Extract { hi: u32, lo: u32 },
    Concat,
}

impl Op {
    /// Operator name as written in the text format.
    pub fn name(&self) -> String {
        match self {
            Op::Lit(l) => l.to_string(),
            Op::Add => "add".into(),
            Op::Sub => "sub".into(),
            Op::Neg => "neg".into(),
            Op::Mul => "mul".into(),
            Op::Div => "div".into(),
            Op::Lt => "lt".into(),
            Op::Le => "le".into(),
            Op::Eq => "eq".into(),
            Op::And => "and".into(),
            Op::Or => "or".into(),
            Op::Not => "not".into(),
            Op::Mk => "mk".into(),
            Op::Get(i) => format!("get.{i}"),
            Op::Extract { hi, lo } => format!("extract.{hi}.{lo}"),
            Op::Concat => "concat".into(),
        }
    }

    /// Parses an operator name (literals excluded).
    pub fn from_name(s: &str) -> Option<Op> {
        Some(match s {
            "add" => Op::Add,
            "sub" => Op::Sub,
            "neg" => Op::Neg,
            "mul" => Op::Mul,
            "div" => Op::Div,
            "lt" => Op::Lt,
            "le" => Op::Le,
            "eq" => Op::Eq,
            "and" => Op::And,
            "or" => Op::Or,
            "not" => Op::Not,
            "mk" => Op::Mk,
            "concat" => Op::Concat,
            _ => {
                if let Some(i) = s.strip_prefix("get.") {
                    return i.parse().ok().map(Op::Get);
                }
                if let Some(rest) = s.strip_prefix("extract.") {
                    let (hi, lo) = rest.split_once('.')?;
                    return Some(Op::Extract {
                        hi: hi.parse().ok()?,
                        lo: lo.parse().ok()?,
                    });
                }
                return None;
            }
        })
    }

    pub fn is_lit(&self) -> bool {
        matches!(self, Op::Lit(_))
    }

    /// Result sort for the given argument sorts, or a message describing the
    /// signature violation.
    pub fn result_sort(&self, args: &[Sort]) -> Result<Sort, String> {
        let want = |n: usize| -> Result<(), String> {
            if args.len() == n {
                Ok(())
            } else {
                Err(format!(
                    "{} expects {} arguments, got {}",
                    self.name(),
                    n,
                    args.len()
                ))
            }
        };
        let all = |s: &Sort| -> Result<(), String> {
            if args.iter().all(|a| a == s) {
                Ok(())
            } else {
                Err(format!("{} expects {} arguments", self.name(), s))
            }
        };
        match self {
            Op::Lit(l) => {
                want(0)?;
                if let Literal::BitVec { width, bits } = l {
                    if *width == 0 || *width > 64 {
                        return Err(format!("bitvector width {width} out of range"));
                    }
                    if *width < 64 && *bits >> *width != 0 {
                        return Err(format!("literal {bits} does not fit in {width} bits"));
                    }
                }
                Ok(l.sort())
            }
            Op::Add | Op::Sub | Op::Mul | Op::Div => {
                want(2)?;
                all(&Sort::Int)?;
                Ok(Sort::Int)
            }
            Op::Neg => {
                want(1)?;
                all(&Sort::Int)?;
                Ok(Sort::Int)
            }
            Op::Lt | Op::Le => {
                want(2)?;
                all(&Sort::Int)?;
                Ok(Sort::Bool)
            }
            Op::Eq => {
                want(2)?;
                if args[0] != args[1] {
                    return Err("eq arguments must share a sort".into());
                }
                Ok(Sort::Bool)
            }
            Op::And | Op::Or => {
                want(2)?;
                all(&Sort::Bool)?;
                Ok(Sort::Bool)
            }
            Op::Not => {
                want(1)?;
                all(&Sort::Bool)?;
                Ok(Sort::Bool)
            }
            Op::Mk => {
                if args.is_empty() {
                    return Err("mk expects at least one argument".into());
                }
                Ok(Sort::Tuple(args.to_vec()))
            }
            Op::Get(i) => {
                want(1)?;
                match &args[0] {
                    Sort::Tuple(elems) if *i < elems.len() => Ok(elems[*i].clone()),
                    Sort::Tuple(_) => Err(format!("get.{i} out of range")),
                    _ => Err("get expects a tuple".into()),
                }
            }
            Op::Extract { hi, lo } => {
                want(1)?;
                match args[0] {
                    Sort::BitVec(w) if lo <= hi && *hi < w => Ok(Sort::BitVec(hi - lo + 1)),
                    Sort::BitVec(w) => Err(format!("extract.{hi}.{lo} invalid for width {w}")),
                    _ => Err("extract expects a bitvector".into()),
                }
            }
            Op::Concat => {
                want(2)?;
                match (&args[0], &args[1]) {
                    (Sort::BitVec(a), Sort::BitVec(b)) if a + b <= 64 => Ok(Sort::BitVec(a + b)),
                    (Sort::BitVec(_), Sort::BitVec(_)) => Err("concat wider than 64 bits".into()),
                    _ => Err("concat expects bitvectors".into()),
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mu {
    pub loopvar: Var,
    pub body: Context,
    pub exit: Var,
    pub init: Var,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rhs {
    Op(Op, Vec<Var>),
    Nondet(Var, Var),
    Assume(Var, Var),
    Unknown,
    Mu(Box<Mu>),
}

impl Rhs {
    /// Variables read by this right-hand side (the body of a loop excluded).
    pub fn args(&self) -> Vec<Var> {
        match self {
            Rhs::Op(_, args) => args.clone(),
            Rhs::Nondet(a, b) | Rhs::Assume(a, b) => vec![*a, *b],
            Rhs::Unknown => vec![],
            Rhs::Mu(mu) => vec![mu.init],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Def {
    pub var: Var,
    pub rhs: Rhs,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Context {
    pub defs: Vec<Def>,
}

impl Context {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    /// Visits every definition, loop bodies included, in definition order.
    /// A loop's own definition is visited before its body.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Def)) {
        for d in &self.defs {
            f(d);
            if let Rhs::Mu(mu) = &d.rhs {
                mu.body.walk(f);
            }
        }
    }

    /// Total number of definitions, loop bodies included.
    pub fn deep_len(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }

    /// Variables bound in this context (loop variables and bodies included).
    pub fn bound_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.walk(&mut |d| {
            out.push(d.var);
            if let Rhs::Mu(mu) = &d.rhs {
                out.push(mu.loopvar);
            }
        });
        out
    }
}

/// A closed term `C[x]` together with its variable table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub vars: VarTable,
    pub ctx: Context,
    pub result: Var,
}

/// Where a variable gets its value.
#[derive(Clone, Copy, Debug)]
pub enum Binding<'a> {
    Def(&'a Def),
    LoopVar(&'a Def),
}

impl Term {
    pub fn sort_of(&self, v: Var) -> Option<&Sort> {
        self.vars.get(v).map(|i| &i.sort)
    }

    pub fn name(&self, v: Var) -> &str {
        self.vars.name(v)
    }

    /// Index from variable id to the binding that introduces it.
    pub fn bindings(&self) -> Vec<Option<Binding<'_>>> {
        let mut out = vec![None; self.vars.len()];
        self.ctx.walk(&mut |d| {
            out[d.var.index()] = Some(Binding::Def(d));
            if let Rhs::Mu(mu) = &d.rhs {
                out[mu.loopvar.index()] = Some(Binding::LoopVar(d));
            }
        });
        out
    }

    /// First variable bound in the term with the given display name.
    pub fn var_named(&self, name: &str) -> Option<Var> {
        let mut found = None;
        let bound: std::collections::HashSet<Var> = self.ctx.bound_vars().into_iter().collect();
        for (v, info) in self.vars.iter() {
            if info.name == name && bound.contains(&v) {
                found = Some(v);
                break;
            }
        }
        found
    }

    /// Top-level definition of a variable, if it is bound at the top level.
    pub fn top_def(&self, v: Var) -> Option<&Def> {
        self.ctx.defs.iter().find(|d| d.var == v)
    }
}
