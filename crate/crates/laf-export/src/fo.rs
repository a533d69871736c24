//! First-order encoding of LAF terms. Each variable `x` gets a definedness
//! flag `c_x` and one value variable per scalar component of its sort.

use std::collections::BTreeSet;

use laf_core::{Context, Def, Op, Rhs, Sort, Term, Var, VarTable};
use laf_semantics::Value;

/// Solver-side sorts. Tuples are exploded into their scalar components.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SSort {
    Bool,
    Int,
    BitVec(u32),
}

impl SSort {
    pub fn to_laf(&self) -> Sort {
        match self {
            SSort::Bool => Sort::Bool,
            SSort::Int => Sort::Int,
            SSort::BitVec(w) => Sort::BitVec(*w),
        }
    }

    /// Value given to variables the formula leaves unconstrained.
    pub fn default_value(&self) -> Value {
        match self {
            SSort::Bool => Value::Bool(false),
            SSort::Int => Value::int(0),
            SSort::BitVec(w) => Value::BitVec { width: *w, bits: 0 },
        }
    }
}

/// Scalar components of a sort, depth first.
pub fn scalars(s: &Sort) -> Vec<SSort> {
    match s {
        Sort::Bool => vec![SSort::Bool],
        Sort::Int => vec![SSort::Int],
        Sort::BitVec(w) => vec![SSort::BitVec(*w)],
        Sort::Tuple(es) => es.iter().flat_map(scalars).collect(),
    }
}

/// Scalar components of a value of sort `s`; `None` for ⊥.
pub fn flatten(v: &Value) -> Option<Vec<Value>> {
    match v {
        Value::Bottom => None,
        Value::Tuple(vs) => {
            let mut out = Vec::new();
            for v in vs {
                out.extend(flatten(v)?);
            }
            Some(out)
        }
        v => Some(vec![v.clone()]),
    }
}

/// Inverse of [`flatten`].
pub fn unflatten(s: &Sort, comps: &[Value]) -> Value {
    fn go(s: &Sort, comps: &[Value], at: &mut usize) -> Value {
        match s {
            Sort::Tuple(es) => Value::Tuple(es.iter().map(|e| go(e, comps, at)).collect()),
            _ => {
                *at += 1;
                comps[*at - 1].clone()
            }
        }
    }
    go(s, comps, &mut 0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SVar(pub u32);

impl SVar {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SVarInfo {
    pub name: String,
    pub sort: SSort,
}

/// Formula over solver variables. Theory operations reuse the LAF
/// operators on scalars; division truncates toward zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Fx {
    Var(SVar),
    Lit(Value),
    Not(Box<Fx>),
    And(Vec<Fx>),
    Or(Vec<Fx>),
    Implies(Box<Fx>, Box<Fx>),
    Eq(Box<Fx>, Box<Fx>),
    App(Op, Vec<Fx>),
}

impl Fx {
    pub fn var(v: SVar) -> Fx {
        Fx::Var(v)
    }

    pub fn eq(a: Fx, b: Fx) -> Fx {
        Fx::Eq(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Fx, b: Fx) -> Fx {
        Fx::Implies(Box::new(a), Box::new(b))
    }

    pub fn not(a: Fx) -> Fx {
        Fx::Not(Box::new(a))
    }

    pub fn and(mut xs: Vec<Fx>) -> Fx {
        if xs.len() == 1 {
            xs.pop().unwrap()
        } else {
            Fx::And(xs)
        }
    }

    pub fn or(mut xs: Vec<Fx>) -> Fx {
        if xs.len() == 1 {
            xs.pop().unwrap()
        } else {
            Fx::Or(xs)
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<SVar>) {
        match self {
            Fx::Var(v) => {
                out.insert(*v);
            }
            Fx::Lit(_) => {}
            Fx::Not(a) => a.collect_vars(out),
            Fx::And(xs) | Fx::Or(xs) | Fx::App(_, xs) => {
                xs.iter().for_each(|x| x.collect_vars(out))
            }
            Fx::Implies(a, b) | Fx::Eq(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Evaluates under `asg`; `None` when a variable is unassigned.
    pub fn eval(&self, asg: &[Option<Value>]) -> Option<Value> {
        let truth = |x: &Fx| -> Option<bool> { x.eval(asg)?.as_bool() };
        Some(match self {
            Fx::Var(v) => asg.get(v.index())?.clone()?,
            Fx::Lit(l) => l.clone(),
            Fx::Not(a) => Value::Bool(!truth(a)?),
            Fx::And(xs) => {
                let mut all = true;
                for x in xs {
                    match truth(x) {
                        Some(false) => return Some(Value::Bool(false)),
                        Some(true) => {}
                        None => all = false,
                    }
                }
                if !all {
                    return None;
                }
                Value::Bool(true)
            }
            Fx::Or(xs) => {
                let mut any_unknown = false;
                for x in xs {
                    match truth(x) {
                        Some(true) => return Some(Value::Bool(true)),
                        Some(false) => {}
                        None => any_unknown = true,
                    }
                }
                if any_unknown {
                    return None;
                }
                Value::Bool(false)
            }
            Fx::Implies(a, b) => match truth(a)? {
                false => Value::Bool(true),
                true => Value::Bool(truth(b)?),
            },
            Fx::Eq(a, b) => Value::Bool(a.eval(asg)? == b.eval(asg)?),
            Fx::App(op, xs) => {
                let vals: Option<Vec<Value>> = xs.iter().map(|x| x.eval(asg)).collect();
                laf_semantics::eval_op(op, &vals?)
            }
        })
    }
}

/// Solver variables standing for a LAF variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pair {
    pub c: SVar,
    /// One per scalar component.
    pub v: Vec<SVar>,
}

impl Pair {
    pub fn all(&self) -> Vec<SVar> {
        let mut out = vec![self.c];
        out.extend(&self.v);
        out
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FoFormula {
    pub svars: Vec<SVarInfo>,
    pub conjuncts: Vec<Fx>,
    /// Pair of each translated LAF variable, by variable id.
    pub map: Vec<Option<Pair>>,
}

impl FoFormula {
    pub fn pair(&self, x: Var) -> Option<&Pair> {
        self.map.get(x.index())?.as_ref()
    }

    /// Whether every conjunct evaluates to true under a full assignment.
    pub fn holds(&self, asg: &[Option<Value>]) -> bool {
        self.conjuncts
            .iter()
            .all(|c| c.eval(asg) == Some(Value::Bool(true)))
    }

    /// Index of the first conjunct not true under `asg`.
    pub fn first_failure(&self, asg: &[Option<Value>]) -> Option<usize> {
        self.conjuncts
            .iter()
            .position(|c| c.eval(asg) != Some(Value::Bool(true)))
    }
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Allocation of solver variables and per-definition conjuncts, shared by
/// the first-order and Horn encodings.
pub(crate) struct Enc<'a> {
    pub vars: &'a VarTable,
    pub svars: Vec<SVarInfo>,
    pub map: Vec<Option<Pair>>,
}

impl<'a> Enc<'a> {
    pub fn new(vars: &'a VarTable) -> Self {
        Enc {
            vars,
            svars: Vec::new(),
            map: vec![None; vars.len()],
        }
    }

    fn fresh(&mut self, name: String, sort: SSort) -> SVar {
        self.svars.push(SVarInfo { name, sort });
        SVar(self.svars.len() as u32 - 1)
    }

    pub fn pair(&mut self, x: Var) -> Pair {
        if let Some(p) = &self.map[x.index()] {
            return p.clone();
        }
        let base = format!("{}_{}", sanitize(self.vars.name(x)), x.index());
        let c = self.fresh(format!("c_{base}"), SSort::Bool);
        let comps = scalars(self.vars.sort(x));
        let v = if matches!(self.vars.sort(x), Sort::Tuple(_)) {
            comps
                .into_iter()
                .enumerate()
                .map(|(i, s)| self.fresh(format!("v_{base}_{i}"), s))
                .collect()
        } else {
            comps
                .into_iter()
                .map(|s| self.fresh(format!("v_{base}"), s))
                .collect()
        };
        let p = Pair { c, v };
        self.map[x.index()] = Some(p.clone());
        p
    }

    fn get(&self, x: Var) -> &Pair {
        self.map[x.index()]
            .as_ref()
            .expect("argument translated before use")
    }

    fn vals(&self, x: Var) -> Vec<Fx> {
        self.get(x).v.iter().map(|v| Fx::var(*v)).collect()
    }

    fn same(a: &[SVar], b: &[Fx]) -> Vec<Fx> {
        a.iter()
            .zip(b)
            .map(|(x, y)| Fx::eq(Fx::var(*x), y.clone()))
            .collect()
    }

    /// Conjuncts for a definition other than a loop.
    pub fn def(&mut self, def: &Def, out: &mut Vec<Fx>) {
        let x = self.pair(def.var);
        let c = Fx::var(x.c);
        match &def.rhs {
            Rhs::Op(op, args) => {
                let mut cs: Vec<Fx> = args.iter().map(|a| Fx::var(self.get(*a).c)).collect();
                let argv: Vec<Vec<Fx>> = args.iter().map(|a| self.vals(*a)).collect();
                match op {
                    Op::Mk => {
                        let all: Vec<Fx> = argv.concat();
                        out.push(Fx::eq(c, Fx::And(cs)));
                        out.extend(Self::same(&x.v, &all));
                    }
                    Op::Get(i) => {
                        let Sort::Tuple(es) = self.vars.sort(args[0]) else {
                            unreachable!("get on a tuple")
                        };
                        let start: usize = es[..*i].iter().map(|e| scalars(e).len()).sum();
                        let slice = &argv[0][start..start + x.v.len()];
                        out.push(Fx::eq(c, Fx::And(cs)));
                        out.extend(Self::same(&x.v, slice));
                    }
                    Op::Eq if argv[0].len() != 1 => {
                        let comps: Vec<Fx> = argv[0]
                            .iter()
                            .zip(&argv[1])
                            .map(|(a, b)| Fx::eq(a.clone(), b.clone()))
                            .collect();
                        out.push(Fx::eq(c, Fx::And(cs)));
                        out.push(Fx::eq(Fx::var(x.v[0]), Fx::And(comps)));
                    }
                    Op::Div => {
                        // Division by zero is ⊥; its value is then unconstrained.
                        let zero = Fx::Lit(Value::int(0));
                        cs.push(Fx::not(Fx::eq(argv[1][0].clone(), zero)));
                        out.push(Fx::eq(c.clone(), Fx::And(cs)));
                        let q = Fx::App(Op::Div, vec![argv[0][0].clone(), argv[1][0].clone()]);
                        out.push(Fx::implies(c, Fx::eq(Fx::var(x.v[0]), q)));
                    }
                    _ => {
                        let scalars: Vec<Fx> = argv.into_iter().map(|mut v| v.remove(0)).collect();
                        out.push(Fx::eq(c, Fx::And(cs)));
                        out.push(Fx::eq(Fx::var(x.v[0]), Fx::App(op.clone(), scalars)));
                    }
                }
            }
            Rhs::Unknown => out.push(c),
            Rhs::Assume(cond, val) => {
                let pc = self.get(*cond);
                let cs = vec![Fx::var(pc.c), Fx::var(self.get(*val).c), Fx::var(pc.v[0])];
                let vv = self.vals(*val);
                out.push(Fx::eq(c, Fx::And(cs)));
                out.extend(Self::same(&x.v, &vv));
            }
            Rhs::Nondet(a, b) => {
                let alt = |e: &Self, y: Var| {
                    let mut conj = vec![Fx::var(e.get(y).c)];
                    conj.extend(Self::same(&x.v, &e.vals(y)));
                    Fx::and(conj)
                };
                let (ca, cb) = (Fx::var(self.get(*a).c), Fx::var(self.get(*b).c));
                // Either side may be chosen, so ⊥ is possible once one side is ⊥.
                out.push(Fx::implies(
                    c.clone(),
                    Fx::Or(vec![alt(self, *a), alt(self, *b)]),
                ));
                out.push(Fx::implies(
                    Fx::not(c),
                    Fx::Or(vec![Fx::not(ca), Fx::not(cb)]),
                ));
            }
            Rhs::Mu(_) => unreachable!("loops are encoded by the caller"),
        }
    }
}

/// Translates a closed term. Loops are over-approximated: their flag and
/// value are left unconstrained.
pub fn to_fo(term: &Term) -> FoFormula {
    let mut e = Enc::new(&term.vars);
    let mut out = Vec::new();
    fo_ctx(&mut e, &term.ctx, &mut out);
    FoFormula {
        svars: e.svars,
        conjuncts: out,
        map: e.map,
    }
}

fn fo_ctx(e: &mut Enc, ctx: &Context, out: &mut Vec<Fx>) {
    for def in &ctx.defs {
        match &def.rhs {
            Rhs::Mu(_) => {
                e.pair(def.var);
            }
            _ => e.def(def, out),
        }
    }
}
