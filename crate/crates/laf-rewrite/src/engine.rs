//! Dynamic translation of an input term into a rewritten output term.

use std::cell::{OnceCell, RefCell};
use std::collections::{HashMap, HashSet};

use laf_core::{literal_as_i64, Context, Def, Literal, Mu, Op, Rhs, Sort, Term, Var, VarTable};
use laf_semantics::{BudgetError, Env, Value};
use num_bigint::BigInt;

use crate::rule::{Guard, Head, Param, Pattern, RewriteRule};

/// Bound on chained rewrites triggered by one definition.
const MAX_REWRITE_CHAIN: usize = 32;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Key {
    Op(Op, Vec<Var>),
    Assume(Var, Var),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeHead {
    Op(Op),
    Nondet,
    Assume,
}

/// Right-hand side produced by a rule: an existing variable or a tree of
/// fresh definitions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Inst {
    Var(Var),
    Node(NodeHead, Vec<Inst>),
}

type Projection = HashSet<Vec<Option<Value>>>;

/// Abstract state: the output context and the image of each input variable.
#[derive(Clone, Debug, Default)]
pub struct RewriteState {
    pub vars: VarTable,
    pub out: Context,
    /// Input variable id → output variable.
    pub map: Vec<Option<Var>>,
    rhs: Vec<Option<Rhs>>,
    maybe_bot: Vec<bool>,
    cache: HashMap<Key, Var>,
    pub(crate) oracle: OnceCell<Result<Vec<Env>, BudgetError>>,
    /// Oracle environments projected on a set of output variables.
    pub(crate) images: RefCell<HashMap<Vec<Var>, Projection>>,
}

impl RewriteState {
    pub fn new(input_vars: usize) -> Self {
        RewriteState {
            map: vec![None; input_vars],
            ..Default::default()
        }
    }

    pub fn image(&self, v: Var) -> Option<Var> {
        self.map.get(v.index()).copied().flatten()
    }

    /// Definition of an output variable (loop variables have none).
    pub fn def_of(&self, v: Var) -> Option<&Rhs> {
        self.rhs.get(v.index()).and_then(Option::as_ref)
    }

    /// Literal the output variable is defined as, if any.
    pub fn literal_of(&self, v: Var) -> Option<&Literal> {
        match self.def_of(v) {
            Some(Rhs::Op(Op::Lit(l), _)) => Some(l),
            _ => None,
        }
    }

    /// Whether the output variable may evaluate to ⊥.
    pub fn may_be_bottom(&self, v: Var) -> bool {
        self.maybe_bot.get(v.index()).copied().unwrap_or(true)
    }

    /// The output context as a closed term returning the image of `result`.
    pub fn to_term(&self, result: Var) -> Option<Term> {
        Some(Term {
            vars: self.vars.clone(),
            ctx: self.out.clone(),
            result: self.image(result)?,
        })
    }

    /// Number of output definitions, loop bodies included.
    pub fn size(&self) -> usize {
        self.out.deep_len()
    }
}

#[derive(Default)]
struct Binding {
    terms: HashMap<String, Var>,
    ints: HashMap<String, i64>,
}

pub(crate) struct Translator<'a> {
    pub st: RewriteState,
    rules: &'a [RewriteRule],
    /// Open loop bodies; the top-level context is `st.out`.
    frames: Vec<(Context, Vec<Key>)>,
    pub split_nondet: bool,
}

impl<'a> Translator<'a> {
    pub fn new(mut st: RewriteState, rules: &'a [RewriteRule], input_vars: usize) -> Self {
        if st.map.len() < input_vars {
            st.map.resize(input_vars, None);
        }
        st.oracle = OnceCell::new();
        st.images = RefCell::default();
        Translator {
            st,
            rules,
            frames: Vec::new(),
            split_nondet: true,
        }
    }

    fn fresh(&mut self, name: &str, sort: Sort, rhs: Option<Rhs>, maybe_bot: bool) -> Var {
        let v = self.st.vars.fresh(name, sort);
        self.st.rhs.push(rhs);
        self.st.maybe_bot.push(maybe_bot);
        v
    }

    fn push_def(&mut self, def: Def) {
        match self.frames.last_mut() {
            Some((ctx, _)) => ctx.defs.push(def),
            None => self.st.out.defs.push(def),
        }
    }

    fn remember(&mut self, key: Key, v: Var) {
        if let Some((_, keys)) = self.frames.last_mut() {
            keys.push(key.clone());
        }
        self.st.cache.insert(key, v);
    }

    pub fn translate(&mut self, input: &VarTable, ctx: &Context) {
        for def in &ctx.defs {
            self.translate_def(input, def);
        }
    }

    fn m(&self, v: Var) -> Var {
        self.st.map[v.index()].expect("input variable translated before use")
    }

    fn translate_def(&mut self, input: &VarTable, def: &Def) {
        let name = input.name(def.var).to_string();
        let out = match &def.rhs {
            Rhs::Op(op, args) => {
                let args = args.iter().map(|a| self.m(*a)).collect();
                self.emit(&name, NodeHead::Op(op.clone()), args, 0)
            }
            Rhs::Nondet(a, b) => {
                let args = vec![self.m(*a), self.m(*b)];
                self.emit(&name, NodeHead::Nondet, args, 0)
            }
            Rhs::Assume(c, v) => {
                let args = vec![self.m(*c), self.m(*v)];
                self.emit(&name, NodeHead::Assume, args, 0)
            }
            Rhs::Unknown => {
                let v = self.fresh(
                    &name,
                    input.sort(def.var).clone(),
                    Some(Rhs::Unknown),
                    false,
                );
                self.push_def(Def {
                    var: v,
                    rhs: Rhs::Unknown,
                });
                v
            }
            Rhs::Mu(mu) => {
                let sort = input.sort(def.var).clone();
                let x = self.fresh(&name, sort.clone(), None, true);
                let s = self.fresh(input.name(mu.loopvar), sort, None, true);
                self.st.map[mu.loopvar.index()] = Some(s);
                self.frames.push((Context::new(), Vec::new()));
                self.translate(input, &mu.body);
                let exit = self.m(mu.exit);
                let (body, keys) = self.frames.pop().unwrap();
                for k in keys {
                    self.st.cache.remove(&k);
                }
                let rhs = Rhs::Mu(Box::new(Mu {
                    loopvar: s,
                    body,
                    exit,
                    init: self.m(mu.init),
                }));
                self.st.rhs[x.index()] = Some(rhs.clone());
                self.push_def(Def { var: x, rhs });
                x
            }
        };
        self.st.map[def.var.index()] = Some(out);
    }

    fn sort(&self, v: Var) -> &Sort {
        self.st.vars.sort(v)
    }

    fn node_sort(&self, head: &NodeHead, args: &[Var]) -> Option<Sort> {
        let sorts: Vec<Sort> = args.iter().map(|a| self.sort(*a).clone()).collect();
        match head {
            NodeHead::Op(op) => op.result_sort(&sorts).ok(),
            NodeHead::Nondet => {
                (sorts.len() == 2 && sorts[0] == sorts[1]).then(|| sorts[0].clone())
            }
            NodeHead::Assume => {
                (sorts.len() == 2 && sorts[0] == Sort::Bool).then(|| sorts[1].clone())
            }
        }
    }

    fn inst_sort(&self, inst: &Inst) -> Option<Sort> {
        match inst {
            Inst::Var(v) => Some(self.sort(*v).clone()),
            Inst::Node(h, kids) => {
                let sorts = kids
                    .iter()
                    .map(|k| self.inst_sort(k))
                    .collect::<Option<Vec<_>>>()?;
                match h {
                    NodeHead::Op(op) => op.result_sort(&sorts).ok(),
                    NodeHead::Nondet => {
                        (sorts.len() == 2 && sorts[0] == sorts[1]).then(|| sorts[0].clone())
                    }
                    NodeHead::Assume => {
                        (sorts.len() == 2 && sorts[0] == Sort::Bool).then(|| sorts[1].clone())
                    }
                }
            }
        }
    }

    /// Appends `head(args)` after rewriting; returns the variable holding it.
    fn emit(&mut self, name: &str, head: NodeHead, args: Vec<Var>, chain: usize) -> Var {
        let sort = self.node_sort(&head, &args).expect("well-sorted node");
        if chain < MAX_REWRITE_CHAIN {
            if let Some(inst) = self.rewrite(&head, &args, &sort) {
                return self.realize(name, inst, chain + 1);
            }
        }
        let key = match &head {
            NodeHead::Op(op) => Some(Key::Op(op.clone(), args.clone())),
            NodeHead::Assume => Some(Key::Assume(args[0], args[1])),
            NodeHead::Nondet => None,
        };
        if let Some(v) = key.as_ref().and_then(|k| self.st.cache.get(k)) {
            return *v;
        }
        let maybe_bot = match &head {
            NodeHead::Op(Op::Div) | NodeHead::Assume => true,
            _ => args.iter().any(|a| self.st.may_be_bottom(*a)),
        };
        let rhs = match head {
            NodeHead::Op(op) => Rhs::Op(op, args),
            NodeHead::Nondet => Rhs::Nondet(args[0], args[1]),
            NodeHead::Assume => Rhs::Assume(args[0], args[1]),
        };
        let v = self.fresh(name, sort, Some(rhs.clone()), maybe_bot);
        self.push_def(Def { var: v, rhs });
        if let Some(k) = key {
            self.remember(k, v);
        }
        v
    }

    fn realize(&mut self, name: &str, inst: Inst, chain: usize) -> Var {
        match inst {
            Inst::Var(v) => v,
            Inst::Node(h, kids) => {
                let args = kids
                    .into_iter()
                    .map(|k| self.realize(name, k, chain))
                    .collect();
                self.emit(name, h, args, chain)
            }
        }
    }

    /// First applicable rewrite of `head(args)`: built-in tuple projections,
    /// then the ruleset in order. Instances of the wrong sort are skipped.
    fn rewrite(&self, head: &NodeHead, args: &[Var], sort: &Sort) -> Option<Inst> {
        if let NodeHead::Op(Op::Get(i)) = head {
            if let Some(inst) = self.project(*i, args[0]) {
                return Some(inst);
            }
        }
        for rule in self.rules {
            let mut b = Binding::default();
            let Pattern::Node(ph, pkids) = &rule.lhs else {
                continue;
            };
            if self.match_node(ph, pkids, head, args, &mut b) && self.guards_hold(&rule.guards, &b)
            {
                if let Some(inst) = self.instantiate(&rule.rhs, &b) {
                    if self.inst_sort(&inst).as_ref() == Some(sort) {
                        return Some(inst);
                    }
                }
            }
        }
        None
    }

    /// `get.i` over `mk`, `nondet` and `assume`. Projection out of `mk` is
    /// exact only when the dropped components cannot be ⊥.
    fn project(&self, i: usize, t: Var) -> Option<Inst> {
        let get = |v: Var| Inst::Node(NodeHead::Op(Op::Get(i)), vec![Inst::Var(v)]);
        match self.st.def_of(t)? {
            Rhs::Op(Op::Mk, comps) => {
                let others_live = comps
                    .iter()
                    .enumerate()
                    .all(|(j, c)| j == i || !self.st.may_be_bottom(*c));
                others_live.then(|| Inst::Var(comps[i]))
            }
            Rhs::Nondet(p, q) if self.split_nondet => {
                Some(Inst::Node(NodeHead::Nondet, vec![get(*p), get(*q)]))
            }
            Rhs::Assume(c, p) => Some(Inst::Node(NodeHead::Assume, vec![Inst::Var(*c), get(*p)])),
            _ => None,
        }
    }

    fn int_of(&self, b: &Binding, name: &str) -> Option<i64> {
        b.ints.get(name).copied()
    }

    fn eval_param(&self, p: &Param, b: &Binding) -> Option<i64> {
        p.eval(&|n| self.int_of(b, n), &|n| {
            b.terms
                .get(n)
                .and_then(|v| self.sort(*v).bv_width())
                .map(i64::from)
        })
    }

    fn match_param(&self, p: &Param, n: i64, b: &mut Binding) -> bool {
        match p {
            Param::Var(k) => match b.ints.get(k) {
                Some(x) => *x == n,
                None => {
                    b.ints.insert(k.clone(), n);
                    true
                }
            },
            _ => self.eval_param(p, b) == Some(n),
        }
    }

    fn match_node(
        &self,
        ph: &Head,
        pkids: &[Pattern],
        head: &NodeHead,
        args: &[Var],
        b: &mut Binding,
    ) -> bool {
        let head_ok = match (ph, head) {
            (Head::Op(a), NodeHead::Op(o)) => a == o,
            (Head::Extract(h, l), NodeHead::Op(Op::Extract { hi, lo })) => {
                self.match_param(h, *hi as i64, b) && self.match_param(l, *lo as i64, b)
            }
            (Head::Nondet, NodeHead::Nondet) | (Head::Assume, NodeHead::Assume) => true,
            _ => false,
        };
        head_ok
            && pkids.len() == args.len()
            && pkids
                .iter()
                .zip(args)
                .all(|(p, a)| self.match_var(p, *a, b))
    }

    fn match_var(&self, p: &Pattern, v: Var, b: &mut Binding) -> bool {
        match p {
            Pattern::Var(n) => match b.terms.get(n) {
                Some(w) => *w == v,
                None => {
                    b.terms.insert(n.clone(), v);
                    true
                }
            },
            Pattern::Lit(l) => self.st.literal_of(v) == Some(l),
            Pattern::LitParam(pp) => match self.st.literal_of(v) {
                Some(l @ Literal::Int(_)) => {
                    literal_as_i64(l).is_some_and(|n| self.match_param(pp, n, b))
                }
                _ => false,
            },
            Pattern::Node(ph, pkids) => {
                let (head, args) = match self.st.def_of(v) {
                    Some(Rhs::Op(op, args)) if !op.is_lit() => {
                        (NodeHead::Op(op.clone()), args.clone())
                    }
                    Some(Rhs::Nondet(x, y)) => (NodeHead::Nondet, vec![*x, *y]),
                    Some(Rhs::Assume(c, x)) => (NodeHead::Assume, vec![*c, *x]),
                    _ => return false,
                };
                self.match_node(ph, pkids, &head, &args, b)
            }
        }
    }

    fn guards_hold(&self, guards: &[Guard], b: &Binding) -> bool {
        guards.iter().all(|g| match g {
            Guard::Live(x) => b.terms.get(x).is_some_and(|v| !self.st.may_be_bottom(*v)),
            Guard::Eq(p, q) => {
                let (x, y) = (self.eval_param(p, b), self.eval_param(q, b));
                x.is_some() && x == y
            }
        })
    }

    fn instantiate(&self, p: &Pattern, b: &Binding) -> Option<Inst> {
        Some(match p {
            Pattern::Var(n) => Inst::Var(*b.terms.get(n)?),
            Pattern::Lit(l) => Inst::Node(NodeHead::Op(Op::Lit(l.clone())), vec![]),
            Pattern::LitParam(pp) => {
                let n = self.eval_param(pp, b)?;
                Inst::Node(NodeHead::Op(Op::Lit(Literal::Int(BigInt::from(n)))), vec![])
            }
            Pattern::Node(h, kids) => {
                let head = match h {
                    Head::Op(op) => NodeHead::Op(op.clone()),
                    Head::Extract(hi, lo) => NodeHead::Op(Op::Extract {
                        hi: u32::try_from(self.eval_param(hi, b)?).ok()?,
                        lo: u32::try_from(self.eval_param(lo, b)?).ok()?,
                    }),
                    Head::Nondet => NodeHead::Nondet,
                    Head::Assume => NodeHead::Assume,
                };
                let kids = kids
                    .iter()
                    .map(|k| self.instantiate(k, b))
                    .collect::<Option<Vec<_>>>()?;
                Inst::Node(head, kids)
            }
        })
    }
}
