use std::collections::{HashMap, HashSet, VecDeque};
use std::rc::Rc;

use laf_core::{Context, Literal, Op, Sort, Var, VarTable};
use laf_lattices::{refine_args, AbsValue, BoolSet, IntFlavor};

use crate::cond::{Cond, Lit};

/// Which way refinements travel from an assumed condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Backward,
    Both,
}

#[derive(Clone, Debug)]
pub struct ConstraintConfig {
    pub flavor: IntFlavor,
    /// Distinct variables a single propagation may refine; `None` is unbounded.
    pub prop_limit: Option<usize>,
    pub direction: Direction,
    pub widen_delay: usize,
    pub thresholds: Vec<i64>,
    /// Nesting of case splits on never-⊥ literals inside one query.
    pub split_depth: usize,
    /// Depth of on-demand re-evaluation of definitions inside one query.
    pub eval_depth: usize,
    /// Hard cap on worklist items per propagation.
    pub max_prop_steps: usize,
    /// Loop rounds before giving up and using ⊤ for the loop variable.
    pub max_loop_rounds: usize,
}

impl Default for ConstraintConfig {
    fn default() -> Self {
        ConstraintConfig {
            flavor: IntFlavor::Interval,
            prop_limit: None,
            direction: Direction::Both,
            widen_delay: 0,
            thresholds: Vec::new(),
            split_depth: 2,
            eval_depth: 24,
            max_prop_steps: 20_000,
            max_loop_rounds: 60,
        }
    }
}

/// Right-hand side of a constraint variable as seen by the analysis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum CDef {
    /// Loop variable or loop result: values come from the loop fixpoint.
    Input,
    Unknown,
    Op(Op, Vec<Var>),
    Nondet(Var, Var),
    /// `assume(flag, value)` where `flag` encodes the condition (`None`: false).
    Assume(Var, Var, Option<Cond>),
}

/// How a boolean constraint variable is read as a condition literal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum LitForm {
    Const(bool),
    Lit(Lit),
}

/// Where an input variable lives in the constraint term: its value variable
/// and the condition under which the input is defined (`None`: never).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub val: Var,
    pub cond: Option<Cond>,
}

/// A condition map: the variable's value lies in each entry's abstract
/// value whenever the entry's condition holds.
pub type Entries = Vec<(Cond, AbsValue)>;

#[derive(Clone, Debug, Default)]
pub(crate) struct Caches {
    pub conj: HashMap<Cond, Var>,
    pub not: HashMap<Var, Var>,
    pub disj: HashMap<(Cond, Cond), Var>,
    pub consts: [Option<Var>; 2],
}

#[derive(Clone, Debug)]
pub(crate) enum Action {
    Eval(Var, Cond),
    Seed(Lit),
    Loop(Rc<LoopInfo>),
}

#[derive(Debug)]
pub(crate) struct LoopInfo {
    pub result: Var,
    pub loopvar: Var,
    pub init: Var,
    pub exit: Var,
    /// Constraint variables of the body (loop variable included) are `lo..hi`.
    pub lo: u32,
    pub hi: u32,
    pub script: Vec<Action>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub seeds: usize,
    pub refinements: usize,
    pub steps: usize,
    pub loop_rounds: usize,
    /// A propagation or a loop hit its hard cap.
    pub capped: bool,
}

/// Abstract state of the constraint domain: the constraint term built so
/// far, the maps from input variables into it, and the store of condition
/// maps.
#[derive(Clone, Debug)]
pub struct ConstraintState {
    pub vars: VarTable,
    pub constraints: Context,
    pub images: Vec<Option<Image>>,
    pub stats: Stats,
    pub(crate) store: Vec<Entries>,
    pub(crate) cdefs: Vec<CDef>,
    pub(crate) uses: Vec<Vec<Var>>,
    pub(crate) never_bot: Vec<bool>,
    pub(crate) litform: Vec<Option<LitForm>>,
    pub(crate) caches: Caches,
}

#[derive(Default)]
pub(crate) struct Session {
    memo: HashMap<(Var, Cond), AbsValue>,
}

fn below(new: &AbsValue, old: &AbsValue) -> bool {
    new.leq(old) && !old.leq(new)
}

fn norm(v: AbsValue) -> AbsValue {
    if v.is_empty() {
        v.bottom_like()
    } else {
        v
    }
}

impl ConstraintState {
    pub fn new(input_vars: usize) -> Self {
        ConstraintState {
            vars: VarTable::new(),
            constraints: Context::new(),
            images: vec![None; input_vars],
            stats: Stats::default(),
            store: Vec::new(),
            cdefs: Vec::new(),
            uses: Vec::new(),
            never_bot: Vec::new(),
            litform: Vec::new(),
            caches: Caches::default(),
        }
    }

    pub fn image(&self, input: Var) -> Option<&Image> {
        self.images.get(input.index()).and_then(Option::as_ref)
    }

    /// Stored condition map of a constraint variable.
    pub fn entries(&self, v: Var) -> &Entries {
        &self.store[v.index()]
    }

    /// Entries sorted for display: fewer literals first.
    pub fn sorted_entries(&self, v: Var) -> Entries {
        let mut es = self.store[v.index()].clone();
        es.sort_by_key(|a| a.0.sort_key());
        es
    }

    pub fn show_cond(&self, c: &Cond) -> String {
        c.show(&|v| self.vars.name(v).to_string())
    }

    /// `name : cond ⊩ value, ...` for one constraint variable.
    pub fn show_binding(&self, name: &str, v: Var) -> String {
        let parts: Vec<String> = self
            .sorted_entries(v)
            .iter()
            .map(|(c, a)| format!("{} ⊩ {}", self.show_cond(c), a))
            .collect();
        format!("{name} : {}", parts.join(", "))
    }

    /// Every constraint variable with a non-empty condition map.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (v, _) in self.vars.iter() {
            if !self.store[v.index()].is_empty() {
                out.push_str(&self.show_binding(self.vars.name(v), v));
                out.push('\n');
            }
        }
        out
    }

    pub(crate) fn push_var(&mut self, name: &str, sort: Sort, def: CDef) -> Var {
        let v = self.vars.fresh(name, sort.clone());
        let nb = match &def {
            CDef::Unknown => true,
            CDef::Op(Op::Div, args) => {
                self.never_bot[args[0].index()]
                    && matches!(&self.cdefs[args[1].index()],
                        CDef::Op(Op::Lit(Literal::Int(z)), _) if z != &num_bigint::BigInt::from(0))
            }
            CDef::Op(_, args) => args.iter().all(|a| self.never_bot[a.index()]),
            _ => false,
        };
        let lf = if sort == Sort::Bool {
            Some(match &def {
                CDef::Op(Op::Lit(Literal::Bool(b)), _) => LitForm::Const(*b),
                CDef::Op(Op::Not, args) => match self.litform[args[0].index()] {
                    Some(LitForm::Const(b)) => LitForm::Const(!b),
                    Some(LitForm::Lit(l)) => LitForm::Lit(l.neg()),
                    None => LitForm::Lit(Lit::new(v, true)),
                },
                _ => LitForm::Lit(Lit::new(v, true)),
            })
        } else {
            None
        };
        let args: Vec<Var> = match &def {
            CDef::Op(_, args) => args.clone(),
            CDef::Nondet(a, b) | CDef::Assume(a, b, _) => vec![*a, *b],
            _ => vec![],
        };
        for a in args {
            self.uses[a.index()].push(v);
        }
        self.store.push(Vec::new());
        self.cdefs.push(def);
        self.uses.push(Vec::new());
        self.never_bot.push(nb);
        self.litform.push(lf);
        v
    }

    fn top(&self, v: Var, cfg: &ConstraintConfig) -> AbsValue {
        AbsValue::top(self.vars.sort(v), cfg.flavor)
    }

    fn empty(&self, v: Var, cfg: &ConstraintConfig) -> AbsValue {
        AbsValue::empty(self.vars.sort(v), cfg.flavor)
    }

    pub(crate) fn add_entry(&mut self, v: Var, c: Cond, a: AbsValue) {
        let a = norm(a);
        let es = &mut self.store[v.index()];
        if let Some(e) = es.iter_mut().find(|e| e.0 == c) {
            e.1 = norm(e.1.meet(&a));
        } else {
            es.push((c, a));
        }
    }

    /// Meet of the stored entries whose condition is implied by `k`.
    pub fn stored(&self, v: Var, k: &Cond, cfg: &ConstraintConfig) -> AbsValue {
        let mut r = self.top(v, cfg);
        for (c, a) in &self.store[v.index()] {
            if c.subset_of(k) {
                r = r.meet(a);
            }
        }
        norm(r)
    }

    /// Best known abstract value of `v` in every environment where `k` holds.
    pub fn query(&self, v: Var, k: &Cond, cfg: &ConstraintConfig) -> AbsValue {
        self.query_in(&mut Session::default(), v, k, 0, cfg.split_depth, cfg)
    }

    pub(crate) fn query_in(
        &self,
        s: &mut Session,
        v: Var,
        k: &Cond,
        depth: usize,
        splits: usize,
        cfg: &ConstraintConfig,
    ) -> AbsValue {
        let key = (v, k.clone());
        if let Some(r) = s.memo.get(&key) {
            return r.clone();
        }
        let mut r = self.stored(v, k, cfg);
        if depth < cfg.eval_depth && !matches!(self.cdefs[v.index()], CDef::Input) && !r.is_empty()
        {
            r = norm(r.meet(&self.eval_in(s, v, k, depth + 1, splits, cfg)));
        }
        if splits > 0 && !r.is_empty() {
            let mut cands: Vec<Var> = Vec::new();
            for (c, _) in &self.store[v.index()] {
                let d = c.minus(k);
                if let [l] = d.lits() {
                    if self.never_bot[l.var.index()]
                        && !k.mentions(l.var)
                        && !cands.contains(&l.var)
                    {
                        cands.push(l.var);
                    }
                }
            }
            for c in cands.into_iter().take(3) {
                let a = self.query_in(
                    s,
                    v,
                    &k.with(Lit::new(c, true)).unwrap(),
                    depth,
                    splits - 1,
                    cfg,
                );
                let b = self.query_in(
                    s,
                    v,
                    &k.with(Lit::new(c, false)).unwrap(),
                    depth,
                    splits - 1,
                    cfg,
                );
                r = norm(r.meet(&a.join(&b)));
            }
        }
        s.memo.insert(key, r.clone());
        r
    }

    /// Abstract evaluation of the definition of `v` under `k`.
    pub fn eval_at(&self, v: Var, k: &Cond, cfg: &ConstraintConfig) -> AbsValue {
        self.eval_in(&mut Session::default(), v, k, 0, cfg.split_depth, cfg)
    }

    pub(crate) fn eval_in(
        &self,
        s: &mut Session,
        v: Var,
        k: &Cond,
        depth: usize,
        splits: usize,
        cfg: &ConstraintConfig,
    ) -> AbsValue {
        match &self.cdefs[v.index()] {
            CDef::Input | CDef::Unknown => self.top(v, cfg),
            CDef::Op(op, args) => {
                let xs: Vec<AbsValue> = args
                    .iter()
                    .map(|a| self.query_in(s, *a, k, depth, splits, cfg))
                    .collect();
                norm(AbsValue::transfer(op, &xs, cfg.flavor))
            }
            CDef::Assume(_, w, c) => match c.as_ref().and_then(|c| k.and(c)) {
                None => self.empty(v, cfg),
                Some(k2) => self.query_in(s, *w, &k2, depth, splits, cfg),
            },
            CDef::Nondet(a, b) => {
                let mut r = self.empty(v, cfg);
                for br in [*a, *b] {
                    let x = if matches!(self.cdefs[br.index()], CDef::Assume(..)) {
                        self.eval_in(s, br, k, depth, splits, cfg)
                    } else {
                        self.query_in(s, br, k, depth, splits, cfg)
                    };
                    if !x.is_empty() {
                        r = if r.is_empty() { x } else { r.join(&x) };
                    }
                }
                r
            }
        }
    }

    pub(crate) fn execute(&mut self, a: &Action, cfg: &ConstraintConfig) {
        match a {
            Action::Eval(v, k) => {
                let val = self.eval_at(*v, k, cfg);
                self.add_entry(*v, k.clone(), val);
            }
            Action::Seed(l) => self.propagate(*l, cfg),
            Action::Loop(info) => self.run_loop(info, cfg),
        }
    }

    fn branch_cond(&self, v: Var) -> Option<&Cond> {
        match &self.cdefs[v.index()] {
            CDef::Assume(_, _, Some(c)) => Some(c),
            _ => None,
        }
    }

    /// Refines the store from the fact that `seed` holds.
    pub(crate) fn propagate(&mut self, seed: Lit, cfg: &ConstraintConfig) {
        self.stats.seeds += 1;
        let k0 = Cond::lit(seed);
        self.add_entry(seed.var, k0.clone(), AbsValue::Bools(BoolSet::of(seed.pos)));
        let mut queue: VecDeque<(Var, Cond, bool)> = VecDeque::from([(seed.var, k0, true)]);
        let mut refined: HashSet<Var> = HashSet::new();
        let mut steps = 0;
        while let Some((v, k, nonbot)) = queue.pop_front() {
            steps += 1;
            if steps > cfg.max_prop_steps {
                self.stats.capped = true;
                break;
            }
            let mut out: Vec<(Var, Cond, AbsValue, bool)> = Vec::new();
            {
                let mut s = Session::default();
                let q = |s: &mut Session, x: Var, c: &Cond| {
                    self.query_in(s, x, c, 0, cfg.split_depth, cfg)
                };
                if nonbot {
                    let cur = q(&mut s, v, &k);
                    match &self.cdefs[v.index()] {
                        CDef::Op(op, args) if !args.is_empty() => {
                            let olds: Vec<AbsValue> =
                                args.iter().map(|a| q(&mut s, *a, &k)).collect();
                            let news = refine_args(op, &cur, &olds);
                            for ((a, old), new) in args.iter().zip(&olds).zip(news) {
                                let new = norm(new.meet(old));
                                if below(&new, old) {
                                    out.push((*a, k.clone(), new, true));
                                }
                            }
                        }
                        CDef::Assume(_, w, Some(c)) => {
                            if let Some(k2) = k.and(c) {
                                let old = q(&mut s, *w, &k2);
                                let new = norm(old.meet(&cur));
                                if below(&new, &old) {
                                    out.push((*w, k2, new, true));
                                }
                            }
                        }
                        CDef::Nondet(a, b) => {
                            if let (Some(ca), Some(cb)) =
                                (self.branch_cond(*a), self.branch_cond(*b))
                            {
                                if ca.contradicts(cb) {
                                    for (br, c) in [(*a, ca), (*b, cb)] {
                                        if let Some(k2) = k.and(c) {
                                            let old = q(&mut s, br, &k2);
                                            let new = norm(old.meet(&cur));
                                            if below(&new, &old) {
                                                out.push((br, k2, new, true));
                                            }
                                        }
                                    }
                                }
                            }
                        }
                        _ => {}
                    }
                }
                if cfg.direction == Direction::Both {
                    for u in &self.uses[v.index()] {
                        if let CDef::Op(_, args) = &self.cdefs[u.index()] {
                            if args.is_empty() {
                                continue;
                            }
                            let old = self.stored(*u, &k, cfg);
                            let new = norm(old.meet(&self.eval_in(
                                &mut s,
                                *u,
                                &k,
                                1,
                                cfg.split_depth,
                                cfg,
                            )));
                            if below(&new, &old) {
                                out.push((*u, k.clone(), new, false));
                            }
                        }
                    }
                }
            }
            for (x, c, val, nb) in out {
                if x != seed.var && !refined.contains(&x) {
                    if cfg.prop_limit.is_some_and(|n| refined.len() >= n) {
                        continue;
                    }
                    refined.insert(x);
                }
                self.stats.refinements += 1;
                self.add_entry(x, c.clone(), val);
                queue.push_back((x, c, nb));
            }
        }
        self.stats.steps += steps;
    }

    fn map_query(m: &Entries, k: &Cond, dflt: &AbsValue) -> AbsValue {
        let mut r = dflt.clone();
        for (c, a) in m {
            if c.subset_of(k) {
                r = r.meet(a);
            }
        }
        norm(r)
    }

    fn map_leq(a: &Entries, b: &Entries, top: &AbsValue) -> bool {
        b.iter().all(|(k, bv)| Self::map_query(a, k, top).leq(bv))
    }

    fn map_combine(
        a: &Entries,
        b: &Entries,
        top: &AbsValue,
        f: impl Fn(&AbsValue, &AbsValue) -> AbsValue,
    ) -> Entries {
        let mut keys: Vec<Cond> = vec![Cond::top()];
        for (k, _) in a.iter().chain(b) {
            if !keys.contains(k) {
                keys.push(k.clone());
            }
        }
        keys.into_iter()
            .map(|k| {
                let x = a
                    .iter()
                    .find(|e| e.0 == k)
                    .map(|e| e.1.clone())
                    .unwrap_or_else(|| Self::map_query(a, &k, top));
                let y = Self::map_query(b, &k, top);
                let v = f(&x, &y);
                (k, v)
            })
            .collect()
    }

    fn reset_body(&mut self, info: &LoopInfo, snap: &[usize]) {
        for (v, n) in snap.iter().enumerate() {
            self.store[v].truncate(*n);
        }
        for v in info.lo..info.hi {
            self.store[v as usize].clear();
        }
    }

    fn loop_candidate(&self, info: &LoopInfo, cfg: &ConstraintConfig) -> Entries {
        let body = |l: &Lit| l.var.0 >= info.lo && l.var.0 < info.hi;
        let mut keys: Vec<Cond> = vec![Cond::top()];
        for (c, _) in self.store[info.exit.index()]
            .iter()
            .chain(&self.store[info.init.index()])
        {
            let k = c.retain(|l| !body(l));
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
        keys.into_iter()
            .map(|k| {
                let e = self.query(info.exit, &k, cfg);
                let i = self.query(info.init, &k, cfg);
                let v = if e.is_empty() {
                    i
                } else if i.is_empty() {
                    e
                } else {
                    e.join(&i)
                };
                (k, v)
            })
            .collect()
    }

    fn run_loop(&mut self, info: &LoopInfo, cfg: &ConstraintConfig) {
        let snap: Vec<usize> = (0..info.lo as usize).map(|v| self.store[v].len()).collect();
        let top = self.top(info.loopvar, cfg);
        let mut l: Entries = vec![(Cond::top(), self.query(info.init, &Cond::top(), cfg))];
        let mut round = 0;
        loop {
            self.reset_body(info, &snap);
            self.store[info.loopvar.index()] = l.clone();
            for a in &info.script {
                self.execute(a, cfg);
            }
            self.stats.loop_rounds += 1;
            let cand = self.loop_candidate(info, cfg);
            if Self::map_leq(&cand, &l, &top) {
                // One descending step: the candidate bounds every iteration
                // as well, and is usually tighter after widening.
                if !Self::map_leq(&l, &cand, &top) {
                    l = cand;
                    self.reset_body(info, &snap);
                    self.store[info.loopvar.index()] = l.clone();
                    for a in &info.script {
                        self.execute(a, cfg);
                    }
                    self.stats.loop_rounds += 1;
                }
                break;
            }
            round += 1;
            if round > cfg.max_loop_rounds {
                self.stats.capped = true;
                l = vec![(Cond::top(), top.clone())];
                self.reset_body(info, &snap);
                self.store[info.loopvar.index()] = l.clone();
                for a in &info.script {
                    self.execute(a, cfg);
                }
                break;
            }
            l = if round <= cfg.widen_delay {
                Self::map_combine(&l, &cand, &top, |x, y| norm(x.join(y)))
            } else {
                Self::map_combine(&l, &cand, &top, |x, y| {
                    if x.is_empty() {
                        y.clone()
                    } else if y.is_empty() {
                        x.clone()
                    } else {
                        norm(x.widen(y, &cfg.thresholds))
                    }
                })
            };
        }
        // Facts about outer variables that mention body literals lose their
        // meaning once the loop is left.
        for (v, n) in snap.iter().enumerate() {
            let tail: Entries = self.store[v]
                .drain(*n..)
                .filter(|(c, _)| {
                    !c.lits()
                        .iter()
                        .any(|x| x.var.0 >= info.lo && x.var.0 < info.hi)
                })
                .collect();
            self.store[v].extend(tail);
        }
        self.store[info.result.index()] = l;
    }
}
