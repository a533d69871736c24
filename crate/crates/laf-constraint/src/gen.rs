//! Generation of the constraint term from the input term, one definition at
//! a time. At the top level every generated action (initial evaluation,
//! propagation, loop fixpoint) runs immediately; inside a loop body actions
//! are recorded and replayed by the loop fixpoint.

use std::rc::Rc;

use laf_core::{Context, Def, Literal, Mu, Op, Rhs, Sort, Var, VarTable};

use crate::cond::{Cond, Lit};
use crate::state::{
    Action, CDef, Caches, ConstraintConfig, ConstraintState, Image, LitForm, LoopInfo,
};

struct Frame {
    ctx: Context,
    caches: Caches,
    script: Vec<Action>,
}

pub(crate) struct Gen<'a> {
    pub st: &'a mut ConstraintState,
    cfg: &'a ConstraintConfig,
    frames: Vec<Frame>,
}

impl<'a> Gen<'a> {
    pub fn new(st: &'a mut ConstraintState, cfg: &'a ConstraintConfig) -> Self {
        let top = Frame {
            ctx: std::mem::take(&mut st.constraints),
            caches: std::mem::take(&mut st.caches),
            script: Vec::new(),
        };
        Gen {
            st,
            cfg,
            frames: vec![top],
        }
    }

    pub fn finish(mut self) {
        let top = self.frames.pop().unwrap();
        self.st.constraints = top.ctx;
        self.st.caches = top.caches;
    }

    fn act(&mut self, a: Action) {
        if self.frames.len() == 1 {
            self.st.execute(&a, self.cfg);
        } else {
            self.frames.last_mut().unwrap().script.push(a);
        }
    }

    fn emit(&mut self, name: &str, sort: Sort, def: CDef) -> Var {
        let rhs = match &def {
            CDef::Unknown => Rhs::Unknown,
            CDef::Op(op, args) => Rhs::Op(op.clone(), args.clone()),
            CDef::Nondet(a, b) => Rhs::Nondet(*a, *b),
            CDef::Assume(c, v, _) => Rhs::Assume(*c, *v),
            CDef::Input => unreachable!("loop variables are not emitted as definitions"),
        };
        let v = self.st.push_var(name, sort, def);
        self.frames
            .last_mut()
            .unwrap()
            .ctx
            .defs
            .push(Def { var: v, rhs });
        v
    }

    fn cached<T: Copy>(&self, f: impl Fn(&Caches) -> Option<T>) -> Option<T> {
        self.frames.iter().rev().find_map(|fr| f(&fr.caches))
    }

    fn caches(&mut self) -> &mut Caches {
        &mut self.frames.last_mut().unwrap().caches
    }

    fn constant(&mut self, b: bool) -> Var {
        if let Some(v) = self.cached(|c| c.consts[b as usize]) {
            return v;
        }
        let v = self.emit(
            if b { "tt" } else { "ff" },
            Sort::Bool,
            CDef::Op(Op::Lit(Literal::Bool(b)), vec![]),
        );
        self.act(Action::Eval(v, Cond::top()));
        self.caches().consts[b as usize] = Some(v);
        v
    }

    fn negation(&mut self, x: Var) -> Var {
        if let Some(v) = self.cached(|c| c.not.get(&x).copied()) {
            return v;
        }
        let name = format!("not_{}", self.st.vars.name(x));
        let v = self.emit(&name, Sort::Bool, CDef::Op(Op::Not, vec![x]));
        self.caches().not.insert(x, v);
        v
    }

    /// A boolean variable that is true exactly when `c` holds.
    fn flag(&mut self, c: &Option<Cond>) -> Var {
        let c = match c {
            None => return self.constant(false),
            Some(c) if c.is_true() => return self.constant(true),
            Some(c) => c,
        };
        if let Some(v) = self.cached(|k| k.conj.get(c).copied()) {
            return v;
        }
        let mut acc: Option<Var> = None;
        for l in c.lits() {
            let x = if l.pos { l.var } else { self.negation(l.var) };
            acc = Some(match acc {
                None => x,
                Some(a) => self.emit("and", Sort::Bool, CDef::Op(Op::And, vec![a, x])),
            });
        }
        let v = acc.unwrap();
        self.caches().conj.insert(c.clone(), v);
        v
    }

    /// `assume(flag(c), v)`, or `v` itself when `c` is true.
    fn guarded(&mut self, name: &str, c: &Option<Cond>, v: Var) -> Var {
        if c.as_ref().is_some_and(Cond::is_true) {
            return v;
        }
        let h = self.flag(c);
        let sort = self.st.vars.sort(v).clone();
        let a = self.emit(name, sort, CDef::Assume(h, v, c.clone()));
        self.act(Action::Eval(a, Cond::top()));
        a
    }

    fn or(&mut self, a: Option<Cond>, b: Option<Cond>) -> Option<Cond> {
        let (a, b) = match (a, b) {
            (None, x) | (x, None) => return x,
            (Some(a), Some(b)) => (a, b),
        };
        if a.subset_of(&b) {
            return Some(a);
        }
        if b.subset_of(&a) {
            return Some(b);
        }
        let r = a.common(&b);
        let (a2, b2) = (a.minus(&r), b.minus(&r));
        if let ([x], [y]) = (a2.lits(), b2.lits()) {
            if *x == y.neg() {
                return Some(r);
            }
        }
        let key = (a2.clone(), b2.clone());
        let d = match self.cached(|c| c.disj.get(&key).copied()) {
            Some(d) => d,
            None => {
                let t = self.constant(true);
                let l = self.guarded("disj", &Some(a2), t);
                let rr = self.guarded("disj", &Some(b2), t);
                let d = self.emit("disj", Sort::Bool, CDef::Nondet(l, rr));
                self.act(Action::Eval(d, Cond::top()));
                self.caches().disj.insert(key, d);
                d
            }
        };
        r.with(Lit::new(d, true))
    }

    fn img(&self, v: Var) -> Image {
        self.st.images[v.index()]
            .clone()
            .unwrap_or_else(|| panic!("input variable {} used before its definition", v.0))
    }

    fn conj(&self, args: &[Var]) -> Option<Cond> {
        let mut c = Cond::top();
        for a in args {
            c = c.and(self.img(*a).cond.as_ref()?)?;
        }
        Some(c)
    }

    fn set(&mut self, x: Var, val: Var, cond: Option<Cond>) {
        self.st.images[x.index()] = Some(Image { val, cond });
    }

    pub fn translate(&mut self, input: &VarTable, ctx: &Context) {
        for d in &ctx.defs {
            self.translate_def(input, d);
        }
    }

    fn translate_def(&mut self, input: &VarTable, def: &Def) {
        let x = def.var;
        let name = input.name(x);
        let sort = input.sort(x).clone();
        match &def.rhs {
            Rhs::Op(op, args) => {
                let cond = self.conj(args);
                let vals: Vec<Var> = args.iter().map(|a| self.img(*a).val).collect();
                let v = self.emit(name, sort, CDef::Op(op.clone(), vals));
                if let Some(c) = &cond {
                    self.act(Action::Eval(v, c.clone()));
                }
                self.set(x, v, cond);
            }
            Rhs::Unknown => {
                let v = self.emit(name, sort, CDef::Unknown);
                self.act(Action::Eval(v, Cond::top()));
                self.set(x, v, Some(Cond::top()));
            }
            Rhs::Nondet(a, b) => {
                let (ia, ib) = (self.img(*a), self.img(*b));
                let ba = self.guarded(name, &ia.cond, ia.val);
                let bb = self.guarded(name, &ib.cond, ib.val);
                let v = self.emit(name, sort, CDef::Nondet(ba, bb));
                let cond = self.or(ia.cond, ib.cond);
                if let Some(c) = &cond {
                    self.act(Action::Eval(v, c.clone()));
                }
                self.set(x, v, cond);
            }
            Rhs::Assume(c, w) => {
                let (ic, iw) = (self.img(*c), self.img(*w));
                let lf = self.st.litform[ic.val.index()].expect("boolean condition");
                let base = ic
                    .cond
                    .as_ref()
                    .and_then(|k| iw.cond.as_ref().and_then(|m| k.and(m)));
                let (cond, seed) = match lf {
                    LitForm::Const(true) => (base, None),
                    LitForm::Const(false) => (None, None),
                    LitForm::Lit(l) => (base.and_then(|k| k.with(l)), Some(l)),
                };
                if let (Some(_), Some(l)) = (&cond, seed) {
                    self.act(Action::Seed(l));
                }
                self.set(x, iw.val, cond);
            }
            Rhs::Mu(mu) => self.translate_mu(input, x, name, sort, mu),
        }
    }

    fn translate_mu(&mut self, input: &VarTable, x: Var, name: &str, sort: Sort, mu: &Mu) {
        let ii = self.img(mu.init);
        let init = self.guarded(name, &ii.cond, ii.val);
        let result = self.st.push_var(name, sort.clone(), CDef::Input);
        let loopvar = self.st.push_var(input.name(mu.loopvar), sort, CDef::Input);
        self.frames.push(Frame {
            ctx: Context::new(),
            caches: Caches::default(),
            script: Vec::new(),
        });
        self.set(mu.loopvar, loopvar, Some(Cond::top()));
        self.translate(input, &mu.body);
        let ie = self.img(mu.exit);
        let exit = self.guarded(name, &ie.cond, ie.val);
        let fr = self.frames.pop().unwrap();
        self.frames.last_mut().unwrap().ctx.defs.push(Def {
            var: result,
            rhs: Rhs::Mu(Box::new(Mu {
                loopvar,
                body: fr.ctx,
                exit,
                init,
            })),
        });
        let info = LoopInfo {
            result,
            loopvar,
            init,
            exit,
            lo: loopvar.0,
            hi: self.st.vars.len() as u32,
            script: fr.script,
        };
        self.set(x, result, Some(Cond::top()));
        self.act(Action::Loop(Rc::new(info)));
    }
}
