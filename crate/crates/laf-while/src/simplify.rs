use laf_core::{Context, Def, Mu, Rhs, Term, Var, VarTable};
use laf_rewrite::RewriteDomain;

use crate::translate::{Assertion, Translation};

fn set(live: &mut [bool], v: Var, changed: &mut bool) {
    if !live[v.index()] {
        live[v.index()] = true;
        *changed = true;
    }
}

fn mark(ctx: &Context, live: &mut [bool]) -> bool {
    let mut changed = false;
    for def in ctx.defs.iter().rev() {
        match &def.rhs {
            Rhs::Mu(mu) => {
                let inner = mu.body.bound_vars().iter().any(|v| live[v.index()]);
                if live[def.var.index()] || inner {
                    for v in [def.var, mu.loopvar, mu.init, mu.exit] {
                        set(live, v, &mut changed);
                    }
                    if mark(&mu.body, live) {
                        changed = true;
                    }
                }
            }
            rhs => {
                if live[def.var.index()] {
                    for a in rhs.args() {
                        set(live, a, &mut changed);
                    }
                }
            }
        }
    }
    changed
}

struct Compactor<'a> {
    old: &'a VarTable,
    live: Vec<bool>,
    map: Vec<Option<Var>>,
    vars: VarTable,
}

impl Compactor<'_> {
    fn fresh(&mut self, v: Var) -> Var {
        let n = self.vars.fresh(self.old.name(v), self.old.sort(v).clone());
        self.map[v.index()] = Some(n);
        n
    }

    fn m(&self, v: Var) -> Var {
        self.map[v.index()].expect("live definitions only use live variables")
    }

    fn ctx(&mut self, ctx: &Context) -> Context {
        let mut out = Context::new();
        for def in &ctx.defs {
            if !self.live[def.var.index()] {
                continue;
            }
            let x = self.fresh(def.var);
            let rhs = match &def.rhs {
                Rhs::Op(op, args) => Rhs::Op(op.clone(), args.iter().map(|a| self.m(*a)).collect()),
                Rhs::Nondet(a, b) => Rhs::Nondet(self.m(*a), self.m(*b)),
                Rhs::Assume(c, v) => Rhs::Assume(self.m(*c), self.m(*v)),
                Rhs::Unknown => Rhs::Unknown,
                Rhs::Mu(mu) => {
                    let init = self.m(mu.init);
                    let s = self.fresh(mu.loopvar);
                    let body = self.ctx(&mu.body);
                    Rhs::Mu(Box::new(Mu {
                        loopvar: s,
                        body,
                        exit: self.m(mu.exit),
                        init,
                    }))
                }
            };
            out.defs.push(Def { var: x, rhs });
        }
        out
    }
}

/// Removes definitions that no root depends on and renumbers the rest in
/// definition order. Returns the new term and the old-to-new variable map.
pub fn prune(term: &Term, roots: &[Var]) -> (Term, Vec<Option<Var>>) {
    let mut live = vec![false; term.vars.len()];
    live[term.result.index()] = true;
    for r in roots {
        live[r.index()] = true;
    }
    while mark(&term.ctx, &mut live) {}
    let mut c = Compactor {
        old: &term.vars,
        live,
        map: vec![None; term.vars.len()],
        vars: VarTable::new(),
    };
    let ctx = c.ctx(&term.ctx);
    let result = c.m(term.result);
    (
        Term {
            vars: c.vars,
            ctx,
            result,
        },
        c.map,
    )
}

/// Simplifies tuple operations with the rewriting domain, then removes dead
/// definitions. The result set of the term is unchanged, and so are the
/// values of assertions and bindings.
pub fn simplify_translation(t: &Translation) -> Translation {
    let st = RewriteDomain::exact().preserving_results().run(&t.term);
    let img = |v: Var| st.image(v).expect("every input variable is translated");
    let rewritten = Term {
        vars: st.vars.clone(),
        ctx: st.out.clone(),
        result: img(t.term.result),
    };
    let roots: Vec<Var> = t
        .assertions
        .iter()
        .map(|a| img(a.var))
        .chain(t.bindings.iter().map(|(_, v)| img(*v)))
        .collect();
    let (term, map) = prune(&rewritten, &roots);
    let m = |v: Var| map[img(v).index()].unwrap();
    Translation {
        term,
        vars: t.vars.clone(),
        assertions: t
            .assertions
            .iter()
            .map(|a| Assertion {
                var: m(a.var),
                ..a.clone()
            })
            .collect(),
        bindings: t.bindings.iter().map(|(n, v)| (n.clone(), m(*v))).collect(),
    }
}
