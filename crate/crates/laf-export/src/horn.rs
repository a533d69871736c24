//! Horn-clause encoding: like the first-order one, but each loop gets a
//! predicate over the variables its body captures and its loop variable.

use std::collections::BTreeSet;

use laf_core::{Context, Mu, Rhs, Term, Var};

use crate::fo::{Enc, Fx, Pair, SSort, SVar, SVarInfo};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pred {
    pub name: String,
    /// The loop this predicate describes.
    pub mu: Var,
    /// Captured variables, by increasing id.
    pub captured: Vec<Var>,
    /// Formal parameters: the captured variables' pairs, then the loop variable's.
    pub params: Vec<Pair>,
}

impl Pred {
    pub fn arity(&self) -> usize {
        self.params.iter().map(|p| 1 + p.v.len()).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredApp {
    pub pred: usize,
    pub args: Vec<SVar>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Head {
    Pred(PredApp),
    /// The body is unreachable.
    False,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub body: Vec<Fx>,
    pub atoms: Vec<PredApp>,
    pub head: Head,
}

impl Rule {
    /// Solver variables occurring in the rule.
    pub fn vars(&self) -> BTreeSet<SVar> {
        let mut out = BTreeSet::new();
        for b in &self.body {
            b.collect_vars(&mut out);
        }
        for a in self.atoms.iter().chain(match &self.head {
            Head::Pred(a) => Some(a),
            Head::False => None,
        }) {
            out.extend(&a.args);
        }
        out
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HornSystem {
    pub svars: Vec<SVarInfo>,
    pub preds: Vec<Pred>,
    pub rules: Vec<Rule>,
    /// Conjuncts and loop atoms of the whole top level, describing every
    /// reachable top-level environment.
    pub top_body: Vec<Fx>,
    pub top_atoms: Vec<PredApp>,
    pub map: Vec<Option<Pair>>,
    /// For each value variable, the flag of the pair it belongs to.
    pub owner: Vec<Option<SVar>>,
}

impl HornSystem {
    pub fn pair(&self, x: Var) -> Option<&Pair> {
        self.map.get(x.index())?.as_ref()
    }

    pub fn sort(&self, v: SVar) -> &SSort {
        &self.svars[v.index()].sort
    }
}

#[derive(Default)]
struct Acc {
    body: Vec<Fx>,
    atoms: Vec<PredApp>,
}

/// Variables a loop reads from enclosing scopes.
fn captured(mu: &Mu) -> Vec<Var> {
    let mut bound: BTreeSet<Var> = mu.body.bound_vars().into_iter().collect();
    bound.insert(mu.loopvar);
    let mut used = BTreeSet::new();
    mu.body.walk(&mut |d| {
        used.extend(d.rhs.args());
        if let Rhs::Mu(inner) = &d.rhs {
            used.insert(inner.exit);
        }
    });
    used.insert(mu.exit);
    used.difference(&bound).copied().collect()
}

struct Horn<'a> {
    enc: Enc<'a>,
    preds: Vec<Pred>,
    rules: Vec<Rule>,
}

impl Horn<'_> {
    fn app(&self, pred: usize, captured: &[Pair], last: &Pair) -> PredApp {
        let mut args = Vec::new();
        for p in captured.iter().chain([last]) {
            args.extend(p.all());
        }
        PredApp { pred, args }
    }

    fn ctx(&mut self, ctx: &Context, acc: &mut Acc) {
        for def in &ctx.defs {
            let Rhs::Mu(mu) = &def.rhs else {
                self.enc.def(def, &mut acc.body);
                continue;
            };
            let x = self.enc.pair(def.var);
            let s = self.enc.pair(mu.loopvar);
            let cap = captured(mu);
            let cap_pairs: Vec<Pair> = cap.iter().map(|v| self.enc.pair(*v)).collect();
            let name = format!(
                "Inv_{}",
                self.enc.svars[x.c.index()].name.trim_start_matches("c_")
            );
            let mut params = cap_pairs.clone();
            params.push(s.clone());
            let k = self.preds.len();
            self.preds.push(Pred {
                name: name.clone(),
                mu: def.var,
                captured: cap,
                params,
            });
            let init = self.enc.pair(mu.init);
            self.rules.push(Rule {
                name: format!("init_{name}"),
                body: acc.body.clone(),
                atoms: acc.atoms.clone(),
                head: Head::Pred(self.app(k, &cap_pairs, &init)),
            });
            let mut inner = Acc {
                body: Vec::new(),
                atoms: vec![self.app(k, &cap_pairs, &s)],
            };
            self.ctx(&mu.body, &mut inner);
            let exit = self.enc.pair(mu.exit);
            self.rules.push(Rule {
                name: format!("step_{name}"),
                body: inner.body,
                atoms: inner.atoms,
                head: Head::Pred(self.app(k, &cap_pairs, &exit)),
            });
            acc.atoms.push(self.app(k, &cap_pairs, &x));
        }
    }
}

/// Translates a closed term. With a boolean top-level `goal`, adds the query
/// clause stating that the goal is never false.
pub fn to_horn(term: &Term, goal: Option<Var>) -> HornSystem {
    let mut h = Horn {
        enc: Enc::new(&term.vars),
        preds: Vec::new(),
        rules: Vec::new(),
    };
    let mut top = Acc::default();
    h.ctx(&term.ctx, &mut top);
    if let Some(g) = goal {
        let p = h.enc.map[g.index()]
            .clone()
            .expect("goal is a top-level variable");
        let mut body = top.body.clone();
        body.push(Fx::var(p.c));
        body.push(Fx::not(Fx::var(p.v[0])));
        h.rules.push(Rule {
            name: "query".into(),
            body,
            atoms: top.atoms.clone(),
            head: Head::False,
        });
    }
    let mut owner = vec![None; h.enc.svars.len()];
    for p in h.enc.map.iter().flatten() {
        for v in &p.v {
            owner[v.index()] = Some(p.c);
        }
    }
    HornSystem {
        svars: h.enc.svars,
        preds: h.preds,
        rules: h.rules,
        top_body: top.body,
        top_atoms: top.atoms,
        map: h.enc.map,
        owner,
    }
}
