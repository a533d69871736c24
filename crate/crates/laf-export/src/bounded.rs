//! Bounded bottom-up evaluation of a Horn system over a finite domain, used
//! to compare the clauses against the concrete semantics.
//!
//! Free variables range over the enumeration window. A value variable whose
//! flag is false stands for ⊥ and carries no information, so facts are kept
//! normalized: such values are replaced by their sort's default.

use std::collections::{BTreeSet, HashSet};

use laf_semantics::{enumerate_sort, EnumBudget, Value};

use crate::fo::{Fx, SVar};
use crate::horn::{Head, HornSystem, PredApp, Rule};

/// Facts of each predicate, indexed like [`HornSystem::preds`].
pub type Facts = Vec<HashSet<Vec<Value>>>;

struct Solver<'a> {
    h: &'a HornSystem,
    facts: &'a Facts,
    budget: &'a EnumBudget,
}

enum Item<'a> {
    F(Fx),
    Atom(&'a PredApp),
}

impl Solver<'_> {
    fn domain(&self, v: SVar, asg: &[Option<Value>]) -> Vec<Value> {
        let sort = self.h.sort(v);
        if let Some(c) = self.h.owner[v.index()] {
            if asg[c.index()] == Some(Value::Bool(false)) {
                return vec![sort.default_value()];
            }
        }
        enumerate_sort(&sort.to_laf(), self.budget)
    }

    /// Tries to make progress on `f` without branching. `Some(rest)` replaces
    /// it by the conjuncts in `rest`; `None` means no progress is possible.
    /// A false conjunct is reported as `Err`.
    fn simplify(&self, f: &Fx, asg: &mut [Option<Value>]) -> Result<Option<Vec<Fx>>, ()> {
        if let Some(v) = f.eval(asg) {
            return if v == Value::Bool(true) {
                Ok(Some(Vec::new()))
            } else {
                Err(())
            };
        }
        let unassigned = |x: &Fx, asg: &[Option<Value>]| match x {
            Fx::Var(v) if asg[v.index()].is_none() => Some(*v),
            _ => None,
        };
        match f {
            Fx::Var(v) => {
                asg[v.index()] = Some(Value::Bool(true));
                Ok(Some(Vec::new()))
            }
            Fx::Not(a) => match a.as_ref() {
                Fx::Var(v) => {
                    asg[v.index()] = Some(Value::Bool(false));
                    Ok(Some(Vec::new()))
                }
                _ => Ok(None),
            },
            Fx::And(xs) => Ok(Some(xs.clone())),
            Fx::Eq(a, b) => {
                for (x, e) in [(a, b), (b, a)] {
                    if let Some(u) = unassigned(x, asg) {
                        if let Some(val) = e.eval(asg) {
                            asg[u.index()] = Some(val);
                            return Ok(Some(Vec::new()));
                        }
                    }
                }
                Ok(None)
            }
            Fx::Implies(a, b) => match a.eval(asg) {
                Some(Value::Bool(false)) => Ok(Some(Vec::new())),
                Some(_) => Ok(Some(vec![(**b).clone()])),
                None => Ok(None),
            },
            _ => Ok(None),
        }
    }

    fn search(
        &self,
        mut items: Vec<Item>,
        mut asg: Vec<Option<Value>>,
        project: &[SVar],
        out: &mut dyn FnMut(&[Option<Value>]),
    ) {
        // Propagate until stuck.
        loop {
            let mut progress = false;
            let mut next = Vec::with_capacity(items.len());
            for it in items {
                match it {
                    Item::F(f) => match self.simplify(&f, &mut asg) {
                        Err(()) => return,
                        Ok(Some(rest)) => {
                            progress = true;
                            next.extend(rest.into_iter().map(Item::F));
                        }
                        Ok(None) => next.push(Item::F(f)),
                    },
                    Item::Atom(a) => next.push(Item::Atom(a)),
                }
            }
            items = next;
            if !progress {
                break;
            }
        }
        // Branch on an atom first, then a disjunction, then a free variable.
        if let Some(i) = items.iter().position(|it| matches!(it, Item::Atom(_))) {
            let Item::Atom(a) = items.remove(i) else {
                unreachable!()
            };
            for fact in &self.facts[a.pred] {
                let mut asg2 = asg.clone();
                let ok = a
                    .args
                    .iter()
                    .zip(fact)
                    .all(|(v, val)| match &asg2[v.index()] {
                        Some(cur) => cur == val || self.is_dead(*v, &asg2),
                        None => {
                            asg2[v.index()] = Some(val.clone());
                            true
                        }
                    });
                if ok {
                    let rest = items.iter().map(Item::clone_ref).collect();
                    self.search(rest, asg2, project, out);
                }
            }
            return;
        }
        let Some(i) = items.iter().position(|it| matches!(it, Item::F(_))) else {
            // Projected values nothing constrains, such as unknowns.
            match project
                .iter()
                .find(|v| asg[v.index()].is_none() && !self.is_dead(**v, &asg))
            {
                Some(&v) => {
                    for val in self.domain(v, &asg) {
                        let mut asg2 = asg.clone();
                        asg2[v.index()] = Some(val);
                        self.search(Vec::new(), asg2, project, out);
                    }
                }
                None => out(&asg),
            }
            return;
        };
        if let Some(j) = items.iter().position(|it| matches!(it, Item::F(Fx::Or(_)))) {
            let Item::F(Fx::Or(alts)) = items.remove(j) else {
                unreachable!()
            };
            for alt in alts {
                let mut rest: Vec<Item> = items.iter().map(Item::clone_ref).collect();
                rest.push(Item::F(alt));
                self.search(rest, asg.clone(), project, out);
            }
            return;
        }
        // Enumerate a variable no stuck equality would define, so computed
        // values outside the window are never guessed.
        let mut free = Vec::new();
        let mut defined = BTreeSet::new();
        for it in &items[i..] {
            let Item::F(f) = it else { continue };
            let mut vs = BTreeSet::new();
            f.collect_vars(&mut vs);
            free.extend(vs.into_iter().filter(|v| asg[v.index()].is_none()));
            if let Fx::Eq(a, b) = f {
                for x in [a, b] {
                    if let Fx::Var(u) = x.as_ref() {
                        defined.insert(*u);
                    }
                }
            }
        }
        let v = free
            .iter()
            .find(|v| !defined.contains(v))
            .or(free.first())
            .copied()
            .expect("a stuck conjunct has an unassigned variable");
        for val in self.domain(v, &asg) {
            let mut asg2 = asg.clone();
            asg2[v.index()] = Some(val);
            let rest = items.iter().map(Item::clone_ref).collect();
            self.search(rest, asg2, project, out);
        }
    }

    /// Whether `v` is a value variable of a pair known to be ⊥.
    fn is_dead(&self, v: SVar, asg: &[Option<Value>]) -> bool {
        self.h.owner[v.index()].is_some_and(|c| asg[c.index()] == Some(Value::Bool(false)))
    }

    /// Every solution of `body ∧ atoms`, projected on `project` and normalized.
    fn solutions(&self, body: &[Fx], atoms: &[PredApp], project: &[SVar]) -> HashSet<Vec<Value>> {
        let mut items: Vec<Item> = body.iter().cloned().map(Item::F).collect();
        items.extend(atoms.iter().map(Item::Atom));
        let mut out = HashSet::new();
        self.search(items, vec![None; self.h.svars.len()], project, &mut |asg| {
            out.insert(normalize(self.h, project, asg));
        });
        out
    }
}

impl Item<'_> {
    fn clone_ref(&self) -> Self {
        match self {
            Item::F(f) => Item::F(f.clone()),
            Item::Atom(a) => Item::Atom(a),
        }
    }
}

/// Values of `vars`, with those of ⊥ pairs replaced by defaults. Variables
/// left unassigned by the solver are unconstrained and also get defaults.
fn normalize(h: &HornSystem, vars: &[SVar], asg: &[Option<Value>]) -> Vec<Value> {
    vars.iter()
        .map(|v| {
            let dead =
                h.owner[v.index()].is_some_and(|c| asg[c.index()] != Some(Value::Bool(true)));
            match &asg[v.index()] {
                Some(val) if !dead => val.clone(),
                _ => h.sort(*v).default_value(),
            }
        })
        .collect()
}

fn apply(s: &Solver, r: &Rule) -> Option<(usize, HashSet<Vec<Value>>)> {
    let Head::Pred(head) = &r.head else {
        return None;
    };
    Some((head.pred, s.solutions(&r.body, &r.atoms, &head.args)))
}

/// Facts derivable in at most `rounds` rounds of naive evaluation, each
/// round applying every clause to the facts of the previous one.
pub fn derive(h: &HornSystem, rounds: usize, budget: &EnumBudget) -> Facts {
    run_rounds(h, rounds, budget).0
}

/// The least model restricted to the window, or `None` when it is not
/// reached within `max_rounds` rounds.
pub fn saturate(h: &HornSystem, max_rounds: usize, budget: &EnumBudget) -> Option<Facts> {
    match run_rounds(h, max_rounds + 1, budget) {
        (facts, true) => Some(facts),
        _ => None,
    }
}

/// Facts after the rounds, and whether a round added nothing.
fn run_rounds(h: &HornSystem, rounds: usize, budget: &EnumBudget) -> (Facts, bool) {
    let mut facts: Facts = vec![HashSet::new(); h.preds.len()];
    for _ in 0..rounds {
        let s = Solver {
            h,
            facts: &facts,
            budget,
        };
        let new: Vec<(usize, HashSet<Vec<Value>>)> =
            h.rules.iter().filter_map(|r| apply(&s, r)).collect();
        let mut grew = false;
        for (p, fs) in new {
            for f in fs {
                grew |= facts[p].insert(f);
            }
        }
        if !grew {
            return (facts, true);
        }
    }
    (facts, false)
}

/// Whether some query clause has a solution under `facts`.
pub fn query_reachable(h: &HornSystem, facts: &Facts, budget: &EnumBudget) -> bool {
    let s = Solver { h, facts, budget };
    h.rules
        .iter()
        .filter(|r| r.head == Head::False)
        .any(|r| !s.solutions(&r.body, &r.atoms, &[]).is_empty())
}

/// Normalized values the top level allows for `vars` under `facts`.
pub fn top_solutions(
    h: &HornSystem,
    facts: &Facts,
    vars: &[SVar],
    budget: &EnumBudget,
) -> HashSet<Vec<Value>> {
    Solver { h, facts, budget }.solutions(&h.top_body, &h.top_atoms, vars)
}

/// A concrete value of a LAF variable in normalized fact form: the flag,
/// then the components (defaults for ⊥).
pub fn fact_of(h: &HornSystem, pair: &crate::fo::Pair, v: &Value) -> Vec<Value> {
    let mut out = vec![Value::Bool(!v.is_bottom())];
    match crate::fo::flatten(v) {
        Some(cs) => out.extend(cs),
        None => out.extend(pair.v.iter().map(|s| h.sort(*s).default_value())),
    }
    out
}
