//! Brute-force validity check of rewrite rules over small substitutions.

use std::collections::{BTreeMap, BTreeSet};

use laf_core::{Op, Sort};
use laf_semantics::{enumerate_sort, eval_op, EnumBudget, Value};

use crate::rule::{Guard, Head, Param, Pattern, RewriteRule, RuleKind};

#[derive(Clone, Debug)]
pub struct CheckConfig {
    pub int_window: (i64, i64),
    /// Range of integer parameters (literal values, extraction bounds).
    pub param_range: (i64, i64),
    /// Candidate sorts for each pattern variable.
    pub sorts: Vec<Sort>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            int_window: (-3, 3),
            param_range: (-1, 4),
            sorts: vec![
                Sort::Bool,
                Sort::Int,
                Sort::BitVec(1),
                Sort::BitVec(2),
                Sort::BitVec(3),
                Sort::BitVec(4),
                Sort::Tuple(vec![Sort::Int, Sort::Bool]),
            ],
        }
    }
}

struct Subst<'a> {
    sorts: BTreeMap<&'a str, &'a Sort>,
    ints: BTreeMap<&'a str, i64>,
    vals: BTreeMap<&'a str, Value>,
}

impl Subst<'_> {
    fn param(&self, p: &Param) -> Option<i64> {
        p.eval(&|n| self.ints.get(n).copied(), &|n| {
            self.sorts.get(n).and_then(|s| s.bv_width()).map(i64::from)
        })
    }

    fn extract(&self, a: &Param, b: &Param) -> Option<Op> {
        Some(Op::Extract {
            hi: u32::try_from(self.param(a)?).ok()?,
            lo: u32::try_from(self.param(b)?).ok()?,
        })
    }

    fn sort_of(&self, p: &Pattern) -> Option<Sort> {
        match p {
            Pattern::Var(x) => self.sorts.get(x.as_str()).map(|s| (*s).clone()),
            Pattern::Lit(l) => Some(l.sort()),
            Pattern::LitParam(q) => self.param(q).map(|_| Sort::Int),
            Pattern::Node(h, kids) => {
                let ks = kids
                    .iter()
                    .map(|k| self.sort_of(k))
                    .collect::<Option<Vec<_>>>()?;
                match h {
                    Head::Op(op) => op.result_sort(&ks).ok(),
                    Head::Extract(a, b) => self.extract(a, b)?.result_sort(&ks).ok(),
                    Head::Nondet => (ks[0] == ks[1]).then(|| ks[0].clone()),
                    Head::Assume => (ks[0] == Sort::Bool).then(|| ks[1].clone()),
                }
            }
        }
    }

    /// All values the pattern may evaluate to under the substitution.
    fn eval(&self, p: &Pattern) -> BTreeSet<Value> {
        match p {
            Pattern::Var(x) => BTreeSet::from([self.vals[x.as_str()].clone()]),
            Pattern::Lit(l) => BTreeSet::from([Value::from_literal(l)]),
            Pattern::LitParam(q) => BTreeSet::from([Value::int(self.param(q).unwrap())]),
            Pattern::Node(h, kids) => {
                let ks: Vec<BTreeSet<Value>> = kids.iter().map(|k| self.eval(k)).collect();
                match h {
                    Head::Nondet => ks[0].union(&ks[1]).cloned().collect(),
                    Head::Assume => {
                        let mut out = BTreeSet::new();
                        for c in &ks[0] {
                            for v in &ks[1] {
                                out.insert(if c.as_bool() == Some(true) {
                                    v.clone()
                                } else {
                                    Value::Bottom
                                });
                            }
                        }
                        out
                    }
                    Head::Op(op) => apply(op, &ks),
                    Head::Extract(a, b) => apply(&self.extract(a, b).unwrap(), &ks),
                }
            }
        }
    }
}

fn apply(op: &Op, kids: &[BTreeSet<Value>]) -> BTreeSet<Value> {
    let mut combos: Vec<Vec<Value>> = vec![vec![]];
    for k in kids {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                k.iter().map(move |v| {
                    let mut c = c.clone();
                    c.push(v.clone());
                    c
                })
            })
            .collect();
    }
    combos.iter().map(|c| eval_op(op, c)).collect()
}

fn product<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![vec![]];
    for c in choices {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                c.iter().map(move |x| {
                    let mut p = prefix.clone();
                    p.push(x.clone());
                    p
                })
            })
            .collect();
    }
    out
}

/// Checks `rule` against every substitution in the configured space.
/// Exact rules must evaluate identically on both sides; over-approximating
/// rules only where the left side cannot be ⊥. Returns the number of
/// substitutions checked, or a counterexample.
pub fn check_rule(rule: &RewriteRule, cfg: &CheckConfig) -> Result<usize, String> {
    let mut tv = BTreeSet::new();
    rule.lhs.term_vars(&mut tv);
    let mut pv = BTreeSet::new();
    rule.lhs.param_vars(&mut pv);
    rule.rhs.param_vars(&mut pv);
    let pv: Vec<&str> = pv
        .iter()
        .filter(|p| !tv.contains(*p))
        .map(String::as_str)
        .collect();
    let tv: Vec<&str> = tv.iter().map(String::as_str).collect();
    let budget = EnumBudget::with_window(cfg.int_window.0, cfg.int_window.1);
    let params: Vec<i64> = (cfg.param_range.0..=cfg.param_range.1).collect();
    let mut cases = 0;
    for sorts in product(&vec![cfg.sorts.iter().collect::<Vec<_>>(); tv.len()]) {
        let values: Vec<Vec<Value>> = sorts
            .iter()
            .map(|s| {
                let mut v = enumerate_sort(s, &budget);
                v.push(Value::Bottom);
                v
            })
            .collect();
        for ints in product(&vec![params.clone(); pv.len()]) {
            let mut sub = Subst {
                sorts: tv.iter().copied().zip(sorts.iter().copied()).collect(),
                ints: pv.iter().copied().zip(ints.iter().copied()).collect(),
                vals: BTreeMap::new(),
            };
            let (Some(ls), Some(rs)) = (sub.sort_of(&rule.lhs), sub.sort_of(&rule.rhs)) else {
                continue;
            };
            if ls != rs {
                continue;
            }
            let params_ok = rule.guards.iter().all(|g| match g {
                Guard::Eq(a, b) => sub.param(a).is_some() && sub.param(a) == sub.param(b),
                Guard::Live(_) => true,
            });
            if !params_ok {
                continue;
            }
            for vals in product(&values) {
                sub.vals = tv.iter().copied().zip(vals).collect();
                let live_ok = rule.guards.iter().all(|g| match g {
                    Guard::Live(x) => !sub.vals[x.as_str()].is_bottom(),
                    Guard::Eq(..) => true,
                });
                if !live_ok {
                    continue;
                }
                let l = sub.eval(&rule.lhs);
                let r = sub.eval(&rule.rhs);
                let relevant = rule.kind == RuleKind::Exact || !l.contains(&Value::Bottom);
                if relevant && l != r {
                    let show = |s: &BTreeSet<Value>| {
                        s.iter()
                            .map(|v| v.to_string())
                            .collect::<Vec<_>>()
                            .join(",")
                    };
                    let binds: Vec<String> = sub
                        .vals
                        .iter()
                        .map(|(k, v)| format!("?{k}={v}"))
                        .chain(sub.ints.iter().map(|(k, v)| format!("?{k}={v}")))
                        .collect();
                    return Err(format!(
                        "{rule}: with {} the left side gives {{{}}} and the right side {{{}}}",
                        binds.join(" "),
                        show(&l),
                        show(&r)
                    ));
                }
                cases += 1;
            }
        }
    }
    if cases == 0 {
        return Err(format!("{rule}: no well-sorted substitution"));
    }
    Ok(cases)
}

/// The built-in tuple projections written as rules, for arities up to
/// `max_arity`. The translator applies them natively for any arity.
pub fn projection_rules(max_arity: usize) -> Vec<RewriteRule> {
    let mut out = Vec::new();
    let pv = |n: &str| Pattern::Var(n.to_string());
    for i in 0..max_arity {
        let get = |p: Pattern| Pattern::Node(Head::Op(Op::Get(i)), vec![p]);
        for n in i + 1..=max_arity {
            let comps: Vec<Pattern> = (0..n).map(|j| pv(&format!("x{j}"))).collect();
            out.push(RewriteRule {
                lhs: get(Pattern::Node(Head::Op(Op::Mk), comps)),
                rhs: pv(&format!("x{i}")),
                kind: RuleKind::Exact,
                guards: (0..n)
                    .filter(|j| *j != i)
                    .map(|j| Guard::Live(format!("x{j}")))
                    .collect(),
            });
        }
        out.push(RewriteRule {
            lhs: get(Pattern::Node(Head::Nondet, vec![pv("p"), pv("q")])),
            rhs: Pattern::Node(Head::Nondet, vec![get(pv("p")), get(pv("q"))]),
            kind: RuleKind::Exact,
            guards: vec![],
        });
        out.push(RewriteRule {
            lhs: get(Pattern::Node(Head::Assume, vec![pv("c"), pv("p")])),
            rhs: Pattern::Node(Head::Assume, vec![pv("c"), get(pv("p"))]),
            kind: RuleKind::Exact,
            guards: vec![],
        });
    }
    out
}
