//! SMT-LIB output for both encodings. Output depends only on the input.

use std::fmt::Write;

use laf_core::{Op, Var};
use laf_semantics::Value;

use crate::fo::{flatten, FoFormula, Fx, SSort, SVarInfo};
use crate::horn::{Head, HornSystem, PredApp};

const TDIV: &str = "(define-fun tdiv ((a Int) (b Int)) Int\n  \
    (ite (= (>= a 0) (> b 0)) (div (abs a) (abs b)) (- (div (abs a) (abs b)))))\n";

fn sort_text(s: &SSort) -> String {
    match s {
        SSort::Bool => "Bool".into(),
        SSort::Int => "Int".into(),
        SSort::BitVec(w) => format!("(_ BitVec {w})"),
    }
}

fn value_text(v: &Value) -> String {
    match v {
        Value::Bool(b) => b.to_string(),
        Value::Int(i) if i.sign() == num_bigint::Sign::Minus => format!("(- {})", -i),
        Value::Int(i) => i.to_string(),
        Value::BitVec { width, bits } => format!("(_ bv{bits} {width})"),
        other => panic!("no scalar literal for {other}"),
    }
}

struct Printer<'a> {
    svars: &'a [SVarInfo],
}

impl Printer<'_> {
    fn list(&self, head: &str, xs: &[Fx]) -> String {
        let parts: Vec<String> = xs.iter().map(|x| self.fx(x)).collect();
        format!("({head} {})", parts.join(" "))
    }

    fn fx(&self, f: &Fx) -> String {
        match f {
            Fx::Var(v) => self.svars[v.index()].name.clone(),
            Fx::Lit(v) => value_text(v),
            Fx::Not(a) => format!("(not {})", self.fx(a)),
            Fx::And(xs) if xs.is_empty() => "true".into(),
            Fx::And(xs) if xs.len() == 1 => self.fx(&xs[0]),
            Fx::And(xs) => self.list("and", xs),
            Fx::Or(xs) if xs.is_empty() => "false".into(),
            Fx::Or(xs) if xs.len() == 1 => self.fx(&xs[0]),
            Fx::Or(xs) => self.list("or", xs),
            Fx::Implies(a, b) => format!("(=> {} {})", self.fx(a), self.fx(b)),
            Fx::Eq(a, b) => format!("(= {} {})", self.fx(a), self.fx(b)),
            Fx::App(op, xs) => match op {
                Op::Lit(l) => value_text(&Value::from_literal(l)),
                Op::Add => self.list("+", xs),
                Op::Sub => self.list("-", xs),
                Op::Neg => self.list("-", xs),
                Op::Mul => self.list("*", xs),
                Op::Div => self.list("tdiv", xs),
                Op::Lt => self.list("<", xs),
                Op::Le => self.list("<=", xs),
                Op::Eq => self.list("=", xs),
                Op::And => self.list("and", xs),
                Op::Or => self.list("or", xs),
                Op::Not => self.list("not", xs),
                Op::Extract { hi, lo } => self.list(&format!("(_ extract {hi} {lo})"), xs),
                Op::Concat => self.list("concat", xs),
                Op::Mk | Op::Get(_) => unreachable!("tuples are exploded"),
            },
        }
    }
}

fn uses_div(fs: &[&Fx]) -> bool {
    fn go(f: &Fx) -> bool {
        match f {
            Fx::App(Op::Div, _) => true,
            Fx::App(_, xs) | Fx::And(xs) | Fx::Or(xs) => xs.iter().any(go),
            Fx::Not(a) => go(a),
            Fx::Implies(a, b) | Fx::Eq(a, b) => go(a) || go(b),
            Fx::Var(_) | Fx::Lit(_) => false,
        }
    }
    fs.iter().any(|f| go(f))
}

/// Script asking whether `goal` can evaluate to `target`: `unsat` proves it
/// never does.
pub fn emit_fo(f: &FoFormula, goal: Var, target: &Value) -> String {
    let p = Printer { svars: &f.svars };
    let mut out = String::from("(set-logic ALL)\n");
    if uses_div(&f.conjuncts.iter().collect::<Vec<_>>()) {
        out.push_str(TDIV);
    }
    for s in &f.svars {
        writeln!(out, "(declare-const {} {})", s.name, sort_text(&s.sort)).unwrap();
    }
    for c in &f.conjuncts {
        writeln!(out, "(assert {})", p.fx(c)).unwrap();
    }
    let g = f.pair(goal).expect("goal is a top-level variable");
    writeln!(out, "(assert {})", p.svars[g.c.index()].name).unwrap();
    let comps = flatten(target).expect("target is not ⊥");
    assert_eq!(comps.len(), g.v.len(), "target has the goal's sort");
    for (v, t) in g.v.iter().zip(&comps) {
        writeln!(
            out,
            "(assert (= {} {}))",
            p.svars[v.index()].name,
            value_text(t)
        )
        .unwrap();
    }
    out.push_str("(check-sat)\n");
    out
}

/// Horn script. With a query clause, `sat` means the goal is never false.
pub fn emit_horn(h: &HornSystem) -> String {
    let p = Printer { svars: &h.svars };
    let mut out = String::from("(set-logic HORN)\n");
    let bodies: Vec<&Fx> = h.rules.iter().flat_map(|r| &r.body).collect();
    if uses_div(&bodies) {
        out.push_str(TDIV);
    }
    for pred in &h.preds {
        let sorts: Vec<String> = pred
            .params
            .iter()
            .flat_map(|q| q.all())
            .map(|v| sort_text(h.sort(v)))
            .collect();
        writeln!(
            out,
            "(declare-fun {} ({}) Bool)",
            pred.name,
            sorts.join(" ")
        )
        .unwrap();
    }
    let app = |a: &PredApp| {
        let args: Vec<String> = a
            .args
            .iter()
            .map(|v| h.svars[v.index()].name.clone())
            .collect();
        if args.is_empty() {
            h.preds[a.pred].name.clone()
        } else {
            format!("({} {})", h.preds[a.pred].name, args.join(" "))
        }
    };
    for r in &h.rules {
        let mut conj: Vec<String> = r.body.iter().map(|b| p.fx(b)).collect();
        conj.extend(r.atoms.iter().map(app));
        let body = match conj.len() {
            0 => "true".to_string(),
            1 => conj.pop().unwrap(),
            _ => format!("(and {})", conj.join(" ")),
        };
        let head = match &r.head {
            Head::Pred(a) => app(a),
            Head::False => "false".into(),
        };
        let vars: Vec<String> = r
            .vars()
            .into_iter()
            .map(|v| format!("({} {})", h.svars[v.index()].name, sort_text(h.sort(v))))
            .collect();
        let clause = if vars.is_empty() {
            format!("(=> {body} {head})")
        } else {
            format!("(forall ({}) (=> {body} {head}))", vars.join(" "))
        };
        writeln!(out, "(assert (! {clause} :named {}))", r.name).unwrap();
    }
    out.push_str("(check-sat)\n");
    out
}
