//! Rewrite rules: patterns over the let-inlined view of definitions.
//!
//! ```text
//! rule    := pat "=>" pat ("exact" | "approx") ("when" guard+)?
//! pat     := ?x | INT | true | false | "(lit" param ")"
//!          | "(extract" param param pat ")" | "(" OPNAME pat* ")"
//! param   := INT | ?k | "(width" ?x ")" | "(+" param param ")" | "(-" ...")" | "(*" ...")"
//! guard   := "(live" ?x ")" | "(=" param param ")"
//! ```

use std::collections::BTreeSet;
use std::fmt;

use laf_core::{read_sexps, Literal, Op, ParseError, Sexp};
use num_bigint::BigInt;

/// Integer-valued parameter: extraction bounds and folded literals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Param {
    Const(i64),
    Var(String),
    Width(String),
    Add(Box<Param>, Box<Param>),
    Sub(Box<Param>, Box<Param>),
    Mul(Box<Param>, Box<Param>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Head {
    /// Any operator except literals and extraction.
    Op(Op),
    Extract(Param, Param),
    Nondet,
    Assume,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pattern {
    Var(String),
    Lit(Literal),
    /// Integer literal whose value is a parameter.
    LitParam(Param),
    Node(Head, Vec<Pattern>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Guard {
    /// The bound variable can never evaluate to ⊥.
    Live(String),
    Eq(Param, Param),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RuleKind {
    Exact,
    OverApprox,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteRule {
    pub lhs: Pattern,
    pub rhs: Pattern,
    pub kind: RuleKind,
    pub guards: Vec<Guard>,
}

/// Deepest lhs nesting accepted: the root plus three inlined levels.
pub const MAX_LHS_DEPTH: usize = 4;

impl Param {
    fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Param::Const(_) => {}
            Param::Var(v) | Param::Width(v) => {
                out.insert(v.clone());
            }
            Param::Add(a, b) | Param::Sub(a, b) | Param::Mul(a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }

    /// Evaluates with `int` for parameter variables and `width` for pattern
    /// variable widths.
    pub fn eval(
        &self,
        int: &dyn Fn(&str) -> Option<i64>,
        width: &dyn Fn(&str) -> Option<i64>,
    ) -> Option<i64> {
        match self {
            Param::Const(c) => Some(*c),
            Param::Var(v) => int(v),
            Param::Width(v) => width(v),
            Param::Add(a, b) => a.eval(int, width)?.checked_add(b.eval(int, width)?),
            Param::Sub(a, b) => a.eval(int, width)?.checked_sub(b.eval(int, width)?),
            Param::Mul(a, b) => a.eval(int, width)?.checked_mul(b.eval(int, width)?),
        }
    }
}

impl Pattern {
    pub fn depth(&self) -> usize {
        match self {
            Pattern::Node(_, kids) => 1 + kids.iter().map(Pattern::depth).max().unwrap_or(0),
            _ => 0,
        }
    }

    /// Operators and literals in the pattern.
    pub fn size(&self) -> usize {
        match self {
            Pattern::Var(_) => 0,
            Pattern::Lit(_) | Pattern::LitParam(_) => 1,
            Pattern::Node(_, kids) => 1 + kids.iter().map(Pattern::size).sum::<usize>(),
        }
    }

    /// Pattern variables (bound to term variables).
    pub fn term_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Pattern::Var(v) => {
                out.insert(v.clone());
            }
            Pattern::Lit(_) | Pattern::LitParam(_) => {}
            Pattern::Node(_, kids) => kids.iter().for_each(|k| k.term_vars(out)),
        }
    }

    /// Parameter variables (bound to integers) and width references.
    pub fn param_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Pattern::Var(_) | Pattern::Lit(_) => {}
            Pattern::LitParam(p) => p.vars(out),
            Pattern::Node(h, kids) => {
                if let Head::Extract(a, b) = h {
                    a.vars(out);
                    b.vars(out);
                }
                kids.iter().for_each(|k| k.param_vars(out));
            }
        }
    }

    /// Parameter variables that matching the pattern binds.
    fn bound_params(&self, out: &mut BTreeSet<String>) {
        let mut direct = |p: &Param| {
            if let Param::Var(v) = p {
                out.insert(v.clone());
            }
        };
        match self {
            Pattern::LitParam(p) => direct(p),
            Pattern::Node(h, kids) => {
                if let Head::Extract(a, b) = h {
                    direct(a);
                    direct(b);
                }
                kids.iter().for_each(|k| k.bound_params(out));
            }
            _ => {}
        }
    }
}

impl RewriteRule {
    /// Parses a single rule line.
    pub fn parse(line: &str) -> Result<RewriteRule, ParseError> {
        let items = read_sexps(line)?;
        let at = |i: usize| items.get(i);
        let fail = |msg: &str| ParseError {
            line: 1,
            col: 1,
            message: msg.to_string(),
        };
        if items.len() < 4 || at(1).and_then(Sexp::atom) != Some("=>") {
            return Err(fail("expected `lhs => rhs exact|approx`"));
        }
        let lhs = parse_pattern(&items[0])?;
        let rhs = parse_pattern(&items[2])?;
        let kind = match items[3].atom() {
            Some("exact") => RuleKind::Exact,
            Some("approx") => RuleKind::OverApprox,
            _ => return items[3].err("expected `exact` or `approx`"),
        };
        let mut guards = Vec::new();
        if items.len() > 4 {
            if items[4].atom() != Some("when") || items.len() == 5 {
                return items[4].err("expected `when` followed by guards");
            }
            for g in &items[5..] {
                guards.push(parse_guard(g)?);
            }
        }
        let rule = RewriteRule {
            lhs,
            rhs,
            kind,
            guards,
        };
        rule.validate().map_err(|m| {
            let (line, col) = items[0].pos();
            ParseError {
                line,
                col,
                message: m,
            }
        })?;
        Ok(rule)
    }

    /// Structural restrictions: the lhs is an operator node of bounded depth
    /// and every variable used on the right or in a guard is bound on the left.
    pub fn validate(&self) -> Result<(), String> {
        if !matches!(self.lhs, Pattern::Node(..)) {
            return Err("left-hand side must be an operator application".into());
        }
        if self.lhs.depth() > MAX_LHS_DEPTH {
            return Err(format!("left-hand side deeper than {MAX_LHS_DEPTH}"));
        }
        let mut tv = BTreeSet::new();
        self.lhs.term_vars(&mut tv);
        let mut pv = BTreeSet::new();
        self.lhs.bound_params(&mut pv);
        let mut used_t = BTreeSet::new();
        self.rhs.term_vars(&mut used_t);
        let mut used_p = BTreeSet::new();
        self.rhs.param_vars(&mut used_p);
        self.lhs.param_vars(&mut used_p);
        for g in &self.guards {
            match g {
                Guard::Live(v) => {
                    used_t.insert(v.clone());
                }
                Guard::Eq(a, b) => {
                    a.vars(&mut used_p);
                    b.vars(&mut used_p);
                }
            }
        }
        if let Some(v) = used_t.iter().find(|v| !tv.contains(*v)) {
            return Err(format!("?{v} is not bound by the left-hand side"));
        }
        // width references name term variables; other parameters must be bound
        if let Some(v) = used_p.iter().find(|v| !pv.contains(*v) && !tv.contains(*v)) {
            return Err(format!("?{v} is not bound by the left-hand side"));
        }
        Ok(())
    }
}

/// Parses a rule file: one rule per line, blank lines and `;` comments skipped.
pub fn parse_rules(text: &str) -> Result<Vec<RewriteRule>, ParseError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split(';').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        out.push(RewriteRule::parse(body).map_err(|e| ParseError {
            line: i + 1,
            col: e.col,
            message: e.message,
        })?);
    }
    Ok(out)
}

fn pvar(s: &Sexp) -> Option<String> {
    s.atom()
        .and_then(|a| a.strip_prefix('?'))
        .filter(|v| !v.is_empty())
        .map(str::to_string)
}

fn parse_param(s: &Sexp) -> Result<Param, ParseError> {
    if let Some(v) = pvar(s) {
        return Ok(Param::Var(v));
    }
    match s {
        Sexp::Atom(a, ..) => a
            .parse()
            .map(Param::Const)
            .or_else(|_| s.err("bad parameter")),
        Sexp::List(items, ..) => {
            let head = items.first().and_then(Sexp::atom);
            match (head, items.len()) {
                (Some("width"), 2) => pvar(&items[1])
                    .map(Param::Width)
                    .ok_or(())
                    .or_else(|_| items[1].err("expected ?var")),
                (Some(op @ ("+" | "-" | "*")), 3) => {
                    let a = Box::new(parse_param(&items[1])?);
                    let b = Box::new(parse_param(&items[2])?);
                    Ok(match op {
                        "+" => Param::Add(a, b),
                        "-" => Param::Sub(a, b),
                        _ => Param::Mul(a, b),
                    })
                }
                _ => s.err("bad parameter"),
            }
        }
    }
}

fn parse_pattern(s: &Sexp) -> Result<Pattern, ParseError> {
    if let Some(v) = pvar(s) {
        return Ok(Pattern::Var(v));
    }
    match s {
        Sexp::Atom(a, ..) => match a.as_str() {
            "true" => Ok(Pattern::Lit(Literal::Bool(true))),
            "false" => Ok(Pattern::Lit(Literal::Bool(false))),
            _ => a
                .parse::<BigInt>()
                .map(|i| Pattern::Lit(Literal::Int(i)))
                .or_else(|_| s.err(format!("bad pattern `{a}`"))),
        },
        Sexp::List(items, ..) => {
            let Some(head) = items.first().and_then(Sexp::atom) else {
                return s.err("expected an operator");
            };
            let kids = |from: usize| {
                items[from..]
                    .iter()
                    .map(parse_pattern)
                    .collect::<Result<Vec<_>, _>>()
            };
            match head {
                "lit" if items.len() == 2 => Ok(Pattern::LitParam(parse_param(&items[1])?)),
                "extract" if items.len() == 4 => Ok(Pattern::Node(
                    Head::Extract(parse_param(&items[1])?, parse_param(&items[2])?),
                    kids(3)?,
                )),
                "nondet" if items.len() == 3 => Ok(Pattern::Node(Head::Nondet, kids(1)?)),
                "assume" if items.len() == 3 => Ok(Pattern::Node(Head::Assume, kids(1)?)),
                _ => {
                    let op = Op::from_name(head)
                        .ok_or(())
                        .or_else(|_| items[0].err(format!("unknown operator `{head}`")))?;
                    let args = kids(1)?;
                    let arity_ok = match &op {
                        Op::Neg | Op::Not | Op::Get(_) => args.len() == 1,
                        Op::Mk => !args.is_empty(),
                        Op::Extract { .. } => args.len() == 1,
                        _ => args.len() == 2,
                    };
                    if !arity_ok {
                        return s.err(format!("wrong number of arguments for `{head}`"));
                    }
                    let head = match op {
                        Op::Extract { hi, lo } => {
                            Head::Extract(Param::Const(hi as i64), Param::Const(lo as i64))
                        }
                        op => Head::Op(op),
                    };
                    Ok(Pattern::Node(head, args))
                }
            }
        }
    }
}

fn parse_guard(s: &Sexp) -> Result<Guard, ParseError> {
    if let Sexp::List(items, ..) = s {
        match (items.first().and_then(Sexp::atom), items.len()) {
            (Some("live"), 2) => {
                if let Some(v) = pvar(&items[1]) {
                    return Ok(Guard::Live(v));
                }
            }
            (Some("="), 3) => {
                return Ok(Guard::Eq(parse_param(&items[1])?, parse_param(&items[2])?))
            }
            _ => {}
        }
    }
    s.err("expected `(live ?x)` or `(= p q)`")
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Const(c) => write!(f, "{c}"),
            Param::Var(v) => write!(f, "?{v}"),
            Param::Width(v) => write!(f, "(width ?{v})"),
            Param::Add(a, b) => write!(f, "(+ {a} {b})"),
            Param::Sub(a, b) => write!(f, "(- {a} {b})"),
            Param::Mul(a, b) => write!(f, "(* {a} {b})"),
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Var(v) => write!(f, "?{v}"),
            Pattern::Lit(l) => write!(f, "{l}"),
            Pattern::LitParam(p) => write!(f, "(lit {p})"),
            Pattern::Node(h, kids) => {
                match h {
                    Head::Op(op) => write!(f, "({}", op.name())?,
                    Head::Extract(a, b) => write!(f, "(extract {a} {b}")?,
                    Head::Nondet => write!(f, "(nondet")?,
                    Head::Assume => write!(f, "(assume")?,
                }
                for k in kids {
                    write!(f, " {k}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for RewriteRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            RuleKind::Exact => "exact",
            RuleKind::OverApprox => "approx",
        };
        write!(f, "{} => {} {kind}", self.lhs, self.rhs)?;
        if !self.guards.is_empty() {
            write!(f, " when")?;
            for g in &self.guards {
                match g {
                    Guard::Live(v) => write!(f, " (live ?{v})")?,
                    Guard::Eq(a, b) => write!(f, " (= {a} {b})")?,
                }
            }
        }
        Ok(())
    }
}

const DEFAULT_EXACT: &str = "
(concat (extract ?a ?b ?x) (extract ?c ?d ?x)) => (extract ?a ?d ?x) exact when (= ?c (- ?b 1))
(extract ?h 0 ?x) => ?x exact when (= (width ?x) (+ ?h 1))
(extract ?a ?b (extract ?c ?d ?x)) => (extract (+ ?a ?d) (+ ?b ?d) ?x) exact
(nondet ?x ?x) => ?x exact
(eq ?x ?x) => true exact when (live ?x)
(and ?x ?x) => ?x exact
(mul 1 ?x) => ?x exact
(add (add (lit ?a) ?x) (lit ?b)) => (add ?x (lit (+ ?a ?b))) exact
";

const DEFAULT_APPROX: &str = "
(mul 0 ?x) => 0 approx
(sub ?x ?x) => 0 approx
(div ?x ?x) => 1 approx
";

const AGGRESSIVE: &str = "
(lt (div 1 ?x) 2) => true approx
";

/// The shipped rulesets: (exact, over-approximating).
pub fn default_rulesets() -> (Vec<RewriteRule>, Vec<RewriteRule>) {
    (
        parse_rules(DEFAULT_EXACT).expect("built-in rules parse"),
        parse_rules(DEFAULT_APPROX).expect("built-in rules parse"),
    )
}

/// Over-approximating rules that are valid but not enabled by default.
pub fn aggressive_rules() -> Vec<RewriteRule> {
    parse_rules(AGGRESSIVE).expect("built-in rules parse")
}
