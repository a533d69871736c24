//! Loading inputs, running domains, combining their verdicts, exporting.

use std::path::{Path, PathBuf};
use std::time::Instant;

use laf_constraint::{ConstraintConfig, ConstraintDomain, Direction};
use laf_core::{check_wf, parse_term, print_term, Literal, Sort, Term, Var};
use laf_domain_api::{soundness_check, AbstractDomain, Verdict};
use laf_export::{emit_fo, emit_horn, to_fo, to_horn, SolverAnswer, SolverConfig};
use laf_lattices::{AbsValue, BoolSet, IntFlavor};
use laf_nonrel::{NonRel, NonRelConfig};
use laf_relational::RelationalLift;
use laf_rewrite::{
    check_rule, default_rulesets, parse_rules, CheckConfig, GammaMode, RewriteDomain, RewriteRule,
    RuleKind,
};
use laf_semantics::{EnumBudget, Value};
use laf_while::{parse_while, simplify_translation, translate, TranslateOptions};
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Input { path: PathBuf, msg: String },
    #[error("rules {path}: {msg}")]
    Rules { path: PathBuf, msg: String },
    #[error("solver: {0}")]
    Solver(String),
}

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseTime {
    pub phase: String,
    pub millis: f64,
}

#[derive(Clone, Debug, Default)]
pub struct Timings(pub Vec<PhaseTime>);

impl Timings {
    pub fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.record(phase, start);
        out
    }

    pub fn record(&mut self, phase: &str, start: Instant) {
        self.0.push(PhaseTime {
            phase: phase.to_string(),
            millis: start.elapsed().as_secs_f64() * 1e3,
        });
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    While,
    Laf,
}

#[derive(Clone, Debug)]
pub struct AssertionSite {
    /// 1-based.
    pub index: usize,
    pub line: Option<usize>,
    pub text: String,
    pub var: Var,
}

/// An input ready for analysis.
#[derive(Clone, Debug)]
pub struct Program {
    pub kind: InputKind,
    pub term: Term,
    pub assertions: Vec<AssertionSite>,
    /// Named expressions whose final values are reported.
    pub values: Vec<(String, Var)>,
}

impl Program {
    /// A term read directly. Its assertions are the top-level booleans whose
    /// names start with `assert`, or else a boolean result.
    pub fn from_term(term: Term) -> Program {
        let mut assertions = Vec::new();
        for d in &term.ctx.defs {
            let name = term.vars.name(d.var);
            if name.starts_with("assert") && term.vars.sort(d.var) == &Sort::Bool {
                assertions.push(d.var);
            }
        }
        if assertions.is_empty() && term.vars.sort(term.result) == &Sort::Bool {
            assertions.push(term.result);
        }
        let assertions = assertions
            .into_iter()
            .enumerate()
            .map(|(i, v)| AssertionSite {
                index: i + 1,
                line: None,
                text: term.vars.name(v).to_string(),
                var: v,
            })
            .collect();
        let values = term
            .ctx
            .defs
            .iter()
            .map(|d| (term.vars.name(d.var).to_string(), d.var))
            .collect();
        Program {
            kind: InputKind::Laf,
            term,
            assertions,
            values,
        }
    }
}

/// Parses, translates and simplifies an input file.
pub fn load(path: &Path, unroll: usize, t: &mut Timings) -> Result<Program, CliError> {
    let text = read(path)?;
    let kind = if path.extension().is_some_and(|e| e == "laf") {
        InputKind::Laf
    } else {
        InputKind::While
    };
    load_source(&text, kind, unroll, t).map_err(|msg| CliError::Input {
        path: path.to_path_buf(),
        msg,
    })
}

pub fn load_source(
    text: &str,
    kind: InputKind,
    unroll: usize,
    t: &mut Timings,
) -> Result<Program, String> {
    match kind {
        InputKind::Laf => {
            let term = t
                .time("parse", || parse_term(text))
                .map_err(|e| e.to_string())?;
            check_wf(&term).map_err(|ds| {
                ds.iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join("; ")
            })?;
            Ok(Program::from_term(term))
        }
        InputKind::While => {
            let p = t
                .time("parse", || parse_while(text))
                .map_err(|e| e.to_string())?;
            let tr = t
                .time("translate", || translate(&p, &TranslateOptions { unroll }))
                .map_err(|e| e.to_string())?;
            let tr = t.time("simplify", || simplify_translation(&tr));
            Ok(Program {
                kind,
                assertions: tr
                    .assertions
                    .iter()
                    .map(|a| AssertionSite {
                        index: a.index,
                        line: Some(a.line),
                        text: a.text.clone(),
                        var: a.var,
                    })
                    .collect(),
                values: tr.bindings.clone(),
                term: tr.term,
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    ProvedTrue,
    ProvedFalse,
    Unknown,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::ProvedTrue => "proved-true",
            Status::ProvedFalse => "proved-false",
            Status::Unknown => "unknown",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Interval,
    Constants,
    Rewrite,
    Constraint,
    Relational,
}

impl DomainKind {
    pub const ALL: [DomainKind; 5] = [
        DomainKind::Interval,
        DomainKind::Constants,
        DomainKind::Rewrite,
        DomainKind::Constraint,
        DomainKind::Relational,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DomainKind::Interval => "interval",
            DomainKind::Constants => "constants",
            DomainKind::Rewrite => "rewrite",
            DomainKind::Constraint => "constraint",
            DomainKind::Relational => "relational",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Settings {
    pub prop_limit: Option<usize>,
    pub direction: Direction,
    pub widen_delay: usize,
    /// Rewrite rules used besides the shipped exact ones.
    pub extra_rules: Vec<RewriteRule>,
    /// Enables the per-input soundness check.
    pub int_window: Option<(i64, i64)>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            prop_limit: None,
            direction: Direction::Both,
            widen_delay: 0,
            extra_rules: Vec::new(),
            int_window: None,
        }
    }
}

impl Settings {
    pub fn constraint(&self) -> ConstraintDomain {
        ConstraintDomain::new(ConstraintConfig {
            prop_limit: self.prop_limit,
            direction: self.direction,
            widen_delay: self.widen_delay,
            ..ConstraintConfig::default()
        })
    }

    pub fn nonrel(&self, flavor: IntFlavor) -> NonRel {
        NonRel::new(NonRelConfig {
            flavor,
            widen_delay: self.widen_delay,
            ..NonRelConfig::default()
        })
    }

    pub fn rewrite(&self) -> RewriteDomain {
        let mut rules = default_rulesets().0;
        rules.extend(self.extra_rules.iter().cloned());
        let mode = if rules.iter().any(|r| r.kind == RuleKind::OverApprox) {
            GammaMode::OverApprox
        } else {
            GammaMode::Exact
        };
        let d = RewriteDomain::new(rules, mode);
        match self.int_window {
            Some((lo, hi)) => d.with_budget(EnumBudget::with_window(lo, hi)),
            None => d,
        }
    }
}

/// Reads a rules file and rejects rules failing the validity check.
pub fn load_rules(path: &Path) -> Result<Vec<RewriteRule>, CliError> {
    let err = |msg: String| CliError::Rules {
        path: path.to_path_buf(),
        msg,
    };
    let rules = parse_rules(&read(path)?).map_err(|e| err(e.to_string()))?;
    for (i, r) in rules.iter().enumerate() {
        check_rule(r, &CheckConfig::default()).map_err(|e| err(format!("rule {}: {e}", i + 1)))?;
    }
    Ok(rules)
}

/// Outcome of one domain on one input.
#[derive(Clone, Debug)]
pub struct DomainRun {
    pub domain: DomainKind,
    /// Per assertion, in order.
    pub statuses: Vec<Status>,
    /// Per reported expression, in order.
    pub values: Vec<String>,
    /// Condition maps of the constraint domain.
    pub dump: Option<String>,
    pub soundness: Option<Verdict>,
    pub millis: f64,
}

fn bool_status(b: Option<BoolSet>) -> Status {
    match b {
        Some(b) if !b.f => Status::ProvedTrue,
        Some(b) if b == BoolSet::FALSE => Status::ProvedFalse,
        _ => Status::Unknown,
    }
}

fn show_value(v: Option<&AbsValue>) -> String {
    v.map_or_else(|| "-".to_string(), |a| a.to_string())
}

fn check<D: AbstractDomain>(d: &D, term: &Term, window: Option<(i64, i64)>) -> Option<Verdict> {
    window.map(|(lo, hi)| soundness_check(d, term, &EnumBudget::with_window(lo, hi)))
}

pub fn run_domain(kind: DomainKind, p: &Program, s: &Settings) -> DomainRun {
    let start = Instant::now();
    let t = &p.term;
    let (statuses, values, dump, soundness) = match kind {
        DomainKind::Interval | DomainKind::Constants => {
            let flavor = if kind == DomainKind::Interval {
                IntFlavor::Interval
            } else {
                IntFlavor::Constant
            };
            let d = s.nonrel(flavor);
            let st = d.eval_term(t);
            let get = |v: Var| st.vals.get(v.index()).and_then(Option::as_ref);
            (
                p.assertions
                    .iter()
                    .map(|a| bool_status(get(a.var).and_then(AbsValue::as_bools)))
                    .collect(),
                p.values.iter().map(|(_, v)| show_value(get(*v))).collect(),
                None,
                check(&d, t, s.int_window),
            )
        }
        DomainKind::Rewrite => {
            let d = s.rewrite();
            let st = d.run(t);
            let lit = |v: Var| st.image(v).and_then(|o| st.literal_of(o));
            let statuses = p
                .assertions
                .iter()
                .map(|a| match lit(a.var) {
                    Some(Literal::Bool(true)) => Status::ProvedTrue,
                    Some(Literal::Bool(false)) => Status::ProvedFalse,
                    _ => Status::Unknown,
                })
                .collect();
            let values = p
                .values
                .iter()
                .map(|(_, v)| match (lit(*v), st.image(*v)) {
                    (Some(l), _) => Value::from_literal(l).to_string(),
                    (None, Some(o)) => st.vars.name(o).to_string(),
                    (None, None) => "-".to_string(),
                })
                .collect();
            (statuses, values, None, check(&d, t, s.int_window))
        }
        DomainKind::Constraint => {
            let d = s.constraint();
            let st = d.run(t);
            let statuses = constraint_statuses(&d, &st, p);
            let values = p
                .values
                .iter()
                .map(|(_, v)| match d.binding(&st, *v) {
                    Some(es) if !es.is_empty() => es
                        .iter()
                        .map(|(c, a)| format!("{} ⊩ {a}", st.show_cond(c)))
                        .collect::<Vec<_>>()
                        .join(", "),
                    _ => "-".to_string(),
                })
                .collect();
            (
                statuses,
                values,
                Some(st.dump()),
                check(&d, t, s.int_window),
            )
        }
        DomainKind::Relational => {
            let d = RelationalLift;
            let st = d.run(t);
            let statuses = p
                .assertions
                .iter()
                .map(|a| match d.truth(&st, a.var) {
                    Some(true) => Status::ProvedTrue,
                    Some(false) => Status::ProvedFalse,
                    None => Status::Unknown,
                })
                .collect();
            let names = laf_core::display_names(t);
            let values = p
                .values
                .iter()
                .map(
                    |(_, v)| match st.elems.get(v.index()).and_then(Option::as_ref) {
                        Some(e) => e.show_with(&|x| names[x.index()].clone()),
                        None => "-".to_string(),
                    },
                )
                .collect();
            (statuses, values, None, check(&d, t, s.int_window))
        }
    };
    // A domain caught out by the concrete semantics proves nothing.
    let statuses = if soundness.as_ref().is_some_and(Verdict::is_counterexample) {
        vec![Status::Unknown; p.assertions.len()]
    } else {
        statuses
    };
    DomainRun {
        domain: kind,
        statuses,
        values,
        dump,
        soundness,
        millis: start.elapsed().as_secs_f64() * 1e3,
    }
}

/// Runs the domains concurrently; results come back in the given order.
pub fn run_domains(kinds: &[DomainKind], p: &Program, s: &Settings) -> Vec<DomainRun> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = kinds
            .iter()
            .map(|k| scope.spawn(move || run_domain(*k, p, s)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("domain run panicked"))
            .collect()
    })
}

/// Pointwise best status per assertion and the first domain deciding it.
/// A proof of truth wins over one of falsity: both together mean the
/// assertion is never evaluated.
pub fn combine(runs: &[DomainRun], n: usize) -> Vec<(Status, Option<DomainKind>)> {
    (0..n)
        .map(|i| {
            [Status::ProvedTrue, Status::ProvedFalse]
                .into_iter()
                .find_map(|want| {
                    runs.iter()
                        .find(|r| r.statuses[i] == want)
                        .map(|r| (want, Some(r.domain)))
                })
                .unwrap_or((Status::Unknown, None))
        })
        .collect()
}

/// 0 when every assertion is proved, 2 when one is proved false, else 1.
pub fn exit_code(statuses: &[Status]) -> i32 {
    if statuses.contains(&Status::ProvedFalse) {
        2
    } else if statuses.contains(&Status::Unknown) {
        1
    } else {
        0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExportRecord {
    pub kind: String,
    pub path: String,
    pub assertion: Option<usize>,
    pub solver: Option<String>,
    pub note: Option<String>,
}

/// `out.smt2` becomes `out.2.smt2` when several scripts share one path.
pub fn indexed_path(path: &Path, index: usize, count: usize) -> PathBuf {
    if count <= 1 {
        return path.to_path_buf();
    }
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{index}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{index}"),
    };
    path.with_file_name(name)
}

fn is_top_level(t: &Term, v: Var) -> bool {
    t.ctx.defs.iter().any(|d| d.var == v)
}

pub fn solver_config(template: &str, timeout_secs: u64) -> SolverConfig {
    SolverConfig {
        command: template.split_whitespace().map(String::from).collect(),
        timeout: std::time::Duration::from_secs(timeout_secs),
    }
}

fn answer_text(a: SolverAnswer) -> String {
    match a {
        SolverAnswer::Sat => "sat",
        SolverAnswer::Unsat => "unsat",
        SolverAnswer::Unknown => "unknown",
    }
    .to_string()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportKind {
    Laf,
    Smt,
    Horn,
}

/// Writes the requested exports and runs the solver on the scripts.
pub fn export(
    p: &Program,
    kind: ExportKind,
    path: &Path,
    solver: Option<&SolverConfig>,
) -> Result<Vec<ExportRecord>, CliError> {
    let t = &p.term;
    let mut out = Vec::new();
    let mut emit = |text: String,
                    file: PathBuf,
                    assertion: Option<usize>,
                    name: &str|
     -> Result<(), CliError> {
        write(&file, &text)?;
        let solver = match solver {
            Some(cfg) if kind != ExportKind::Laf => {
                Some(cfg.run(&file).map(answer_text).map_err(CliError::Solver)?)
            }
            _ => None,
        };
        out.push(ExportRecord {
            kind: name.to_string(),
            path: file.display().to_string(),
            assertion,
            solver,
            note: None,
        });
        Ok(())
    };
    match kind {
        ExportKind::Laf => emit(print_term(t), path.to_path_buf(), None, "laf")?,
        ExportKind::Smt | ExportKind::Horn => {
            let name = if kind == ExportKind::Smt {
                "smt"
            } else {
                "horn"
            };
            let sites: Vec<&AssertionSite> = p
                .assertions
                .iter()
                .filter(|a| is_top_level(t, a.var))
                .collect();
            if sites.is_empty() && kind == ExportKind::Horn {
                emit(emit_horn(&to_horn(t, None)), path.to_path_buf(), None, name)?;
            }
            let f = (kind == ExportKind::Smt).then(|| to_fo(t));
            for a in &sites {
                let file = indexed_path(path, a.index, sites.len());
                let text = match &f {
                    Some(f) => emit_fo(f, a.var, &Value::Bool(false)),
                    None => emit_horn(&to_horn(t, Some(a.var))),
                };
                emit(text, file, Some(a.index), name)?;
            }
            for a in p.assertions.iter().filter(|a| !is_top_level(t, a.var)) {
                out.push(ExportRecord {
                    kind: name.to_string(),
                    path: String::new(),
                    assertion: Some(a.index),
                    solver: None,
                    note: Some("assertion inside a loop body is not exported".into()),
                });
            }
        }
    }
    Ok(out)
}

/// One row of the propagation-limit comparison.
#[derive(Clone, Debug, Serialize)]
pub struct CompareRow {
    pub prop_limit: String,
    pub unproved: usize,
    /// Expressions whose value is strictly smaller than under the previous limit.
    pub refined: usize,
    pub millis: f64,
}

/// Per-variable constraint values and assertion statuses under one limit.
pub fn constraint_snapshot(p: &Program, s: &Settings) -> (Vec<Option<AbsValue>>, Vec<Status>) {
    let d = s.constraint();
    let st = d.run(&p.term);
    let vals = (0..p.term.vars.len())
        .map(|i| d.value_of(&st, Var(i as u32)))
        .collect();
    (vals, constraint_statuses(&d, &st, p))
}

fn constraint_statuses(
    d: &ConstraintDomain,
    st: &laf_constraint::ConstraintState,
    p: &Program,
) -> Vec<Status> {
    p.assertions
        .iter()
        .map(|a| match d.status(st, a.var) {
            laf_constraint::Status::Proved => Status::ProvedTrue,
            laf_constraint::Status::False => Status::ProvedFalse,
            laf_constraint::Status::Unknown => Status::Unknown,
        })
        .collect()
}

pub fn compare_domains(p: &Program, limits: &[Option<usize>], base: &Settings) -> Vec<CompareRow> {
    let mut rows = Vec::new();
    let mut prev: Option<Vec<Option<AbsValue>>> = None;
    for lim in limits {
        let start = Instant::now();
        let s = Settings {
            prop_limit: *lim,
            ..base.clone()
        };
        let (vals, statuses) = constraint_snapshot(p, &s);
        let refined = prev.as_ref().map_or(0, |prev| {
            prev.iter()
                .zip(&vals)
                .filter(|(a, b)| matches!((a, b), (Some(a), Some(b)) if b.leq(a) && !a.leq(b)))
                .count()
        });
        rows.push(CompareRow {
            prop_limit: lim.map_or_else(|| "inf".to_string(), |n| n.to_string()),
            unproved: statuses
                .iter()
                .filter(|s| **s != Status::ProvedTrue)
                .count(),
            refined,
            millis: start.elapsed().as_secs_f64() * 1e3,
        });
        prev = Some(vals);
    }
    rows
}
