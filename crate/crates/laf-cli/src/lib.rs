//! The `laf` analyzer: parse, translate, simplify, analyze with the selected
//! domains, then report and export.

pub mod args;
pub mod pipeline;
pub mod report;

use std::time::Instant;

use laf_constraint::Direction;
use laf_domain_api::Verdict;

pub use args::{
    AnalyzeArgs, Cli, Command, CompareArgs, DirectionArg, DomainArg, Limit, ReportFormat,
};
pub use pipeline::{
    combine, compare_domains, exit_code, load, load_source, run_domain, run_domains, CliError,
    DomainKind, DomainRun, InputKind, Program, Settings, Status, Timings,
};
pub use report::{CompareReport, Report};

use pipeline::{export, load_rules, solver_config, ExportKind};
use report::{
    AssertionReport, DomainStatus, DomainValue, InputInfo, SettingsInfo, SoundnessReport,
    ValueReport, COMPARE_SCHEMA, REPORT_SCHEMA, SCHEMA_VERSION,
};

fn direction(d: DirectionArg) -> Direction {
    match d {
        DirectionArg::Backward => Direction::Backward,
        DirectionArg::Both => Direction::Both,
    }
}

fn domains(d: DomainArg) -> Vec<DomainKind> {
    match d {
        DomainArg::Interval => vec![DomainKind::Interval],
        DomainArg::Constants => vec![DomainKind::Constants],
        DomainArg::Rewrite => vec![DomainKind::Rewrite],
        DomainArg::Constraint => vec![DomainKind::Constraint],
        DomainArg::Relational => vec![DomainKind::Relational],
        DomainArg::All => DomainKind::ALL.to_vec(),
    }
}

/// Runs `laf analyze` without writing the report.
pub fn analyze(a: &AnalyzeArgs) -> Result<Report, CliError> {
    let mut t = Timings::default();
    let p = load(&a.file, a.unroll, &mut t)?;
    let extra_rules = match &a.rules {
        Some(path) => t.time("rules", || load_rules(path))?,
        None => Vec::new(),
    };
    let settings = Settings {
        prop_limit: a.prop_limit.0,
        direction: direction(a.prop_direction),
        widen_delay: a.widen_delay,
        extra_rules,
        int_window: a.int_window,
    };
    let kinds = domains(a.domain);
    let start = Instant::now();
    let runs = run_domains(&kinds, &p, &settings);
    t.record("analysis", start);
    for r in &runs {
        t.0.push(pipeline::PhaseTime {
            phase: format!("analysis.{}", r.domain.name()),
            millis: r.millis,
        });
    }
    let combined = combine(&runs, p.assertions.len());

    let solver = a
        .solver
        .as_deref()
        .map(|s| solver_config(s, a.solver_timeout));
    let mut exports = Vec::new();
    let start = Instant::now();
    for (kind, path) in [
        (ExportKind::Laf, &a.emit_laf),
        (ExportKind::Smt, &a.emit_smt),
        (ExportKind::Horn, &a.emit_horn),
    ] {
        if let Some(path) = path {
            exports.extend(export(&p, kind, path, solver.as_ref())?);
        }
    }
    if !exports.is_empty() {
        t.record("export", start);
    }

    let names = laf_core::display_names(&p.term);
    let name = |v: laf_core::Var| names[v.index()].clone();
    let assertions = p
        .assertions
        .iter()
        .zip(&combined)
        .enumerate()
        .map(|(i, (site, (status, by)))| AssertionReport {
            index: site.index,
            line: site.line,
            text: site.text.clone(),
            var: name(site.var),
            status: *status,
            decided_by: by.map(|d| d.name().to_string()),
            by_domain: runs
                .iter()
                .map(|r| DomainStatus {
                    domain: r.domain.name().into(),
                    status: r.statuses[i],
                })
                .collect(),
        })
        .collect();
    let values = p
        .values
        .iter()
        .enumerate()
        .map(|(i, (n, v))| ValueReport {
            name: n.clone(),
            var: name(*v),
            by_domain: runs
                .iter()
                .map(|r| DomainValue {
                    domain: r.domain.name().into(),
                    value: r.values[i].clone(),
                })
                .collect(),
        })
        .collect();
    let soundness = runs
        .iter()
        .filter_map(|r| {
            let (verdict, detail) = match r.soundness.as_ref()? {
                Verdict::Ok => ("ok", None),
                Verdict::Counterexample { detail, .. } => ("counterexample", Some(detail.clone())),
                Verdict::Inconclusive(why) => ("inconclusive", Some(why.clone())),
            };
            Some(SoundnessReport {
                domain: r.domain.name().into(),
                verdict: verdict.into(),
                detail,
            })
        })
        .collect();
    let statuses: Vec<Status> = combined.iter().map(|c| c.0).collect();
    Ok(Report {
        schema: REPORT_SCHEMA,
        version: SCHEMA_VERSION,
        input: InputInfo {
            file: a.file.display().to_string(),
            kind: p.kind,
            definitions: p.term.ctx.deep_len(),
        },
        settings: SettingsInfo {
            domains: kinds.iter().map(|k| k.name().to_string()).collect(),
            prop_limit: a.prop_limit.to_string(),
            prop_direction: match a.prop_direction {
                DirectionArg::Backward => "backward",
                DirectionArg::Both => "both",
            }
            .into(),
            widen_delay: a.widen_delay,
            unroll: a.unroll,
            int_window: a.int_window.map(|(lo, hi)| [lo, hi]),
            extra_rules: settings.extra_rules.len(),
        },
        assertions,
        values,
        condition_map: runs.iter().find_map(|r| r.dump.clone()),
        soundness,
        exports,
        timings: t.0,
        exit_code: exit_code(&statuses),
    })
}

/// Runs `laf compare` without writing the table.
pub fn compare(a: &CompareArgs) -> Result<CompareReport, CliError> {
    let p = load(&a.file, a.unroll, &mut Timings::default())?;
    let base = Settings {
        direction: direction(a.prop_direction),
        widen_delay: a.widen_delay,
        ..Settings::default()
    };
    let limits: Vec<Option<usize>> = a.limits.0.iter().map(|l| l.0).collect();
    Ok(CompareReport {
        schema: COMPARE_SCHEMA,
        version: SCHEMA_VERSION,
        file: a.file.display().to_string(),
        rows: compare_domains(&p, &limits, &base),
    })
}

fn emit(text: &str, output: Option<&std::path::Path>) -> Result<(), CliError> {
    match output {
        Some(path) => pipeline::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Runs a command and writes its report; returns the exit code.
pub fn run(cmd: &Command) -> Result<i32, CliError> {
    match cmd {
        Command::Analyze(a) => {
            let r = analyze(a)?;
            let text = match a.report {
                ReportFormat::Text => r.to_text(),
                ReportFormat::Structured => r.to_json(),
            };
            emit(&text, a.output.as_deref())?;
            Ok(r.exit_code)
        }
        Command::Compare(a) => {
            let r = compare(a)?;
            let text = match a.report {
                ReportFormat::Text => r.to_text(),
                ReportFormat::Structured => r.to_json(),
            };
            emit(&text, a.output.as_deref())?;
            Ok(0)
        }
    }
}
