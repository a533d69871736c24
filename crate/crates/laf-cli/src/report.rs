//! Report structures and their text rendering. The structured form is the
//! JSON serialization of [`Report`] and [`CompareReport`].

use std::fmt::Write;

use serde::Serialize;

use crate::pipeline::{CompareRow, ExportRecord, InputKind, PhaseTime, Status};

pub const REPORT_SCHEMA: &str = "laf-analysis-report";
pub const COMPARE_SCHEMA: &str = "laf-compare-report";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub version: u32,
    pub input: InputInfo,
    pub settings: SettingsInfo,
    pub assertions: Vec<AssertionReport>,
    pub values: Vec<ValueReport>,
    /// Every condition map of the constraint domain, when it ran.
    pub condition_map: Option<String>,
    pub soundness: Vec<SoundnessReport>,
    pub exports: Vec<ExportRecord>,
    pub timings: Vec<PhaseTime>,
    pub exit_code: i32,
}

#[derive(Clone, Debug, Serialize)]
pub struct InputInfo {
    pub file: String,
    pub kind: InputKind,
    /// Definitions of the analyzed term, loop bodies included.
    pub definitions: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SettingsInfo {
    pub domains: Vec<String>,
    pub prop_limit: String,
    pub prop_direction: String,
    pub widen_delay: usize,
    pub unroll: usize,
    pub int_window: Option<[i64; 2]>,
    pub extra_rules: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DomainStatus {
    pub domain: String,
    pub status: Status,
}

#[derive(Clone, Debug, Serialize)]
pub struct AssertionReport {
    pub index: usize,
    pub line: Option<usize>,
    pub text: String,
    pub var: String,
    pub status: Status,
    pub decided_by: Option<String>,
    pub by_domain: Vec<DomainStatus>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DomainValue {
    pub domain: String,
    pub value: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValueReport {
    pub name: String,
    pub var: String,
    pub by_domain: Vec<DomainValue>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SoundnessReport {
    pub domain: String,
    /// `ok`, `counterexample` or `inconclusive`.
    pub verdict: String,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareReport {
    pub schema: &'static str,
    pub version: u32,
    pub file: String,
    pub rows: Vec<CompareRow>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut o = String::new();
        let kind = match self.input.kind {
            InputKind::While => "while",
            InputKind::Laf => "laf",
        };
        writeln!(
            o,
            "{} ({kind}, {} definitions)",
            self.input.file, self.input.definitions
        )
        .unwrap();
        writeln!(
            o,
            "domains: {}; prop-limit {}, {} propagation",
            self.settings.domains.join(", "),
            self.settings.prop_limit,
            self.settings.prop_direction
        )
        .unwrap();
        writeln!(o, "\nassertions:").unwrap();
        if self.assertions.is_empty() {
            writeln!(o, "  (none)").unwrap();
        }
        for a in &self.assertions {
            let line = a.line.map_or_else(String::new, |l| format!(" line {l}"));
            let by = a
                .decided_by
                .as_ref()
                .map_or_else(String::new, |d| format!(" by {d}"));
            writeln!(
                o,
                "  #{}{line}: {}  {}{by}",
                a.index,
                a.text,
                a.status.as_str()
            )
            .unwrap();
        }
        if !self.values.is_empty() {
            writeln!(o, "\nvalues:").unwrap();
            for v in &self.values {
                writeln!(o, "  {}", v.name).unwrap();
                for d in &v.by_domain {
                    writeln!(o, "    {:<11} {}", d.domain, d.value).unwrap();
                }
            }
        }
        if let Some(m) = &self.condition_map {
            writeln!(o, "\ncondition maps:").unwrap();
            for line in m.lines() {
                writeln!(o, "  {line}").unwrap();
            }
        }
        if !self.soundness.is_empty() {
            writeln!(o, "\nsoundness against the concrete semantics:").unwrap();
            for s in &self.soundness {
                let detail = s
                    .detail
                    .as_ref()
                    .map_or_else(String::new, |d| format!(" ({d})"));
                writeln!(o, "  {:<11} {}{detail}", s.domain, s.verdict).unwrap();
            }
        }
        if !self.exports.is_empty() {
            writeln!(o, "\nexports:").unwrap();
            for e in &self.exports {
                let a = e.assertion.map_or_else(String::new, |i| format!(" #{i}"));
                let solver = e
                    .solver
                    .as_ref()
                    .map_or_else(String::new, |s| format!(": {s}"));
                let note = e
                    .note
                    .as_ref()
                    .map_or_else(String::new, |n| format!(" ({n})"));
                writeln!(o, "  {}{a} {}{solver}{note}", e.kind, e.path).unwrap();
            }
        }
        let times: Vec<String> = self
            .timings
            .iter()
            .map(|t| format!("{} {:.1} ms", t.phase, t.millis))
            .collect();
        writeln!(o, "\ntime: {}", times.join(", ")).unwrap();
        o
    }
}

impl CompareReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut o = format!(
            "{}\n{:>10} {:>9} {:>8} {:>10}\n",
            self.file, "prop-limit", "unproved", "refined", "time (ms)"
        );
        for r in &self.rows {
            writeln!(
                o,
                "{:>10} {:>9} {:>8} {:>10.1}",
                r.prop_limit, r.unproved, r.refined, r.millis
            )
            .unwrap();
        }
        o
    }
}
