use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(format!(
        "{}/../../fixtures/{name}",
        env!("CARGO_MANIFEST_DIR")
    ))
}

fn laf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_laf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn value<'a>(r: &'a Value, name: &str) -> &'a str {
    r["values"]
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["name"] == name)
        .unwrap()["by_domain"][0]["value"]
        .as_str()
        .unwrap()
}

#[test]
fn abs_example_constraint_report() {
    let abs = fixture("abs_example.while");
    let o = laf(&[
        "analyze",
        abs.to_str().unwrap(),
        "--domain",
        "constraint",
        "--prop-limit",
        "inf",
        "--report",
        "structured",
    ]);
    assert_eq!(code(&o), 1, "first assertion stays unknown");
    let r = json(&o);
    assert_eq!(r["schema"], "laf-analysis-report");
    assert_eq!(r["version"], 1);
    assert_eq!(r["exit_code"], 1);
    assert_eq!(
        value(&r, "x"),
        "true ⊩ [-∞;+∞], c1 ⊩ [-∞;-1], ¬c1 ⊩ [0;+∞], c1 ∧ c2 ⊩ [-8;-1], ¬c1 ∧ c2 ⊩ [0;8]"
    );
    assert_eq!(value(&r, "xdiv"), "c2 ⊩ [0;0]");
    let a = &r["assertions"][1];
    assert_eq!(a["text"], "c4");
    assert_eq!(a["status"], "proved-true");
    assert_eq!(a["decided_by"], "constraint");
    assert!(r["condition_map"].as_str().unwrap().contains("c2 ⊩ {true}"));
}

#[test]
fn counting_loop_by_domain() {
    let f = fixture("counting_loop.while");
    let f = f.to_str().unwrap();
    assert_eq!(code(&laf(&["analyze", f, "--domain", "interval"])), 1);
    let o = laf(&["analyze", f, "--domain", "relational"]);
    assert_eq!(code(&o), 0);
    assert!(
        stdout(&o).contains("proved-true by relational"),
        "{}",
        stdout(&o)
    );
    // The product takes the best status.
    assert_eq!(code(&laf(&["analyze", f])), 0);
}

#[test]
fn proved_false_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "bad.while", "x := 1;\nassert(x == 2);\n");
    let o = laf(&["analyze", &f, "--report", "structured"]);
    assert_eq!(code(&o), 2);
    assert_eq!(json(&o)["assertions"][0]["status"], "proved-false");
}

#[test]
fn tool_errors_exit_three() {
    assert_eq!(code(&laf(&["analyze", "/nonexistent/input.while"])), 3);
    assert_eq!(code(&laf(&["analyze", "--no-such-flag", "x.while"])), 3);
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "broken.while", "x := ;\n");
    let o = laf(&["analyze", &f]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("laf:"));
    let t = write(dir.path(), "broken.laf", "(let x int (add y))(in x)");
    assert_eq!(code(&laf(&["analyze", &t])), 3);
}

#[test]
fn invalid_rules_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let abs = fixture("abs_example.while");
    let bad = write(dir.path(), "bad.rules", "(add ?a ?b) => ?a exact\n");
    let o = laf(&["analyze", abs.to_str().unwrap(), "--rules", &bad]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let garbled = write(dir.path(), "garbled.rules", "(add ?a => \n");
    assert_eq!(
        code(&laf(&[
            "analyze",
            abs.to_str().unwrap(),
            "--rules",
            &garbled
        ])),
        3
    );

    let good = write(
        dir.path(),
        "good.rules",
        "(add ?x 0) => ?x exact ; right identity\n",
    );
    let o = laf(&[
        "analyze",
        abs.to_str().unwrap(),
        "--rules",
        &good,
        "--report",
        "structured",
    ]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["settings"]["extra_rules"], 1);
}

#[test]
fn compare_rows_follow_the_limits() {
    let abs = fixture("abs_example.while");
    let o = laf(&["compare", abs.to_str().unwrap(), "--report", "structured"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert_eq!(r["schema"], "laf-compare-report");
    let rows = r["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    let unproved: Vec<u64> = rows
        .iter()
        .map(|r| r["unproved"].as_u64().unwrap())
        .collect();
    assert!(unproved.windows(2).all(|w| w[1] <= w[0]), "{unproved:?}");
    assert!(unproved[3] < unproved[0], "{unproved:?}");

    let o = laf(&[
        "compare",
        abs.to_str().unwrap(),
        "--limits",
        "0,inf",
        "--report",
        "structured",
    ]);
    assert_eq!(json(&o)["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn straight_line_assertion_is_identical_across_limits() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "line.while",
        "a := 3;\nb := a + 4;\nassert(b == 7);\n",
    );
    let r = json(&laf(&["compare", &f, "--report", "structured"]));
    for row in r["rows"].as_array().unwrap() {
        assert_eq!(row["unproved"], 0);
        assert_eq!(row["refined"], 0);
    }
}

#[test]
fn exports_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture("counting_loop.while");
    let laf_out = dir.path().join("out.laf");
    let smt = dir.path().join("out.smt2");
    let horn = dir.path().join("out.horn.smt2");
    let o = laf(&[
        "analyze",
        f.to_str().unwrap(),
        "--domain",
        "interval",
        "--emit-laf",
        laf_out.to_str().unwrap(),
        "--emit-smt",
        smt.to_str().unwrap(),
        "--emit-horn",
        horn.to_str().unwrap(),
        "--report",
        "structured",
    ]);
    assert_eq!(code(&o), 1);
    let r = json(&o);
    assert_eq!(r["exports"].as_array().unwrap().len(), 3);
    let term = std::fs::read_to_string(&laf_out).unwrap();
    laf_core::check_wf(&laf_core::parse_term(&term).unwrap()).unwrap();
    assert!(std::fs::read_to_string(&smt)
        .unwrap()
        .contains("(check-sat)"));
    assert!(std::fs::read_to_string(&horn).unwrap().contains("HORN"));

    // The exported term analyzes like the program.
    let o = laf(&[
        "analyze",
        laf_out.to_str().unwrap(),
        "--domain",
        "relational",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn soundness_check_reports_ok() {
    let abs = fixture("abs_example.while");
    let o = laf(&[
        "analyze",
        abs.to_str().unwrap(),
        "--int-window",
        "-1..1",
        "--report",
        "structured",
    ]);
    let r = json(&o);
    let s = r["soundness"].as_array().unwrap();
    assert_eq!(s.len(), 5);
    for d in s {
        assert_eq!(d["verdict"], "ok", "{d}");
    }
    assert_eq!(r["settings"]["int_window"], serde_json::json!([-1, 1]));
}

#[test]
fn laf_input_uses_assert_names() {
    let o = laf(&[
        "analyze",
        fixture("memory_example.laf").to_str().unwrap(),
        "--domain",
        "rewrite",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn output_file_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.txt");
    let abs = fixture("abs_example.while");
    let o = laf(&[
        "analyze",
        abs.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("assertions:"));

    // Everything but the timings is stable.
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("timings");
        v
    };
    let a = strip(json(&laf(&[
        "analyze",
        abs.to_str().unwrap(),
        "--report",
        "structured",
    ])));
    let b = strip(json(&laf(&[
        "analyze",
        abs.to_str().unwrap(),
        "--report",
        "structured",
    ])));
    assert_eq!(a, b);
}
