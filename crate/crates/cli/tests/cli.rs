use std::process::{Command, Output};

use serde_json::Value;

fn qpoly(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpoly"))
        .args(args)
        .env_remove("QPOLY_PRECISION_DIGITS")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn value_of(doc: &Value) -> f64 {
    doc["result"]["value"].as_str().unwrap().parse().unwrap()
}

#[test]
fn eval_gamma_trivial_point() {
    let out = qpoly(&["eval", "--fn", "gamma_q", "--q", "0.5", "--x", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(value_of(&json_of(&out)), 1.0);
}

#[test]
fn eval_psi_reports_reflection_residual() {
    let out = qpoly(&["eval", "--fn", "psi_q", "--q", "2", "--x", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_of(&out);
    assert!(doc["result"]["reflection_residual"].as_f64().unwrap() < 1e-18);
    assert!(doc["result"]["terms_used"].as_u64().unwrap() > 0);
}

#[test]
fn eval_g_nonnegative() {
    let out = qpoly(&["eval", "--fn", "G", "--m", "1", "--q", "0.5", "--c", "0.5", "--x", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(value_of(&json_of(&out)) >= 0.0);
}

#[test]
fn eval_flag_and_domain_errors() {
    assert_eq!(qpoly(&["eval", "--fn", "G", "--q", "2", "--x", "1", "--c", "0.5"]).status.code(), Some(2));
    assert_eq!(qpoly(&["eval", "--fn", "nope", "--q", "2", "--x", "1"]).status.code(), Some(2));
    assert_eq!(qpoly(&["eval", "--fn", "psi_q", "--q", "1", "--x", "1"]).status.code(), Some(3));
    assert_eq!(qpoly(&["eval", "--fn", "psi_q", "--q", "2", "--x", "-1"]).status.code(), Some(3));
    let starved = qpoly(&["--max-terms", "3", "eval", "--fn", "psi_q", "--q", "1.01", "--x", "1"]);
    assert_eq!(starved.status.code(), Some(3));
}

#[test]
fn certify_theorem_one_both_methods() {
    let out = qpoly(&[
        "certify", "--target", "G", "--m", "3", "--q", "2", "--c", "0.5", "--k-max", "200", "--method", "both",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_of(&out);
    assert_eq!(doc["status"], "Certified");
    assert_eq!(doc["reports"]["series"]["status"], "Certified");
    assert_eq!(doc["reports"]["grid"]["status"], "Certified");
    assert_eq!(doc["config"]["parameters"]["grid"]["grid_points"], 99);
}

#[test]
fn certify_theorem_two_s3() {
    let out = qpoly(&[
        "certify", "--target", "F", "--r", "5", "--m", "4", "--n", "4", "--s", "3", "--q", "0.5", "--c", "0.25",
        "--k-max", "200",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn certify_unproven_regime_exits_four() {
    let out = qpoly(&["certify", "--target", "F", "--r", "3", "--m", "2", "--n", "2", "--s", "1", "--q", "2", "--c", "0.5"]);
    assert_eq!(out.status.code(), Some(4));
    let doc = json_of(&out);
    assert_eq!(doc["status"], "Inconclusive");
    assert_eq!(doc["config"]["parameters"]["regime"], "UnprovenRegime");
}

#[test]
fn certify_csv_schema() {
    let out = qpoly(&["--format", "csv", "certify", "--target", "G", "--m", "2", "--q", "0.5", "--c", "0.25", "--k-max", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,coefficient,margin,regime"));
    assert_eq!(lines.count(), 9);
}

#[test]
fn verify_examples() {
    let out = qpoly(&["verify", "--lemma", "2.1", "--r-max", "8", "--k-max", "300"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["reports"][0]["violations"].as_array().unwrap().len(), 0);

    let out = qpoly(&["verify", "--lemma", "power-sums", "--m-max", "10", "--n-max", "100"]);
    assert_eq!(out.status.code(), Some(0));
    let eq = json_of(&out)["reports"][0]["equalities"].clone();
    assert!(eq.as_array().unwrap().iter().any(|w| w["check"] == "power_sum_bound" && w["params"] == "m=2"));

    let out = qpoly(&["verify", "--lemma", "ratio", "--n", "6", "--q", "2", "--c", "1.5"]);
    assert_eq!(out.status.code(), Some(0));

    let out = qpoly(&["verify", "--lemma", "proof-steps", "--s", "1", "--r-max", "3", "--t-max", "3", "--k-max", "20"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(qpoly(&["verify", "--lemma", "proof-steps"]).status.code(), Some(2));
}

#[test]
fn identical_inputs_give_identical_bytes() {
    let args = ["verify", "--lemma", "2.1", "--r-max", "6", "--k-max", "60", "--empirical"];
    let a = qpoly(&args);
    let b = qpoly(&args);
    assert_eq!(a.stdout, b.stdout);
    let args = ["certify", "--target", "F", "--r", "4", "--m", "3", "--n", "3", "--s", "2", "--q", "2", "--c", "0.75", "--k-max", "40"];
    assert_eq!(qpoly(&args).stdout, qpoly(&args).stdout);
}

#[test]
fn config_precedence_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("budget.cfg");
    std::fs::write(&cfg, "digits = 40\nrel_tol = 1e-15\n").unwrap();
    let report = dir.path().join("report.json");
    let out = Command::new(env!("CARGO_BIN_EXE_qpoly"))
        .args(["--config", cfg.to_str().unwrap(), "--digits", "45", "--out", report.to_str().unwrap()])
        .args(["eval", "--fn", "psi_q_m", "--m", "2", "--q", "0.5", "--x", "1"])
        .env("QPOLY_PRECISION_DIGITS", "60")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["config"]["budget"]["digits"], 45);
    assert_eq!(doc["config"]["budget"]["rel_tol"], 1e-15);

    let env_only = Command::new(env!("CARGO_BIN_EXE_qpoly"))
        .args(["eval", "--fn", "gamma_q", "--q", "2", "--x", "3"])
        .env("QPOLY_PRECISION_DIGITS", "60")
        .output()
        .unwrap();
    let doc: Value = serde_json::from_slice(&env_only.stdout).unwrap();
    assert_eq!(doc["config"]["budget"]["digits"], 60);

    std::fs::write(&cfg, "unknown_key = 1\n").unwrap();
    let bad = qpoly(&["--config", cfg.to_str().unwrap(), "eval", "--fn", "psi_q", "--q", "2", "--x", "1"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn props_outputs() {
    let out = qpoly(&["--format", "text", "props", "--what", "chain", "--q", "0.3", "--c", "0.25", "--x", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("upper > middle > lower"));
    let out = qpoly(&["props", "--what", "h", "--z", "1", "--y", "0.5", "--c", "0.5"]);
    let dd: f64 = json_of(&out)["result"]["h_dd"].as_str().unwrap().parse().unwrap();
    assert!(dd < 0.0);
    let out = qpoly(&["props", "--what", "constants", "--r", "3", "--m", "2", "--n", "2", "--s", "1"]);
    assert_eq!(json_of(&out)["result"]["alpha"], "1/2");
}
