//! End-to-end tests of the binary: fixture reproduction, exit codes, and
//! the canonical JSON contract.

use sparkcert_cli::report::AnalysisReport;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparkcert"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf8 stdout")
}

fn write_temp(content: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
    f.write_all(content.as_bytes()).unwrap();
    f
}

#[test]
fn analyze_alpha2_fixture_reports_reference_statistics() {
    let out = run(&[
        "analyze",
        "--matrix",
        fixture("alpha2_3x6.csv").to_str().unwrap(),
        "--tie-tol",
        "5e-4",
    ]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("mu        0.9239"), "{text}");
    assert!(text.contains("alpha     2"), "{text}");
    assert!(text.contains("exact          3"), "{text}");
    assert!(text.contains("witness cols   {2, 4, 5}"), "{text}");
}

#[test]
fn verify_overlap_fixture_certifies_uniqueness() {
    let out = run(&[
        "verify",
        "--matrix",
        fixture("dependent_3x5.csv").to_str().unwrap(),
        "--rhs",
        fixture("dependent_3x5_b.csv").to_str().unwrap(),
        "--x",
        fixture("dependent_3x5_x.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.contains("conclusion: unique-sparsest"), "{text}");
    assert!(text.contains("pass  overlap-spark"), "{text}");
    assert!(text.contains("fail  spark-exact"), "{text}");
}

#[test]
fn verify_dense_candidate_exits_one() {
    // b chosen so a fully dense vector solves the system; no criterion can
    // certify sparsity 4 of 4.
    let matrix = fixture("alpha1_3x4.csv");
    let x = [0.3_f64, -1.2, 0.7, 2.0];
    let a: Vec<Vec<f64>> = vec![
        vec![0.0010, -0.7998, -0.6002, 0.0717],
        vec![0.8001, -0.3558, 0.4798, -0.1913],
        vec![0.5999, 0.4801, -0.6398, -0.6412],
    ];
    let b: Vec<f64> = a
        .iter()
        .map(|row| row.iter().zip(&x).map(|(r, v)| r * v).sum())
        .collect();
    let b_file = write_temp(&format!("{},{},{}\n", b[0], b[1], b[2]));
    let x_file = write_temp("0.3,-1.2,0.7,2\n");
    let out = run(&[
        "verify",
        "--matrix",
        matrix.to_str().unwrap(),
        "--rhs",
        b_file.path().to_str().unwrap(),
        "--x",
        x_file.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "inconclusive verify exits 1");
    assert!(stdout_of(&out).contains("conclusion: inconclusive"));
}

#[test]
fn gamma_star_stands_in_for_the_exact_overlap() {
    let out = run(&[
        "verify",
        "--matrix",
        fixture("dependent_3x5.csv").to_str().unwrap(),
        "--rhs",
        fixture("dependent_3x5_b.csv").to_str().unwrap(),
        "--x",
        fixture("dependent_3x5_x.csv").to_str().unwrap(),
        "--gamma-star",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_of(&out).contains("pass  overlap-spark"));
}

#[test]
fn missing_matrix_file_exits_two() {
    let out = run(&["spark", "--matrix", "definitely-missing.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8(out.stderr).unwrap().is_empty());
}

#[test]
fn ragged_csv_exits_two_with_location() {
    let f = write_temp("1,2\n3,4,5\n");
    let out = run(&["spark", "--matrix", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains(":2:"), "error should cite line 2: {err}");
}

#[test]
fn candidate_that_does_not_solve_exits_two() {
    let x_file = write_temp("1,0,0,0,0\n");
    let out = run(&[
        "verify",
        "--matrix",
        fixture("dependent_3x5.csv").to_str().unwrap(),
        "--rhs",
        fixture("dependent_3x5_b.csv").to_str().unwrap(),
        "--x",
        x_file.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn json_report_reemission_is_byte_identical() {
    let out = run(&[
        "analyze",
        "--matrix",
        fixture("integer_3x5.csv").to_str().unwrap(),
        "--rhs",
        fixture("integer_3x5_b.csv").to_str().unwrap(),
        "--rhs-diagonal",
        "--tie-tol",
        "5e-4",
        "--json",
    ]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    let parsed: AnalysisReport = serde_json::from_str(&text).expect("schema round-trips");
    assert_eq!(parsed.schema_version, 1);
    let reemitted = format!("{}\n", sparkcert_cli::report::to_json(&parsed));
    assert_eq!(
        text, reemitted,
        "canonical JSON must re-emit byte-identically"
    );

    let scaled = &parsed.scalings[0];
    let mu = scaled.coherence.as_ref().unwrap().mu;
    assert!((mu - 0.8042).abs() < 5e-4, "scaled mu {mu}");
}

#[test]
fn scale_subcommand_applies_explicit_w() {
    let out = run(&[
        "scale",
        "--matrix",
        fixture("mu95_3x4.csv").to_str().unwrap(),
        "--w",
        fixture("mu95_w_3x3.csv").to_str().unwrap(),
        "--tie-tol",
        "5e-4",
        "--json",
    ]);
    assert!(out.status.success());
    let parsed: AnalysisReport = serde_json::from_str(&stdout_of(&out)).unwrap();
    let scaled = &parsed.scalings[0];
    let c = scaled.coherence.as_ref().unwrap();
    assert!((c.mu - 0.8343).abs() < 5e-4);
    assert!((c.mu2.unwrap() - 0.7272).abs() < 5e-4);
}

#[test]
fn rangeprop_subcommand_reports_certificate() {
    let out = run(&[
        "rangeprop",
        "--matrix",
        fixture("alpha1_3x4.csv").to_str().unwrap(),
        "--k",
        "2",
        "--json",
    ]);
    assert!(out.status.success());
    let parsed: AnalysisReport = serde_json::from_str(&stdout_of(&out)).unwrap();
    let rp = parsed.range_property.unwrap();
    assert_eq!(rp.order, 2);
    assert_eq!(rp.margins.len(), 18, "C(4,2) * 3 pairs");
}

#[test]
fn overlap_subcommand_reports_forced_column() {
    let out = run(&[
        "overlap",
        "--matrix",
        fixture("dependent_3x5.csv").to_str().unwrap(),
        "--rhs",
        fixture("dependent_3x5_b.csv").to_str().unwrap(),
        "--json",
    ]);
    assert!(out.status.success());
    let parsed: AnalysisReport = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(parsed.overlap.unwrap().indices, vec![2]);
}

#[test]
fn bounds_subcommand_skips_exact_search() {
    let out = run(&[
        "bounds",
        "--matrix",
        fixture("alpha1_3x4.csv").to_str().unwrap(),
        "--tie-tol",
        "5e-4",
        "--json",
    ]);
    assert!(out.status.success());
    let parsed: AnalysisReport = serde_json::from_str(&stdout_of(&out)).unwrap();
    let spark = parsed.spark.unwrap();
    assert!(spark.exact.is_none());
    assert!(spark.classic_bound.is_some());
    assert_eq!(parsed.babel.unwrap().q_hat, Some(3));
}

#[test]
fn json_matrix_format_is_accepted() {
    let mut f = tempfile::Builder::new().suffix(".json").tempfile().unwrap();
    f.write_all(br#"{"rows":2,"cols":2,"data":[1,0,0,1]}"#)
        .unwrap();
    let out = run(&["spark", "--matrix", f.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("infinite"));
}
