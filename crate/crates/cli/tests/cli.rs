//! End-to-end tests of the `hnslope` binary: output formats, exit codes and
//! byte-level determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hnslope"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn fixture(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).expect("fixture written");
    path
}

#[test]
fn poly_verbs_print_the_expected_values() {
    let sum = run(&["poly", "sum", "[1, 0]", "[1/2, 1/2]"]);
    assert_eq!(stdout(&sum), "[1, 1/2, 1/2, 0]\n");
    assert!(sum.status.success());

    let dom = run(&["poly", "dom", "[1, 0]", "[1/2, 1/2]"]);
    assert_eq!(stdout(&dom), "greater\n");

    let eval = run(&["poly", "eval", "3/2", "[1, 0]"]);
    assert_eq!(stdout(&eval), "1\n");

    let iota = run(&["poly", "iota", "[2, -1]"]);
    assert_eq!(stdout(&iota), "[1, -2]\n");

    let shift = run(&["poly", "shift", "-2", "[1, 0]"]);
    assert_eq!(stdout(&shift), "[-1, -2]\n");
}

#[test]
fn non_monotone_vector_literals_exit_with_the_usage_code() {
    let out = run(&["poly", "sum", "[1/2, 3]"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("non-increasing"));
}

#[test]
fn missing_input_files_exit_with_the_usage_code() {
    let out = run(&["snf", "/nonexistent/matrix.txt"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn smith_normal_form_reports_rank_and_valuations() {
    let dir = tempfile::tempdir().unwrap();
    let m = fixture(dir.path(), "m.padic", "ring=padic p=2\n2; 1\n0; 4\n");
    let out = run(&["snf", m.to_str().unwrap()]);
    assert_eq!(stdout(&out), "rank: 2\nvaluations: [0, 3]\n");
    assert!(out.status.success());
}

#[test]
fn verbose_diagnostics_go_to_stderr_only() {
    let dir = tempfile::tempdir().unwrap();
    let m = fixture(dir.path(), "m.padic", "ring=padic p=2\n2; 1\n0; 4\n");
    let plain = run(&["snf", m.to_str().unwrap()]);
    let verbose = run(&["snf", m.to_str().unwrap(), "--verbose"]);
    assert_eq!(stdout(&plain), stdout(&verbose));
    assert!(stderr(&verbose).contains("pivot 0"));
}

#[test]
fn exhausted_precision_exits_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let m = fixture(dir.path(), "z.hahn", "ring=hahn p=2 m=1\nO(t^(1))\n");
    let out = run(&["snf", m.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn the_prec_flag_truncates_series_inputs() {
    let dir = tempfile::tempdir().unwrap();
    // Cutting at t^2 hides the t^3 term from the pivot, so the valuations
    // become indeterminate.
    let m = fixture(dir.path(), "m.hahn", "ring=hahn p=2 m=1\nt^(3)\n");
    let exact = run(&["snf", m.to_str().unwrap()]);
    assert_eq!(stdout(&exact), "rank: 1\nvaluations: [3]\n");
    let cut = run(&["snf", m.to_str().unwrap(), "--prec", "2"]);
    assert_eq!(cut.status.code(), Some(3));
}

#[test]
fn tied_envelope_realizers_exit_with_code_four() {
    let dir = tempfile::tempdir().unwrap();
    let p = fixture(
        dir.path(),
        "tied.poset",
        "bottom=b top=t\nb 0 0\nx 1 2\ny 1 2\nt 2 3\nb < x\nb < y\nx < t\ny < t\n",
    );
    let out = run(&["hn", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("no admissible filtration"));
}

#[test]
fn chain_posets_report_their_canonical_filtration() {
    let dir = tempfile::tempdir().unwrap();
    let p = fixture(
        dir.path(),
        "chain.poset",
        "bottom=b top=t\nb 0 0\nx 1 2\nt 2 3\nb < x\nx < t\n",
    );
    let out = run(&["hn", p.to_str().unwrap()]);
    assert_eq!(
        stdout(&out),
        "chain: b < x < t\njumps: [2, 1]\ntype: [2, 1]\nsemistable: false\n"
    );
}

#[test]
fn singular_lattices_exit_with_the_computation_code() {
    let dir = tempfile::tempdir().unwrap();
    let m = fixture(dir.path(), "s.padic", "ring=padic p=2\n0\n");
    let out = run(&["mazur", m.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn the_monomial_fixture_has_fargues_type_one_zero() {
    let dir = tempfile::tempdir().unwrap();
    let m = fixture(
        dir.path(),
        "m.phi",
        "ring=hahn p=2 m=1 q=2\nphi=\n1; 0\n0; t^(-1)\ntrivialization=\n1; 0\n0; t\ntolerance=inf\n",
    );
    let hodge = run(&["hodge", m.to_str().unwrap()]);
    assert_eq!(stdout(&hodge), "[1, 0]\n");
    let fargues = run(&["fargues", m.to_str().unwrap()]);
    assert_eq!(stdout(&fargues), "[1, 0]\n");
    let twisted = run(&["twist", "phi", "1", m.to_str().unwrap()]);
    assert_eq!(stdout(&twisted), "hodge: [2, 1]\nfargues: [2, 1]\n");
}

#[test]
fn fargues_without_a_trivialization_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let m = fixture(
        dir.path(),
        "bare.phi",
        "ring=hahn p=2 m=1 q=2\nphi=\n1; 0\n0; t^(-1)\n",
    );
    let out = run(&["fargues", m.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn hodge_tate_lattices_report_type_and_degree() {
    let dir = tempfile::tempdir().unwrap();
    let h = fixture(dir.path(), "h.ht", "ring=xi\nxi; 0\n0; 1\n");
    let out = run(&["ht", h.to_str().unwrap()]);
    assert_eq!(stdout(&out), "hodge: [0, -1]\ndegree: -1\n");
    let twisted = run(&["twist", "ht", "-2", h.to_str().unwrap()]);
    assert_eq!(stdout(&twisted), "hodge: [-2, -3]\ndegree: -5\n");
}

#[test]
fn plot_without_polygons_is_a_usage_error() {
    let out = run(&["plot"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn plot_runs_are_byte_identical() {
    let a = run(&["plot", "[1, 0]", "[1/2, 1/2]"]);
    let b = run(&["plot", "[1, 0]", "[1/2, 1/2]"]);
    assert!(a.status.success());
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn plot_draws_the_documented_polyline_for_the_unit_staircase() {
    let out = run(&["plot", "[1, 0]"]);
    let svg = stdout(&out);
    assert!(svg.contains("points=\"60.00,560.00 350.00,40.00 640.00,40.00\""));
    assert_eq!(svg.matches("<polyline").count(), 1);
}

#[test]
fn plot_legend_preserves_input_order_of_file_and_inline_polygons() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture(dir.path(), "polys.txt", "upper=[1, 0]\nlower=[1/2, 1/2]\n");
    let out = run(&["plot", "[0, 0]", "--file", f.to_str().unwrap()]);
    let svg = stdout(&out);
    let upper = svg.find(">upper<").expect("file label present");
    let lower = svg.find(">lower<").expect("file label present");
    let inline = svg.find(">P3<").expect("inline label numbered after file entries");
    assert!(upper < lower && lower < inline);
    assert_eq!(svg.matches("<polyline").count(), 3);
}

#[test]
fn identical_polygons_get_distinct_legend_entries() {
    let out = run(&["plot", "[1, 0]", "[1, 0]"]);
    let svg = stdout(&out);
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert!(svg.contains(">P1<") && svg.contains(">P2<"));
}

#[test]
fn the_out_flag_writes_the_same_bytes_as_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plot.svg");
    let piped = run(&["plot", "[2, 1, 0]"]);
    let filed = run(&["plot", "[2, 1, 0]", "--out", path.to_str().unwrap()]);
    assert!(filed.status.success());
    assert!(filed.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), piped.stdout);
}

#[test]
fn check_runs_with_a_fixed_seed_are_byte_identical() {
    let args = ["check", "--seed", "42", "--cases", "6"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success(), "stderr: {}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.contains("\"suite\": \"polygon-laws\""));
    assert!(text.contains("\"failures\": []"));
}

#[test]
fn check_with_zero_cases_emits_an_empty_report() {
    let out = run(&["check", "--cases", "0"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "[]\n");
}

#[test]
fn unknown_suites_are_usage_errors() {
    let out = run(&["check", "--suite", "nope", "--cases", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn a_broken_oracle_names_the_failing_suite_and_exits_nonzero() {
    let out = run(&[
        "check",
        "--seed",
        "42",
        "--cases",
        "3",
        "--suite",
        "polygon-laws",
        "--broken-oracle",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("polygon-laws"));
    let text = stdout(&out);
    assert!(text.contains("\"seed\""));
    assert!(text.contains("\"expected\""));
}

#[test]
fn broken_oracle_failure_lists_are_reproducible() {
    let args = [
        "check",
        "--seed",
        "42",
        "--cases",
        "4",
        "--suite",
        "polygon-laws",
        "--broken-oracle",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
}
