//! End-to-end tests of the command-line binary: output text, exit codes,
//! JSON shape, and the fixture runner.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_normalcone"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).trim().to_string()
}

#[test]
fn check_true_vector_exits_zero() {
    let out = run(&[
        "check",
        "--set",
        "x >= 0 && (y + x^2) * (y - x^2) == 0",
        "--vars",
        "x,y",
        "--point",
        "0,0",
        "--vector",
        "-1,-1",
    ]);
    assert_eq!(stdout(&out), "true");
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn check_false_vector_exits_one() {
    let out = run(&[
        "check", "--set", "x >= 0", "--vars", "x", "--point", "1", "--vector", "1",
    ]);
    assert_eq!(stdout(&out), "false");
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn check_rejects_point_outside_the_set() {
    let out = run(&[
        "check", "--set", "x >= 0", "--vars", "x", "--point", "-1", "--vector", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cone_direct_on_halfline() {
    let out = run(&[
        "cone", "--algo", "direct", "--set", "x >= 0", "--vars", "x", "--point", "0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    // golden comparison is semantic, through the equal subcommand
    let eq = run(&["equal", "--a", &stdout(&out), "--b", "v1 <= 0", "--vars", "v1"]);
    assert_eq!(stdout(&eq), "true", "cone printed {:?}", stdout(&out));
}

#[test]
fn cone_json_output_shape() {
    let out = run(&[
        "cone", "--algo", "direct", "--set", "x >= 0", "--vars", "x", "--point", "1/2",
        "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["algorithm"], "direct");
    assert_eq!(json["status"], "final");
    assert_eq!(json["base_point"][0], "1/2");
    // the printed formula re-parses in the input grammar
    let f = json["formula"].as_str().unwrap();
    let eq = run(&["equal", "--a", f, "--b", "v1 = 0", "--vars", "v1"]);
    assert_eq!(stdout(&eq), "true");
}

#[test]
fn equal_distinguishes_open_from_closed() {
    let out = run(&["equal", "--a", "x >= 0", "--b", "x > 0", "--vars", "x"]);
    assert_eq!(stdout(&out), "false");
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn qe_eliminates_a_root_condition() {
    let out = run(&["qe", "--formula", "exists y. y^2 = x", "--free", "x"]);
    assert_eq!(out.status.code(), Some(0));
    let eq = run(&["equal", "--a", &stdout(&out), "--b", "x >= 0", "--vars", "x"]);
    assert_eq!(stdout(&eq), "true");
}

#[test]
fn decompose_lists_cells_of_a_line() {
    let out = run(&["decompose", "--polys", "x - 1", "--vars", "x"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 3, "{text}");
    assert!(text.contains("dim 0"));
}

#[test]
fn project_unit_circle_to_an_interval() {
    let out = run(&[
        "project", "--set", "x^2 + y^2 = 1", "--vars", "x,y", "--keep", "x",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let printed = stdout(&out);
    let inner = printed
        .strip_prefix("set(x; ")
        .and_then(|s| s.strip_suffix(')'))
        .unwrap_or_else(|| panic!("unexpected shape: {printed}"));
    let eq = run(&["equal", "--a", inner, "--b", "x^2 <= 1", "--vars", "x"]);
    assert_eq!(stdout(&eq), "true");
}

#[test]
fn tangent_of_halfline() {
    let out = run(&[
        "tangent", "--set", "x >= 0", "--vars", "x", "--point", "0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let eq = run(&["equal", "--a", &stdout(&out), "--b", "w1 >= 0", "--vars", "w1"]);
    assert_eq!(stdout(&eq), "true");
}

#[test]
fn usage_error_exits_two() {
    let out = run(&["cone", "--set", "x >= 0", "--point", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fixtures_halfline_subset_passes() {
    let out = run(&["fixtures", "--filter", "halfline"]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("PASS halfline-origin"), "{text}");
    assert!(text.contains("PASS halfline-interior"), "{text}");
}

#[test]
fn fixtures_detect_a_wrong_golden() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("wrong.fixture"),
        "op: cone\nset: set(x; x >= 0)\npoint: 0\nalgo: direct\nexpect: v1 >= 0\n",
    )
    .unwrap();
    let out = run(&["fixtures", "--dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL wrong"));
}
