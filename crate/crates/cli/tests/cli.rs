use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use proptest::prelude::*;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hpbp"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn values(csv: &str) -> Vec<f64> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap())
        .collect()
}

#[test]
fn apply_frac_power_on_diag() {
    let dir = tempfile::tempdir().unwrap();
    let op = data("diag_1_4.csv");
    let o = run(&["apply", "--operator", op.to_str().unwrap(), "--symbol", "frac_power:0.5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = values(&fs::read_to_string(dir.path().join("result.csv")).unwrap());
    // columns e0, e1 of diag(1, 0.5)
    let want = [1.0, 0.0, 0.0, 0.5];
    for (a, b) in v.iter().zip(want) {
        assert!((a - b).abs() < 1e-12, "{v:?}");
    }
    assert!(dir.path().join("oracle_delta.csv").exists());
}

#[test]
fn atom_symbol_matches_semigroup() {
    let dir = tempfile::tempdir().unwrap();
    let op = data("upper_2x2.csv");
    let x = data("ones_2.csv");
    let o = run(&[
        "apply", "--operator", op.to_str().unwrap(), "--vector", x.to_str().unwrap(),
        "--symbol", "exp_tpsi", "--t", "0.7", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let v = values(&fs::read_to_string(dir.path().join("result.csv")).unwrap());
    // e^{0.7A}(1,1) for A = [[-1,1],[0,-2]]
    let (e1, e2) = ((-0.7f64).exp(), (-1.4f64).exp());
    let want = [e1 + (e1 - e2), e2];
    for (a, b) in v.iter().zip(want) {
        assert!((a - b).abs() < 1e-13, "{v:?}");
    }
}

#[test]
fn inverse_of_zero_operator_is_divergent() {
    let dir = tempfile::tempdir().unwrap();
    let op = data("zero_2x2.csv");
    let o = run(&["apply", "--operator", op.to_str().unwrap(), "--symbol", "inverse", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
    assert!(!dir.path().join("result.csv").exists());
}

#[test]
fn require_oracle_on_defective_operator() {
    let dir = tempfile::tempdir().unwrap();
    let op = dir.path().join("jordan.csv");
    fs::write(&op, "dim=2\n-1,1\n0,-1\n").unwrap();
    let out = dir.path().join("o");
    let args = ["apply", "--operator", op.to_str().unwrap(), "--symbol", "frac_power:0.5", "--out", out.to_str().unwrap()];
    assert_eq!(code(&run(&args)), 0);
    let mut strict = args.to_vec();
    strict.push("--require-oracle");
    assert_eq!(code(&run(&strict)), 3);
}

#[test]
fn verify_suites() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = run(&["verify", "--suites", "thm3,thm4", "--seed", "7", "--dim", "8", "--trials", "1", "--out", d]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let md = fs::read_to_string(dir.path().join("report.md")).unwrap();
    assert!(md.contains("0 fail"));

    let zero = data("zero_2x2.csv");
    let o = run(&["verify", "--suites", "eq1", "--operator", zero.to_str().unwrap(), "--out", d]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(csv.lines().any(|l| l.contains("exp_tpsi") && l.contains(",pass,")));

    let upper = data("upper_2x2.csv");
    let o = run(&["verify", "--suites", "remark1", "--operator", upper.to_str().unwrap(), "--out", d]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    for l in csv.lines().skip(1) {
        let dev: f64 = l.split(',').nth(4).unwrap().parse().unwrap();
        assert!(dev <= 1e-5, "{l}");
    }
}

#[test]
fn verification_failure_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    // Tolerances this loose push the route comparisons past their 1e-8 bound.
    let o = run(&[
        "verify", "--suites", "ex2", "--seed", "1", "--trials", "1", "--rel-tol", "1e-2", "--abs-tol", "1e-2",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn unknown_suite_and_symbol() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(code(&run(&["verify", "--suites", "eq99", "--out", d])), 1);
    let op = data("diag_1_4.csv");
    assert_eq!(code(&run(&["apply", "--operator", op.to_str().unwrap(), "--symbol", "nope", "--out", d])), 1);
}

#[test]
fn deterministic_outputs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = run(&["verify", "--suites", "ex1,cor9", "--seed", "11", "--trials", "2", "--out", dir.path().to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        let op = data("upper_2x2.csv");
        let o = run(&["apply", "--operator", op.to_str().unwrap(), "--symbol", "recip_log", "--out", dir.path().to_str().unwrap()]);
        assert_eq!(code(&o), 0);
    }
    for f in ["report.csv", "result.csv", "oracle_delta.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    let out = dir.path().join("out");
    fs::write(
        &conf,
        format!(
            "[run]\noperator = {}\nout = {}\n[apply]\nsymbol = frac_power:2\n",
            data("diag_1_4.csv").display(),
            out.display()
        ),
    )
    .unwrap();
    let o = run(&["apply", "--config", conf.to_str().unwrap(), "--symbol", "frac_power:1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = values(&fs::read_to_string(out.join("result.csv")).unwrap());
    assert!((v[3] - 0.25).abs() < 1e-12, "flag should win: {v:?}");
}

#[test]
fn catalog_annotations() {
    let o = run(&["catalog"]);
    assert_eq!(code(&o), 0);
    let s = String::from_utf8_lossy(&o.stdout);
    for (name, ex) in [("frac_power", "Example 2"), ("recip_log", "Example 4"), ("neg_frac_power_bernstein", "Example 3")] {
        let line = s.lines().find(|l| l.starts_with(name)).unwrap();
        assert!(line.contains(ex), "{line}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn malformed_operator_is_input_error(body in "[ -~\n]{0,40}") {
        prop_assume!(hpbp::linalg::io::parse_matrix(&body).is_err());
        let dir = tempfile::tempdir().unwrap();
        let op = dir.path().join("m.csv");
        fs::write(&op, &body).unwrap();
        let o = run(&["apply", "--operator", op.to_str().unwrap(), "--symbol", "inverse", "--out", dir.path().to_str().unwrap()]);
        prop_assert_eq!(code(&o), 1);
    }

    #[test]
    fn malformed_config_is_input_error(key in "[a-z]{1,8}", val in "[ -~]{0,12}") {
        prop_assume!(!["operator","vector","symbol","alpha","beta","t","suites","seed","trials","dim","rel_tol","abs_tol","max_panels","out","require_oracle","route"].contains(&key.as_str()));
        let dir = tempfile::tempdir().unwrap();
        let conf = dir.path().join("c.conf");
        fs::write(&conf, format!("{key} = {val}\n")).unwrap();
        let o = run(&["verify", "--config", conf.to_str().unwrap(), "--suites", "ex1", "--out", dir.path().to_str().unwrap()]);
        prop_assert_eq!(code(&o), 1);
    }
}
