use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn finsler(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finsler"))
        .args(args)
        .env_remove("FINSLER_DEFAULT_ORDERS")
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    finsler(args).status.code().expect("exit code")
}

fn stdout(args: &[&str]) -> String {
    let out = finsler(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let mut all = args.to_vec();
    let p = path.display().to_string();
    all.extend(["--json", &p]);
    stdout(&all);
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

const UNIT: &str = "x=0,1,0,0;y=1,1,1,1";

#[test]
fn tensors_report_h_curvature_at_unit_point() {
    let v = json(&[
        "tensors", "--metric", "ex1", "--point", UNIT, "--tensor", "chern-h",
    ]);
    assert_eq!(v["command"], "tensors");
    assert_eq!(v["metric"]["dim"], 4);
    let r = &v["tensors"]["chern_h"];
    let at = |h: usize, i: usize, j: usize, k: usize| r[h][i][j][k].as_f64().unwrap();
    assert!((at(0, 0, 0, 1) - 5.0 / 18.0).abs() < 1e-12);
    assert!((at(0, 1, 0, 1) + 5.0 / 9.0).abs() < 1e-12);
    assert!((at(0, 0, 1, 0) + 5.0 / 18.0).abs() < 1e-12);
}

#[test]
fn nullity_and_kernel_at_unit_point() {
    let out = stdout(&["nullity", "--metric", "ex1", "--point", UNIT]);
    assert!(out.contains("mu = 2"), "{out}");
    let out = stdout(&[
        "nullity", "--metric", "ex1", "--point", UNIT, "--mode", "kernel",
    ]);
    assert!(out.contains("mu = 2"), "{out}");
    let out = stdout(&[
        "nullity",
        "--metric",
        "euclid3",
        "--point",
        "x=0,0,0;y=1,2,3",
        "--tensor",
        "barthel",
    ]);
    assert!(out.contains("mu = 3"), "{out}");
}

#[test]
fn classify_landsberg_metric() {
    let out = stdout(&["classify", "--metric", "ex3", "--points", "4"]);
    assert!(out.contains("consensus: Landsberg-not-Berwald"), "{out}");
}

#[test]
fn verify_builtin_passes_and_inhomogeneous_fails() {
    assert_eq!(
        code(&["verify", "--metric", "riem-hyperbolic", "--points", "4"]),
        0
    );
    let out = finsler(&[
        "verify",
        "--metric",
        &fixture("ex-bad-homog.metric"),
        "--points",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("homogeneity-energy"));
}

#[test]
fn scan_slice_transition() {
    let v = json(&[
        "scan",
        "--metric",
        "ex2",
        "--grid",
        "y3=1.5:2.5:3",
        "--point",
        "x=1,1,1;y=1,1,2",
        "--tensor",
        "chern-hv",
    ]);
    let text = v.to_string();
    assert!(text.contains("chern-hv"), "{text}");
    let out = stdout(&[
        "scan",
        "--metric",
        "ex2",
        "--grid",
        "y3=1.5:2.5:3",
        "--point",
        "x=1,1,1;y=1,1,2",
    ]);
    assert!(out.contains("y=1,1,2  chern-h=0 chern-hv=2"), "{out}");
    assert!(out.contains("structural checks: all pass"), "{out}");
}

#[test]
fn json_output_is_deterministic() {
    let args = [
        "scan",
        "--metric",
        "ex3",
        "--grid",
        "x1=-1:1:3,y1=0.5:1:2",
        "--point",
        "x=0,0,0;y=1,1,1",
    ];
    assert_eq!(json(&args), json(&args));
    let dir = tempfile::tempdir().unwrap();
    let bytes: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let p = dir.path().join(format!("{i}.json")).display().to_string();
            let mut a = args.to_vec();
            a.extend(["--json", &p]);
            stdout(&a);
            std::fs::read(&p).unwrap()
        })
        .collect();
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn csv_output() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("scan.csv").display().to_string();
    stdout(&[
        "scan",
        "--metric",
        "ex2",
        "--grid",
        "y3=1.5:2.5:3",
        "--point",
        "x=1,1,1;y=1,1,2",
        "--csv",
        &p,
    ]);
    let text = std::fs::read_to_string(&p).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,point,tensor,mu,checks_passed"));
    // one row per point and curvature tensor
    assert_eq!(lines.count(), 3 * 4, "{text}");
}

#[test]
fn exit_codes() {
    // invalid arguments and parse errors
    assert_eq!(code(&["bogus"]), 2);
    assert_eq!(code(&["tensors", "--metric", "ex1"]), 2);
    assert_eq!(
        code(&["tensors", "--metric", "no-such-metric", "--point", UNIT]),
        2
    );
    assert_eq!(
        code(&[
            "tensors",
            "--metric",
            &fixture("syntax-error.metric"),
            "--point",
            "x=0,0;y=1,1"
        ]),
        2
    );
    assert_eq!(
        code(&["tensors", "--metric", "ex1", "--point", "x=0,1;y=1,1,1,1"]),
        2
    );
    assert_eq!(code(&["verify", "--metric", "ex1", "--points", "0"]), 2);
    // domain
    assert_eq!(
        code(&["tensors", "--metric", "ex2", "--point", "x=1,1,1;y=1,1,4"]),
        3
    );
    assert_eq!(
        code(&[
            "scan",
            "--metric",
            "ex2",
            "--grid",
            "y3=4",
            "--point",
            "x=1,1,1;y=1,1,2"
        ]),
        3
    );
    // degenerate fundamental tensor
    assert_eq!(
        code(&[
            "tensors",
            "--metric",
            &fixture("degenerate.metric"),
            "--point",
            "x=0,0;y=1,1"
        ]),
        4
    );
    // jet orders too low for third vertical derivatives of the spray
    let out = finsler(&[
        "tensors",
        "--metric",
        "ex3",
        "--point",
        "x=0,0,0;y=0,1,1",
        "--orders",
        "2,4",
        "--tensor",
        "berwald",
    ]);
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--orders"));
}
