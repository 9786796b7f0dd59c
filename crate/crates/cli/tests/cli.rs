use std::path::PathBuf;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypersurf")).args(args).output().unwrap()
}

fn spec(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "specs", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn column(csv: &str, row: usize, name: &str) -> f64 {
    let mut lines = csv.lines();
    let head: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = head.iter().position(|h| *h == name).unwrap();
    lines.nth(row).unwrap().split(',').nth(i).unwrap().parse().unwrap()
}

#[test]
fn curvature_of_a_cap() {
    let out = bin(&["curvature", "--spec", &spec("sphere_cap.json")]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(column(&text, 0, "kappa_1"), 2.0);
    assert_eq!(column(&text, 0, "kappa_2"), 2.0);
}

#[test]
fn transformed_ball_sphere() {
    let out = bin(&["transform", "--spec", &spec("ball_sphere.json"), "--check"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for row in 0..2 {
        for k in ["kappa_halfspace_1", "kappa_halfspace_2"] {
            assert!((column(&text, row, k) - 1.25).abs() < 1e-9);
        }
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(bin(&["curvature"]).status.code(), Some(2));
    assert_eq!(bin(&["no-such-command"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"family":{"sphere_cap":{"h":1,"r":2}}}"#).unwrap();
    assert_eq!(bin(&["curvature", "--spec", bad.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&bad, "{not json").unwrap();
    assert_eq!(bin(&["identities", "--spec", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn evaluation_failure_writes_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.json");
    std::fs::write(&s, r#"{"expr":"x1","points":[[-0.1,0.0]]}"#).unwrap();
    let out_dir = dir.path().join("out");
    let out = bin(&["curvature", "--spec", s.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("failures.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "curvature");
    assert!(manifest["failures"][0].as_str().unwrap().contains("u = -0.1"));
}

#[test]
fn identities_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = bin(&["identities", "--spec", &spec("perturbed_cap.json"), "--seed", "5", "--check", "--out", d.to_str().unwrap()]);
        assert!(out.status.success());
    }
    for f in ["identities.csv", "identities.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
    }
}

#[test]
fn manufactured_solve_reports_its_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["solve", "--spec", &spec("cap_problem.json"), "--dx", "0.05", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("solve.json")).unwrap()).unwrap();
    let e = rep["sup_error"].as_f64().unwrap();
    assert!(e > 0.0 && e < 1e-3, "{e}");
}

#[test]
fn estimates_on_a_ball_sphere() {
    let out = bin(&["estimates", "--spec", &spec("small_ball_sphere.json"), "--check"]);
    assert!(out.status.success());
    let rep: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep["threshold"], 0.04);
    assert!(rep["margin"].as_f64().unwrap() <= 1e-8);
}
