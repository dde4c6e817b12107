use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_grunsky-lab"))
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(sub: &str, cfg: &Path, out: &Path, seed: u64) -> i32 {
    bin()
        .args([sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", &seed.to_string(), "--threads", "2"])
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

fn read_json(p: PathBuf) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn rootnorm_reports_even_equality() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"map": {"catalog": {"name": "koebe_t", "t": 0.5}}, "n": 64, "p_max": 4}"#);
    assert_eq!(run("rootnorm", &cfg, dir.path(), 1), 0);
    let csv = std::fs::read_to_string(dir.path().join("rootnorm.csv")).unwrap();
    let k2: f64 = csv.lines().find(|l| l.starts_with("2,64,")).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((k2 - 0.5).abs() < 1e-3);
    let j = read_json(dir.path().join("rootnorm.json"));
    assert!((j["kappa_hat"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert_eq!(j["seed"], 1);
}

#[test]
fn grunsky_of_identity_vanishes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"map": "identity", "n": 6}"#);
    assert_eq!(run("grunsky", &cfg, dir.path(), 0), 0);
    assert_eq!(read_json(dir.path().join("grunsky.json"))["kappa"].as_f64().unwrap(), 0.0);
}

#[test]
fn solve_recovers_b1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"mu": {"disk_constant": {"value": [0.3, 0.0], "radius": 1.0}}, "extent": 4.0, "resolution": 128, "radius": 2.0, "coefficients": 6}"#,
    );
    assert_eq!(run("solve", &cfg, dir.path(), 0), 0);
    let b1 = read_json(dir.path().join("solve.json"))["b1"][0].as_f64().unwrap();
    assert!((b1 / 0.3 - 1.0).abs() < 0.02, "{b1}");
    assert!(dir.path().join("solve_map.bin").exists());
}

#[test]
fn remaining_subcommands_succeed() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("reflect", r#"{"kappa_hat": 0.5}"#),
        ("alpha", r#"{"mu": {"teichmuller": {"k": 0.3}}, "search": {"coords": 6, "starts": 8, "radial": 64, "angular": 64}}"#),
        ("polygon", r#"{"polygon": {"alphas": [1.5], "prevertices": [0.0], "d0": [0, 0], "d1": [1, 0]}, "check": {"r_factor": 0.1, "n": 8, "base": [0.0, 1.0], "sample_radius": 0.9}, "samples": [[0.5, -1.0]]}"#),
        ("lscan", r#"{"source": {"point": {"n": 2, "entries": [[0.5, 0], [0, 0], [0, 0], [0.125, 0]]}}, "steps": 5}"#),
    ];
    for (sub, body) in cases {
        let cfg = write(dir.path(), &format!("{sub}.json"), body);
        assert_eq!(run(sub, &cfg, dir.path(), 0), 0, "{sub}");
        assert!(dir.path().join(format!("{sub}.csv")).exists());
    }
    let r = read_json(dir.path().join("reflect.json"));
    assert!((r["dilatation"].as_f64().unwrap() - 9.0).abs() < 1e-12);
}

#[test]
fn schema_violations_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "a.json", r#"{"kappa_hat": 0.5, "x": 1}"#);
    assert_eq!(run("reflect", &unknown, dir.path(), 0), 2);
    let bad_p = write(dir.path(), "b.json", r#"{"map": "identity", "n": 4, "p_max": 3}"#);
    assert_eq!(run("rootnorm", &bad_p, dir.path(), 0), 2);
    let bad_angle = write(dir.path(), "c.json", r#"{"polygon": {"alphas": [2.5], "prevertices": [0.0], "d0": [0, 0], "d1": [1, 0]}}"#);
    assert_eq!(run("polygon", &bad_angle, dir.path(), 0), 2);
    assert_eq!(run("reflect", &dir.path().join("missing.json"), dir.path(), 0), 2);
    let code = bin().arg("reflect").output().unwrap().status.code().unwrap();
    assert_eq!(code, 2);
}

#[test]
fn numerical_failures_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"mu": {"disk_constant": {"value": [1.2, 0.0], "radius": 1.0}}, "extent": 4.0, "resolution": 32, "radius": 2.0, "coefficients": 4}"#,
    );
    assert_eq!(run("solve", &cfg, dir.path(), 0), 3);
    let inside = write(
        dir.path(),
        "d.json",
        r#"{"mu": {"disk_constant": {"value": [0.3, 0.0], "radius": 1.0}}, "extent": 4.0, "resolution": 32, "radius": 1.0, "coefficients": 4}"#,
    );
    assert_eq!(run("solve", &inside, dir.path(), 0), 3);
}

#[test]
fn same_seed_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"mu": {"annulus": {"k": 0.3, "outer": 2.0}}, "search": {"coords": 6, "starts": 12, "radial": 64, "angular": 64}}"#);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run("alpha", &cfg, &a, 9), 0);
    assert_eq!(run("alpha", &cfg, &b, 9), 0);
    for f in ["alpha.json", "alpha.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
    }
}
