use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_simplexkit"));
    c.env_remove("SIMPLEXKIT_SEED").env_remove("SOURCE_DATE_EPOCH");
    c
}

fn run(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

struct Fixture {
    dir: TempDir,
    cube: PathBuf,
    vpoly: PathBuf,
    square: PathBuf,
}

fn fixture() -> Fixture {
    let dir = TempDir::new().unwrap();
    let cube = write(dir.path(), "cube.json", r#"{"kind": "cube", "dim": 3, "half_width": 0.5}"#);
    let vpoly = write(
        dir.path(),
        "poly.json",
        r#"{"kind": "vpolytope", "dim": 2, "vertices": [[1, 0], [0, 1], [-1, 0.2], [-0.3, -1]]}"#,
    );
    let square = write(dir.path(), "square.json", "[[0, 0], [1, 0], [1, 1], [0, 1]]");
    Fixture { dir, cube, vpoly, square }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Runs a subcommand twice with `--out` and returns both file contents.
fn twice(f: &Fixture, name: &str, args: &[&str]) -> (Vec<u8>, Vec<u8>) {
    let a = f.dir.path().join(format!("{name}-a"));
    let b = f.dir.path().join(format!("{name}-b"));
    for p in [&a, &b] {
        let mut full = args.to_vec();
        full.extend(["--out", s(p)]);
        run(&full);
    }
    (fs::read(a).unwrap(), fs::read(b).unwrap())
}

#[test]
fn every_subcommand_is_byte_deterministic() {
    let f = fixture();
    let cases: Vec<(&str, Vec<&str>)> = vec![
        ("sample", vec!["sample", "--body", s(&f.cube), "--count", "2000", "--seed", "9"]),
        ("sample-hnr", vec!["sample", "--body", s(&f.vpoly), "--count", "500", "--sampler", "hnr", "--seed", "9"]),
        ("construct", vec!["construct", "--body", s(&f.cube), "--trials", "300", "--seed", "4"]),
        ("enclose", vec!["enclose", "--body", s(&f.vpoly), "--trials", "300", "--seed", "4"]),
        ("sweep", vec!["sweep", "--dims", "2,3", "--bodies", "ball,random-hpolytope", "--trials", "100", "--seed", "2"]),
        ("reference", vec!["reference", "--max-dim", "10"]),
        ("triangle2d", vec!["triangle2d", "--polygon", s(&f.square)]),
    ];
    for (name, args) in cases {
        let (a, b) = twice(&f, name, &args);
        assert!(!a.is_empty(), "{name}");
        assert_eq!(a, b, "{name} output differs between reruns");
    }
}

#[test]
fn seed_env_var_is_the_default_seed() {
    let f = fixture();
    let flag = run(&["sample", "--body", s(&f.cube), "--count", "10", "--seed", "77"]).stdout;
    let env = bin()
        .args(["sample", "--body", s(&f.cube), "--count", "10"])
        .env("SIMPLEXKIT_SEED", "77")
        .output()
        .unwrap()
        .stdout;
    assert_eq!(flag, env);
    let other = run(&["sample", "--body", s(&f.cube), "--count", "10", "--seed", "78"]).stdout;
    assert_ne!(flag, other);
}

#[test]
fn sample_points_lie_in_the_body() {
    let f = fixture();
    let out = String::from_utf8(run(&["sample", "--body", s(&f.cube), "--count", "100"]).stdout).unwrap();
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("x0,x1,x2"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 100);
    assert!(rows.iter().flatten().all(|x| x.abs() <= 0.5));
}

#[test]
fn construct_report_passes_its_own_consistency_check() {
    let f = fixture();
    let out = run(&["construct", "--body", s(&f.cube), "--trials", "200", "--policy", "adaptive", "--rho", "0.9"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let report = simplexkit::harness::ExperimentReport::from_json(&text).unwrap();
    assert_eq!(report.records.len(), 200);
    assert_eq!(report.provenance.timestamp, None);

    let fixed = run(&["construct", "--body", s(&f.cube), "--trials", "50", "--policy", "fixed:2"]);
    let v: serde_json::Value = serde_json::from_slice(&fixed.stdout).unwrap();
    assert_eq!(v["config"]["policy"]["c1"], 2.0);
}

#[test]
fn timestamp_only_when_requested() {
    let f = fixture();
    let out = bin()
        .args(["construct", "--body", s(&f.cube), "--trials", "20"])
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["provenance"]["timestamp"], "1700000000");
}

#[test]
fn enclose_output_fields() {
    let f = fixture();
    let v: serde_json::Value =
        serde_json::from_slice(&run(&["enclose", "--body", s(&f.vpoly), "--trials", "200"]).stdout).unwrap();
    assert_eq!(v["contains"], true);
    assert_eq!(v["vertices"].as_array().unwrap().len(), 3);
    assert_eq!(v["translation"].as_array().unwrap().len(), 2);
    assert!(v["ratio"].as_f64().unwrap() >= 1.0);
    assert!(v["eqb_residual"].as_f64().unwrap() < 1e-3);
}

#[test]
fn sweep_writes_csv_and_json() {
    let f = fixture();
    let csv = f.dir.path().join("s.csv");
    let json = f.dir.path().join("s.json");
    run(&["sweep", "--dims", "2", "--bodies", "cube", "--trials", "50", "--out", s(&csv), "--json", s(&json)]);
    let text = fs::read_to_string(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# schema: sweep-v1");
    assert_eq!(lines[1], "n,body,success_rate,c1_quantile,c2_quantile,normalized_ratio,eqb_residual");
    assert!(lines[2].starts_with("2,cube,"));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 1);
}

#[test]
fn triangle_of_unit_square_has_area_two() {
    let f = fixture();
    let v: serde_json::Value =
        serde_json::from_slice(&run(&["triangle2d", "--polygon", s(&f.square)]).stdout).unwrap();
    assert!((v["triangle_area"].as_f64().unwrap() - 2.0).abs() < 1e-6);
}

#[test]
fn bad_inputs_fail_cleanly() {
    let f = fixture();
    let bad = write(f.dir.path(), "bad.json", r#"{"kind": "torus", "dim": 2}"#);
    for args in [
        vec!["construct", "--body", s(&bad)],
        vec!["construct", "--body", s(&f.cube), "--policy", "fixed:2", "--rho", "0.5"],
        vec!["sample", "--body", s(&f.cube), "--sampler", "gibbs"],
        vec!["sweep", "--bodies", "dodecahedron"],
        vec!["reference", "--max-dim", "0"],
    ] {
        let out = bin().args(&args).output().unwrap();
        assert!(!out.status.success(), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("error"), "{args:?}");
    }
}

#[test]
fn help_documents_every_flag() {
    for sub in ["sample", "construct", "enclose", "sweep", "reference", "triangle2d"] {
        let help = String::from_utf8(run(&[sub, "--help"]).stdout).unwrap();
        for flag in ["--seed", "--out", "--timestamp"] {
            assert!(help.contains(flag), "{sub} {flag}");
        }
    }
    let help = String::from_utf8(run(&["construct", "--help"]).stdout).unwrap();
    for flag in ["--burn-in", "--thin", "--sampler", "--policy", "--rho", "--trials", "--body"] {
        assert!(help.contains(flag), "{flag}");
    }
}
