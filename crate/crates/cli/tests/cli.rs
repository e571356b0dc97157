use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn fluxdec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fluxdec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fixtures_dir() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let o = fluxdec(&["fixtures", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    dir
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn fixtures_writes_five_models() {
    let dir = fixtures_dir();
    let mut names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "lattice-gas-32.json",
            "three-cycle-ipfg.json",
            "three-cycle-zero-range.json",
            "two-state-ipfg.json",
            "unary-cycle-crn.json"
        ]
    );
}

#[test]
fn every_fixture_verifies() {
    let dir = fixtures_dir();
    for entry in std::fs::read_dir(dir.path()).unwrap() {
        let path = entry.unwrap().path();
        let o = fluxdec(&["verify", "--model", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}: {}", path.display(), stdout(&o));
        let out = stdout(&o);
        assert!(out.starts_with("check,lambda,value,threshold,status\n"));
        assert!(!out.contains(",fail"), "{out}");
    }
}

#[test]
fn driven_lattice_skips_inexact_checks() {
    let dir = fixtures_dir();
    let o = fluxdec(&["verify", "--model", dir.path().join("lattice-gas-32.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l.starts_with("quasipotential-identity,") && l.ends_with(",skip")));
    assert!(out.lines().any(|l| l.starts_with("decomposition-F,") && l.ends_with(",pass")));
}

#[test]
fn corrupted_measure_fails_the_identity() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "bad.json",
        r#"{"model":"ipfg","Q":[[-3,2,1],[1,-3,2],[2,1,-3]],"pi":["0.5","0.3","0.2"]}"#,
    );
    let o = fluxdec(&["verify", "--model", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let identity = rows(&stdout(&o))
        .into_iter()
        .find(|r| r[0] == "quasipotential-identity")
        .unwrap();
    assert_eq!(identity[4], "fail");
    assert!(stderr(&o).contains("quasipotential-identity"));
    // Decomposition identities hold for any measure.
    assert!(stdout(&o).lines().filter(|l| l.starts_with("decomposition-")).all(|l| l.ends_with(",pass")));
}

#[test]
fn lambda_override_is_honoured() {
    let dir = fixtures_dir();
    let m = dir.path().join("three-cycle-ipfg.json");
    let o = fluxdec(&["verify", "--model", m.to_str().unwrap(), "--lambda", "0.3,0.7"]);
    assert_eq!(o.status.code(), Some(0));
    let mut lambdas: Vec<String> = rows(&stdout(&o))
        .into_iter()
        .skip(1)
        .map(|r| r[1].clone())
        .filter(|l| !l.is_empty())
        .collect();
    lambdas.sort();
    lambdas.dedup();
    assert_eq!(lambdas, ["0.3", "0.7"]);
}

#[test]
fn lambda_outside_unit_interval_is_a_usage_error() {
    let dir = fixtures_dir();
    let m = dir.path().join("two-state-ipfg.json");
    let o = fluxdec(&["verify", "--model", m.to_str().unwrap(), "--lambda", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn row_sum_violation_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "rs.json", r#"{"model":"ipfg","Q":[[-1,1],[2,-1]]}"#);
    let o = fluxdec(&["verify", "--model", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("row-sum"), "{}", stderr(&o));
}

#[test]
fn malformed_json_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "x.json", r#"{"model":"ipfg","Q":[[-1,1],[2,-2]],"extra":1}"#);
    let o = fluxdec(&["flow", "--model", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sample_requires_a_seed() {
    let o = fluxdec(&["sample"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--seed"));
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        let o = fluxdec(&[
            "sample", "--seed", seed, "--n", "10,100,1000", "--replicas", "8", "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(out).unwrap()
    };
    let a = run("11", "a.csv");
    let b = run("11", "b.csv");
    let c = run("12", "c.csv");
    assert_eq!(a, b);
    assert_ne!(a, c);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("n,mean_err,var,slope\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn sample_paths_cover_every_replica() {
    let dir = tempfile::tempdir().unwrap();
    let paths = dir.path().join("paths.csv");
    let o = fluxdec(&[
        "sample", "--seed", "3", "--n", "50", "--replicas", "4", "--paths", paths.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = rows(&std::fs::read_to_string(paths).unwrap());
    assert_eq!(table[0], ["n", "replica", "t", "rho_1", "rho_2"]);
    assert_eq!(table.len(), 1 + 4 * 101);
    for r in &table[1..] {
        let s: f64 = r[3].parse::<f64>().unwrap() + r[4].parse::<f64>().unwrap();
        assert!((s - 1.0).abs() < 1e-12);
    }
}

#[test]
fn flow_conserves_mass_and_reports_monitors() {
    let dir = fixtures_dir();
    let m = dir.path().join("three-cycle-zero-range.json");
    let out = dir.path().join("flow.csv");
    let o = fluxdec(&[
        "flow", "--model", m.to_str().unwrap(), "--kind", "sym", "--t-final", "2", "--dt", "0.1", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = rows(&std::fs::read_to_string(out).unwrap());
    assert_eq!(
        table[0],
        ["t", "rho_1", "rho_2", "rho_3", "j_1", "j_2", "j_3", "V", "E", "min_rho", "edi_residual"]
    );
    assert_eq!(table.len(), 22);
    let mut last_v = f64::INFINITY;
    for r in &table[1..] {
        let mass: f64 = (1..=3).map(|k| r[k].parse::<f64>().unwrap()).sum();
        assert!((mass - 1.0).abs() < 1e-9);
        let v: f64 = r[7].parse().unwrap();
        assert!(v <= last_v + 1e-12);
        last_v = v;
        assert!(r[10].parse::<f64>().unwrap().abs() < 1e-8);
    }
}

#[test]
fn tilted_flow_needs_lambda_in_range() {
    let dir = fixtures_dir();
    let m = dir.path().join("three-cycle-ipfg.json");
    let o = fluxdec(&["flow", "--model", m.to_str().unwrap(), "--kind", "tilted", "--lambda", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = fluxdec(&[
        "flow", "--model", m.to_str().unwrap(), "--kind", "tilted", "--lambda", "0.5", "--tilt-field", "asym",
        "--t-final", "0.5",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn phase_writes_three_layers() {
    let dir = fixtures_dir();
    let m = dir.path().join("three-cycle-ipfg.json");
    let o = fluxdec(&["phase", "--model", m.to_str().unwrap(), "--grid", "4", "--t-final", "8"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = rows(&stdout(&o));
    for layer in ["full", "sym", "asym"] {
        assert_eq!(table.iter().filter(|r| r[0] == layer && r[1] == "field").count(), 3);
    }
    // Antisymmetric arcs of the cycle are closed orbits.
    assert!(table.iter().any(|r| r[0] == "asym" && r[1] == "arc" && !r[12].is_empty()));

    let two = dir.path().join("two-state-ipfg.json");
    let o = fluxdec(&["phase", "--model", two.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
