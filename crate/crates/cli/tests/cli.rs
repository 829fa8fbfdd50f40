use std::fs;
use std::process::Command;

use bcmortar_core::mesh::io::read_mesh;

fn bcmortar(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_bcmortar")).args(args).output().unwrap()
}

#[test]
fn mesh_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("j.mesh");
    let out = bcmortar(&["mesh", "--level", "1", "--which", "j", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let mesh = read_mesh(std::io::BufReader::new(fs::File::open(&path).unwrap())).unwrap();
    assert_eq!(mesh.n_facets(), 72);
}

#[test]
fn exp1_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let out = bcmortar(&["exp1", "--degree", "1", "--level", "0", "--steps", "4", "--methods", "bc,galerkin", "--out", path.to_str().unwrap()]);
        assert!(out.status.success());
        fs::read_to_string(path).unwrap()
    };
    let first = run("a.csv");
    assert_eq!(first, run("b.csv"));
    let mut lines = first.lines();
    assert_eq!(lines.next().unwrap(), "experiment,method,degree,level,h_or_nu,value,norm");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 10);
    assert_eq!(rows[0][..5], ["exp1", "bc", "1", "0", "0"]);
    assert_eq!(rows[0][5].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn cond_rows() {
    let out = bcmortar(&["cond", "--max-level", "0"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let bc: Vec<f64> = text
        .lines()
        .filter(|l| l.starts_with("cond,bc"))
        .map(|l| l.split(',').nth(5).unwrap().parse().unwrap())
        .collect();
    assert_eq!(bc.len(), 2);
    assert!(bc.iter().all(|k| (2.0..=10.0).contains(k)));
}

#[test]
fn verify_exit_status() {
    let out = bcmortar(&["verify", "--level", "0"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("FAIL-BY-DESIGN,galerkin")));
    assert!(!text.lines().any(|l| l.starts_with("FAIL,")));
}

#[test]
fn invalid_arguments() {
    assert_eq!(bcmortar(&["exp1", "--degree", "2"]).status.code(), Some(2));
    assert_eq!(bcmortar(&["exp2", "--max-level", "2"]).status.code(), Some(2));
    assert!(!bcmortar(&["exp1", "--methods", "spline"]).status.success());
}
