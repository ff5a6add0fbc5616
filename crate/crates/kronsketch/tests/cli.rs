use std::path::Path;
use std::process::{Command, Output};

use kronsketch::io::{read_vector, write_csv_matrix, write_csv_vector};
use nalgebra::DMatrix;

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kronsketch"))
        .args(args)
        .envs(envs.iter().copied())
        .output()
        .expect("binary runs")
}

fn write_problem(dir: &Path) -> (String, String, String) {
    let a1 = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.5, 1.0, -1.0, 2.0, 0.0, 1.0]);
    let a2 = DMatrix::from_row_slice(3, 1, &[1.0, 2.0, -1.0]);
    let b: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).sin()).collect();
    let paths = ["a1.csv", "a2.csv", "b.csv"].map(|n| dir.join(n).to_string_lossy().into_owned());
    write_csv_matrix(Path::new(&paths[0]), &a1).unwrap();
    write_csv_matrix(Path::new(&paths[1]), &a2).unwrap();
    write_csv_vector(Path::new(&paths[2]), &b).unwrap();
    let [p1, p2, pb] = paths;
    (p1, p2, pb)
}

fn objective(out: &Output) -> f64 {
    let text = String::from_utf8_lossy(&out.stdout);
    text.lines()
        .find_map(|l| l.strip_prefix("objective = "))
        .expect("objective line")
        .trim()
        .parse()
        .unwrap()
}

#[test]
fn l2_full_sketch_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let (a1, a2, b) = write_problem(dir.path());
    let x = dir.path().join("x.csv");
    let sk = dir.path().join("s.krn");
    let out = run(
        &[
            "l2", "--factor", &a1, "--factor", &a2, "--rhs", &b, "--m-override", "12", "--csv",
            x.to_str().unwrap(), "--dump-sketch", sk.to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read_vector(&x).unwrap().len(), 2);
    assert_eq!(&std::fs::read(&sk).unwrap()[..4], b"KRN1");
    let stdout = String::from_utf8_lossy(&out.stdout);
    let residual: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("residual = "))
        .unwrap()
        .parse()
        .unwrap();
    let o = run(&["oracle", "l2", "--factor", &a1, "--factor", &a2, "--rhs", &b], &[]);
    assert!(o.status.success());
    assert!((residual - objective(&o)).abs() <= 1e-9 * (1.0 + residual));
}

#[test]
fn l1_and_pspline_synthetic_runs() {
    let out = run(&["l1", "--synthetic", "16", "16", "2", "2", "--w1", "4", "--w2", "4", "--n-override", "80", "--repeats", "2"], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("l1 residual"));
    let out = run(&["pspline", "--synthetic", "30", "30", "6", "6", "--lambda", "0.5", "--m-override", "300"], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bench_writes_csv_and_flags_beat_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bench.cfg");
    let csv = dir.path().join("out.csv");
    std::fs::write(&cfg, "n = 10,10\nd = 2,2\nm = 50\ntrials = 5\n").unwrap();
    let out = run(
        &["bench", "l2", "--config", cfg.to_str().unwrap(), "--trials", "2", "--output", csv.to_str().unwrap()],
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = kronsketch::bench::read_csv(&csv).unwrap();
    // two trials and one mean
    assert_eq!(rows.len(), 3);
}

#[test]
fn exit_codes() {
    let out = run(&["bench", "l2", "--n", "10,10", "--d", "2,2", "--m", "20", "--trials", "1"], &[("KRONSKETCH_ORACLE_CAP", "5")]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["l2", "--factor", "/nonexistent/a.csv", "--rhs", "/nonexistent/b.csv"], &[]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["bench", "l2", "--trials", "0"], &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracle_is_hidden_from_help() {
    let out = run(&["--help"], &[]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("bench"));
    assert!(!text.contains("oracle"));
}
