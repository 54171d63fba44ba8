use std::path::Path;
use std::process::{Command, Output};

use eof_core::cli::{format_state, parse_state, read_state_file};
use eof_core::numerics::hermitian_eig;
use eof_core::oracles::{eof_from_concurrence, isotropic_eof};
use eof_core::states::BipartiteDims;
use eof_core::DensityMatrix;
use tempfile::TempDir;

fn eof(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eof"))
        .args(args)
        .env_remove("EOF_SOLVER_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn reported_eof(out: &Output) -> f64 {
    let text = stdout(out);
    let line = text
        .lines()
        .find(|l| l.starts_with("E_F = "))
        .expect("E_F line");
    line["E_F = ".len()..]
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

const BELL: &str = "# |Phi+>\n2 2\n\
0.5 0 0 0 0 0 0.5 0\n\
0 0 0 0 0 0 0 0\n\
0 0 0 0 0 0 0 0\n\
0.5 0 0 0 0 0 0.5 0\n";

#[test]
fn compute_bell_state() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "bell.txt", BELL);
    let out = eof(&["compute", &file, "--oracle", "wootters"]);
    assert_eq!(out.status.code(), Some(0));
    assert!((reported_eof(&out) - 1.0).abs() < 1e-12);
    let text = stdout(&out);
    assert!(text.contains("certified: true"));
    assert!(text.contains("wootters = 1.00000000000000"));
}

#[test]
fn compute_maximally_mixed_state() {
    let dir = TempDir::new().unwrap();
    let rho = DensityMatrix::maximally_mixed(BipartiteDims::square(2).unwrap());
    let file = write(&dir, "mixed.txt", &format_state(&rho));
    let out = eof(&["compute", &file]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(reported_eof(&out), 0.0);
}

#[test]
fn compute_writes_trace() {
    let dir = TempDir::new().unwrap();
    let state = path(&dir, "state.txt");
    let trace = path(&dir, "trace.csv");
    assert_eq!(
        eof(&["random", "--dA", "2", "--dB", "2", "--rank", "3", "--seed", "4", "--out", &state])
            .status
            .code(),
        Some(0)
    );
    let out = eof(&["compute", &state, "--trace", &trace, "--n-states", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("iteration,e_av,grad_norm,step_alpha,kind\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows[0][4], "initial");
    assert!(rows.iter().any(|r| r[4] == "line_search"));
}

#[test]
fn compute_is_seed_independent() {
    let dir = TempDir::new().unwrap();
    let state = path(&dir, "qutrits.txt");
    eof(&[
        "random", "--dA", "3", "--dB", "3", "--rank", "4", "--seed", "77", "--out", &state,
    ]);
    let a = reported_eof(&eof(&["compute", &state, "--seed", "1"]));
    let b = reported_eof(&eof(&["compute", &state, "--seed", "2"]));
    assert!(a > 0.0);
    assert!((a - b).abs() <= 1e-7, "{a} vs {b}");
}

#[test]
fn malformed_input_exits_with_one() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.txt", "2 2\n1 0 0 0\n");
    assert_eq!(eof(&["compute", &bad]).status.code(), Some(1));
    assert_eq!(
        eof(&["compute", &path(&dir, "missing.txt")]).status.code(),
        Some(1)
    );
    assert_eq!(eof(&["compute"]).status.code(), Some(1));
    assert_eq!(
        eof(&["sweep", "--channel", "amplitude"]).status.code(),
        Some(1)
    );

    let qutrits = path(&dir, "q.txt");
    eof(&[
        "random", "--dA", "3", "--dB", "3", "--rank", "2", "--out", &qutrits,
    ]);
    assert_eq!(
        eof(&["compute", &qutrits, "--oracle", "wootters"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn uncertified_run_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let state = path(&dir, "q.txt");
    eof(&[
        "random", "--dA", "3", "--dB", "3", "--rank", "9", "--seed", "3", "--out", &state,
    ]);
    let out = eof(&["compute", &state, "--max-iters", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("certified: false"));
}

#[test]
fn random_files_round_trip_and_repeat() {
    let dir = TempDir::new().unwrap();
    let a = path(&dir, "a.txt");
    let b = path(&dir, "b.txt");
    eof(&[
        "random", "--dA", "3", "--dB", "3", "--rank", "9", "--seed", "5", "--out", &a,
    ]);
    eof(&[
        "random", "--dA", "3", "--dB", "3", "--rank", "9", "--seed", "5", "--out", &b,
    ]);
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());

    let rho = parse_state(&text).unwrap();
    assert_eq!(format_state(&rho), text);
    let eig = hermitian_eig(rho.matrix()).unwrap();
    assert_eq!(eig.eigenvalues.iter().filter(|&&x| x > 1e-12).count(), 9);
}

#[test]
fn random_rank_one_is_pure() {
    let dir = TempDir::new().unwrap();
    let file = path(&dir, "pure.txt");
    eof(&[
        "random", "--dA", "2", "--dB", "3", "--rank", "1", "--seed", "9", "--out", &file,
    ]);
    let rho = read_state_file(Path::new(&file)).unwrap();
    let m = rho.matrix();
    assert!(((m * m).trace().re - 1.0).abs() < 1e-12);
}

#[test]
fn random_to_unwritable_path_fails() {
    let out = eof(&[
        "random",
        "--dA",
        "2",
        "--dB",
        "2",
        "--rank",
        "2",
        "--out",
        "/nonexistent/dir/x.txt",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str, env: Option<&str>, flag: Option<&str>| {
        let out = path(&dir, name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_eof"));
        cmd.args([
            "random", "--dA", "2", "--dB", "2", "--rank", "2", "--out", &out,
        ]);
        cmd.env_remove("EOF_SOLVER_SEED");
        if let Some(seed) = env {
            cmd.env("EOF_SOLVER_SEED", seed);
        }
        if let Some(seed) = flag {
            cmd.args(["--seed", seed]);
        }
        assert!(cmd.status().unwrap().success());
        std::fs::read_to_string(out).unwrap()
    };
    let env_only = run("env.txt", Some("42"), None);
    let flag_only = run("flag.txt", None, Some("42"));
    let both = run("both.txt", Some("7"), Some("42"));
    let default = run("default.txt", None, None);
    assert_eq!(env_only, flag_only);
    assert_eq!(both, flag_only);
    assert_ne!(default, flag_only);
}

#[test]
fn qubit_depolarizing_sweep_follows_wootters() {
    let out = eof(&[
        "sweep",
        "--d",
        "2",
        "--channel",
        "depolarizing",
        "--p-start",
        "0",
        "--p-end",
        "1",
        "--p-steps",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("p,eof_ebits,eof_normalized,certified\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 3);
    let values: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    let f = 1.0 - 0.5 + 0.5 / 4.0;
    let expected = [1.0, eof_from_concurrence((2.0 * f - 1.0f64).max(0.0)), 0.0];
    for (v, e) in values.iter().zip(expected) {
        assert!((v - e).abs() < 1e-11, "{v} vs {e}");
    }
}

#[test]
fn single_point_sweep() {
    let out = eof(&[
        "sweep",
        "--d",
        "3",
        "--p-start",
        "0",
        "--p-end",
        "0",
        "--p-steps",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0].parse::<f64>().unwrap(), 0.0);
    assert!((rows[0][1].parse::<f64>().unwrap() - 3f64.log2()).abs() < 1e-11);
    assert_eq!(rows[0][2], "1.00000000000");
    assert_eq!(rows[0][3], "true");
}

#[test]
fn qutrit_depolarizing_sweep_is_isotropic_and_stable() {
    let dir = TempDir::new().unwrap();
    let a = path(&dir, "a.csv");
    let b = path(&dir, "b.csv");
    let args = |out: &str| {
        vec![
            "sweep".to_string(),
            "--d".into(),
            "3".into(),
            "--channel".into(),
            "depolarizing".into(),
            "--p-start".into(),
            "0".into(),
            "--p-end".into(),
            "0.6".into(),
            "--p-steps".into(),
            "4".into(),
            "--pad-states".into(),
            "3".into(),
            "--seed".into(),
            "11".into(),
            "--out".into(),
            out.to_string(),
        ]
    };
    let run = |out: &str| eof(&args(out).iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(run(&a).status.code(), Some(0));
    assert_eq!(run(&b).status.code(), Some(0));
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    for row in csv_rows(&text) {
        let p: f64 = row[0].parse().unwrap();
        let e: f64 = row[1].parse().unwrap();
        let exact = isotropic_eof(3, 1.0 - p + p / 9.0).unwrap();
        assert!((e - exact).abs() <= 1e-6, "p = {p}: {e} vs {exact}");
        assert!((row[2].parse::<f64>().unwrap() - e / 3f64.log2()).abs() < 1e-11);
    }
}

#[test]
fn isotropic_formula_endpoints() {
    let out = eof(&["isotropic", "--d", "3", "--F-grid", "0.3333333333333333,1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("F,eof_formula\n"));
    let rows = csv_rows(&text);
    assert!(rows[0][1].parse::<f64>().unwrap().abs() < 1e-12);
    assert!((rows[1][1].parse::<f64>().unwrap() - 3f64.log2()).abs() < 1e-11);
}

#[test]
fn isotropic_engine_comparison() {
    let out = eof(&[
        "isotropic",
        "--d",
        "3",
        "--F-grid",
        "1,0.5,0.95",
        "--compare-engine",
        "--pad-states",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("F,eof_formula,eof_engine,abs_diff\n"));
    for row in csv_rows(&text) {
        assert!(row[3].parse::<f64>().unwrap() <= 1e-6, "{row:?}");
    }
}

#[test]
fn isotropic_qubits_are_perturbed_automatically() {
    let out = eof(&[
        "isotropic",
        "--d",
        "2",
        "--F-grid",
        "0.9",
        "--compare-engine",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&stdout(&out));
    assert!(rows[0][3].parse::<f64>().unwrap() <= 1e-8);
}
