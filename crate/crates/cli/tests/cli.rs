use std::path::Path;
use std::process::{Command, Output};

fn bellsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellsim"))
        .args(args)
        .env("BELLSIM_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

/// The `f` value printed by `run`.
fn printed_f(text: &str) -> Vec<f64> {
    text.lines()
        .map(|l| l.split_whitespace().collect::<Vec<_>>())
        .filter(|t| t.len() == 2 && t[0] == "f")
        .map(|t| t[1].parse().unwrap())
        .collect()
}

#[test]
fn two_photon_run_is_violated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"state": {"kind": "two_photon"}}"#);
    let o = bellsim(&["run", "--config", &cfg, "--angles", "pi/8,pi/4,3pi/8,0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("verdict                violated"), "{text}");
    assert!(printed_f(&text)[0] > 0.0);
}

#[test]
fn coherent_run_with_random_angles() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"engine": "both", "state": {"kind": "coherent", "z": [1, 0, 1, 0]}, "angles": "random", "seed": 9}"#,
    );
    let out = dir.path().join("r.csv");
    let o = bellsim(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.matches("verdict                not violated").count(), 2);
    let f = printed_f(&text);
    assert!((f[0] - f[1]).abs() < 1e-6);
    let csv = std::fs::read_to_string(out).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().nth(1).unwrap().starts_with("analytic,fixed,"));
}

#[test]
fn vacuum_gives_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"state": {"kind": "vacuum"}}"#);
    for engine in ["fock", "gaussian", "analytic"] {
        let o = bellsim(&["run", "--config", &cfg, "--engine", engine]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(printed_f(&stdout(&o)), vec![0.0]);
    }
}

#[test]
fn state_file_input() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "psi.json",
        r#"{"modes": 4, "cutoff": 2, "amplitudes": [
            {"occupation": [1, 0, 0, 1], "amplitude": 0.5},
            {"occupation": [1, 1, 0, 0], "amplitude": -0.5},
            {"occupation": [0, 0, 1, 1], "amplitude": [-0.5, 0]},
            {"occupation": [0, 1, 1, 0], "amplitude": 0.5}
        ]}"#,
    );
    let cfg = write(dir.path(), "c.json", r#"{"state": {"kind": "file", "path": "psi.json"}}"#);
    let o = bellsim(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let f = printed_f(&stdout(&o))[0];
    assert!((f - (2f64.sqrt() - 1.0) / 4.0).abs() < 1e-12);

    write(dir.path(), "bad.json", r#"{"modes": 4, "cutoff": 2, "amplitudes": [{"occupation": [1, 0, 0, 1], "amplitude": 0.5}]}"#);
    let cfg = write(dir.path(), "d.json", r#"{"state": {"kind": "file", "path": "bad.json"}}"#);
    assert_eq!(bellsim(&["run", "--config", &cfg]).status.code(), Some(1));
}

#[test]
fn invalid_configs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "a.json", r#"{"state": {"kind": "vacuum"}, "colour": 1}"#);
    let o = bellsim(&["run", "--config", &unknown]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown field"));

    let thermal_fock = write(
        dir.path(),
        "b.json",
        r#"{"engine": "fock", "state": {"kind": "squeezed_thermal", "u": 0.1, "v": 0.1, "kappa": 0.5}}"#,
    );
    assert_eq!(bellsim(&["run", "--config", &thermal_fock]).status.code(), Some(1));
    let none = bellsim(&["run"]);
    assert_eq!(none.status.code(), Some(1));
    assert_eq!(bellsim(&["run", "--config", "/nonexistent/c.json"]).status.code(), Some(1));
}

#[test]
fn bad_thread_count_is_an_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_bellsim"))
        .args(["validate", "--trials", "0"])
        .env("BELLSIM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn single_point_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.json",
        r#"{"sweep": {"u_start": 0, "u_stop": 0, "scenarios": ["equal"], "kappas": [1.0]}}"#,
    );
    let o = bellsim(&["sweep", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "u,v,kappa,f,neg_p_both,violated");
    assert_eq!(lines.len(), 2);
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields[3].parse::<f64>().unwrap(), 0.0);
    assert_eq!(fields[5], "0");
}

#[test]
fn sweep_csv_is_reproducible_and_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = bellsim(&["sweep", "--seed", "4", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    assert!(!bytes.contains(&b'\r'));
    let text = String::from_utf8(bytes).unwrap();
    assert_eq!(text.lines().count(), 1 + 61 * 9);
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let inside = v[3] <= 1e-9 && v[3] >= v[4] - 1e-9;
        assert!(inside != (v[5] == 1.0), "{line}");
        // 17 significant digits
        assert_eq!(line.split(',').next().unwrap().split('e').next().unwrap().replace(['.', '-'], "").len(), 17);
    }
    assert_eq!(bellsim(&["sweep", "--engine", "fock"]).status.code(), Some(1));
}

#[test]
fn sweep_to_unwritable_path_fails() {
    assert_eq!(bellsim(&["sweep", "--out", "/nonexistent/dir/x.csv"]).status.code(), Some(1));
}

fn best_f(text: &str) -> f64 {
    let line = text.lines().find(|l| l.trim_start().starts_with("best f")).unwrap();
    line.split_whitespace().nth(2).unwrap().parse().unwrap()
}

#[test]
fn scans() {
    let dir = tempfile::tempdir().unwrap();
    let vac = write(dir.path(), "v.json", r#"{"state": {"kind": "vacuum"}}"#);
    let o = bellsim(&["scan", "--config", &vac, "--grid", "4", "--no-refine"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(best_f(&stdout(&o)), 0.0);

    let two = write(dir.path(), "t.json", r#"{"state": {"kind": "two_photon"}, "scan": {"grid": 16}}"#);
    let o = bellsim(&["scan", "--config", &two, "--refine"]);
    assert!((best_f(&stdout(&o)) - (2f64.sqrt() - 1.0) / 4.0).abs() < 1e-6);

    let sq = write(
        dir.path(),
        "s.json",
        r#"{"state": {"kind": "squeezed_thermal", "u": 0.6, "v": 0.6, "kappa": 1.0}}"#,
    );
    let fixed = printed_f(&stdout(&bellsim(&["run", "--config", &sq])))[0];
    let o = bellsim(&["scan", "--config", &sq, "--grid", "8"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(best_f(&stdout(&o)) >= fixed);
}

#[test]
fn validate_passes() {
    let o = bellsim(&["validate", "--trials", "200", "--seed", "3"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert_eq!(text.matches("PASS").count(), 4);
}

#[test]
fn corrupted_tolerance_fails_validation() {
    let o = bellsim(&["validate", "--trials", "20", "--verdict-tol", "-1"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("FAIL classical mixtures"));
    assert!(text.contains("first at seed 0 trial 0"));
}

#[test]
fn zero_trials_is_a_warning() {
    let o = bellsim(&["validate", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}
