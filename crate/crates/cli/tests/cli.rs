use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use spectral_intervals::{BoundaryMatrix, IntervalUnion};
use spectral_intervals_cli::ProblemFile;
use tempfile::TempDir;

const PAIR: &str = r#"{"intervals": [[0, 1], [2, 3]],
  "matrix": [[[0.5, 0.5], [0.5, -0.5]], [[0.5, -0.5], [0.5, 0.5]]]}"#;
const SWAP: &str = r#"{"intervals": [[0, 1], [2, 3]], "matrix": [[[0, 0], [1, 0]], [[1, 0], [0, 0]]]}"#;
const UNIT: &str = r#"{"intervals": [[0, 1]], "matrix": [[[1, 0]]]}"#;

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_spectral-intervals"));
    cmd.args(args).env_remove("SPECTRAL_INTERVALS_MAX_PATHS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["verdicts"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap_or_else(|| panic!("no check {name}"))
}

fn witness(check: &Value, key: &str) -> f64 {
    check["witness"].as_array().unwrap().iter().find(|w| w[0] == key).unwrap()[1].as_f64().unwrap()
}

#[test]
fn single_interval_spectrum_as_csv() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "unit.json", UNIT);
    let out = run(&["spectrum", arg(&p), "--window", "-2.5", "2.5", "--format", "csv"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("lambda,dimension,constant,det_residual,eig_residual"));
    let lambdas: Vec<f64> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(lambdas.len(), 5);
    for (l, k) in lambdas.iter().zip(-2..=2) {
        assert!((l - k as f64).abs() < 1e-9, "{lambdas:?}");
    }
}

#[test]
fn pair_spectrum_is_quarter_lattice() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "pair.json", PAIR);
    let out = run(&["spectrum", arg(&p), "--window", "-2.1", "2.1"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["status"], "pass");
    let got: Vec<f64> = r["spectrum"].as_array().unwrap().iter().map(|p| p["lambda"].as_f64().unwrap()).collect();
    let want: Vec<f64> = (-2..=1).flat_map(|k| [k as f64, k as f64 + 0.25]).chain([2.0]).collect();
    assert_eq!(got.len(), want.len(), "{got:?}");
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-9, "{got:?}");
    }
    assert_eq!(r["result"]["matrix_verdict"], "spectral");
}

#[test]
fn verify_reports_swap_witness() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "swap.json", SWAP);
    let out = run(&["verify", arg(&p), "--trials", "40", "--window", "-3", "3"], &[]);
    assert_eq!(out.status.code(), Some(0), "a failed verdict is still a successful run");
    let r = json(&out);
    assert_eq!(r["status"], "fail");
    assert_eq!(r["result"]["verdict"], "not_spectral");
    let m = check(&r, "spectral_matrix");
    assert_eq!(m["status"], "fail");
    assert!((witness(m, "witness") - 0.5).abs() < 1e-9);
    assert_eq!(check(&r, "local_translation")["status"], "fail");
    assert_eq!(check(&r, "path_sum_identities")["status"], "fail");
    assert_eq!(check(&r, "unitarity")["status"], "pass");
    assert_eq!(check(&r, "congruence_chain")["status"], "skipped");
}

#[test]
fn verify_passes_spectral_pair() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "pair.json", PAIR);
    let out = run(&["verify", arg(&p), "--trials", "40", "--window", "-3", "3"], &[]);
    let r = json(&out);
    assert_eq!(r["status"], "pass", "{r:#}");
    assert_eq!(r["result"]["verdict"], "spectral");
}

#[test]
fn gap_criterion_short_circuits() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "gap.json", r#"{"intervals": [[0, 1], [1.5, 2.5]], "matrix": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}"#);
    let r = json(&run(&["verify", arg(&p)], &[]));
    let verdicts = r["verdicts"].as_array().unwrap();
    assert_eq!(verdicts.len(), 1);
    assert_eq!(verdicts[0]["name"], "gap_criterion");
    assert_eq!(verdicts[0]["status"], "fail");
    assert!((witness(&verdicts[0], "gap") - 0.5).abs() < 1e-12);
}

#[test]
fn classify_weighted_swap_recovers_theta() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "w.json", r#"{"intervals": [[0, 1], [3, 4]], "matrix": [[[0, 0], [0, 1]], [[-1, 0], [0, 0]]]}"#);
    let r = json(&run(&["classify", arg(&p), "--window", "-5.2", "5.2"], &[]));
    assert_eq!(r["result"]["summary"], "T_B = R: no; F_B = R: yes");
    assert!((r["result"]["suite"]["theta0"].as_f64().unwrap() - 0.25).abs() < 1e-9);
    assert_eq!(r["status"], "pass");
}

#[test]
fn classify_power_condition() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "pair.json", PAIR);
    let r = json(&run(&["classify", arg(&p), "--t0", "2", "--condition", "multiplicative"], &[]));
    // B^2 is the swap, so t0 = 2 passes the necessary condition
    assert_eq!(check(&r, "power_condition")["status"], "pass");
    assert_eq!(check(&r, "power_aggregate")["status"], "pass");
    assert_eq!(r["result"]["power"]["p"], 2);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", r#"{"intervals": [[0, 1], [2, 3]], "matrix": [[[0.9, 0], [0.5, 0]], [[0.5, 0], [0.5, 0]]]}"#);
    let out = run(&["spectrum", arg(&bad)], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not unitary"));

    let pair = write(&dir, "pair.json", PAIR);
    let out = run(&["evolve", arg(&pair), "--t", "40"], &[("SPECTRAL_INTERVALS_MAX_PATHS", "1000")]);
    assert_eq!(out.status.code(), Some(3));
    let r = json(&out);
    assert_eq!(r["error"]["class"], "guard");
    assert!(r["error"]["estimate"].as_f64().unwrap() > 1000.0);

    assert_eq!(run(&["spectrum"], &[]).status.code(), Some(1));
    assert_eq!(run(&["spectrum", arg(&pair), "--window", "3", "1"], &[]).status.code(), Some(1));
    assert_eq!(run(&["paths", arg(&pair), "--x", "1.5", "--t", "1"], &[]).status.code(), Some(1));
    assert_eq!(run(&["--help"], &[]).status.code(), Some(0));
}

#[test]
fn path_cap_comes_from_environment() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "pair.json", PAIR);
    let args = ["paths", arg(&p), "--x", "0.5", "--t", "2"];
    assert_eq!(run(&args, &[("SPECTRAL_INTERVALS_MAX_PATHS", "3")]).status.code(), Some(3));
    let out = run(&args, &[("SPECTRAL_INTERVALS_MAX_PATHS", "4")]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["result"]["count"], 4);
    assert_eq!(check(&r, "identities")["status"], "pass");
    assert_eq!(check(&r, "probability")["status"], "pass");
}

#[test]
fn paths_csv_lists_words() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "pair.json", PAIR);
    let out = run(&["paths", arg(&p), "--x", "0.5", "--t", "-0.25", "--format", "csv"], &[]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "word,direction,remainder,end,re,im\n1,backward,0.75,0.25,1.0,0.0\n");
}

#[test]
fn evolve_eigenfunction_matches_phase() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "pair.json", PAIR);
    let r = json(&run(&["evolve", arg(&p), "--t", "1.3", "--function", "eigenfunction:2", "--samples", "3"], &[]));
    assert_eq!(r["status"], "pass", "{r:#}");
    assert_eq!(check(&r, "spectral_oracle")["status"], "pass");
    assert_eq!(r["result"]["samples"].as_array().unwrap().len(), 6);
}

#[test]
fn evolve_rejects_function_outside_domain() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "pair.json", PAIR);
    let f = write(&dir, "f.json", r#"{"intervals": [[{"freq": 0, "poly": [[1, 0]]}], [{"freq": 0, "poly": [[2, 0]]}]]}"#);
    let out = run(&["evolve", arg(&p), "--t", "0.5", "--function", &format!("@{}", arg(&f))], &[]);
    assert_eq!(out.status.code(), Some(1));
    let ok = write(&dir, "g.json", r#"{"intervals": [[{"freq": 0, "poly": [[1, 0]]}], [{"freq": 0, "poly": [[1, 0]]}]]}"#);
    let r = json(&run(&["evolve", arg(&p), "--t", "0.5", "--function", &format!("@{}", arg(&ok))], &[]));
    assert_eq!(r["status"], "pass");
}

#[test]
fn congruence_of_adjacent_pair() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "adj.json", r#"{"intervals": [[0, 1], [3, 4]], "matrix": [[[0, 0], [1, 0]], [[1, 0], [0, 0]]]}"#);
    let r = json(&run(&["congruence", arg(&p)], &[]));
    assert_eq!(r["status"], "pass", "{r:#}");
    let swap = write(&dir, "swap.json", SWAP);
    let r = json(&run(&["congruence", arg(&swap)], &[]));
    assert_eq!(check(&r, "tiling")["status"], "fail");
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing");
    v
}

#[test]
fn reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "pair.json", PAIR);
    let a = json(&run(&["verify", arg(&p), "--trials", "20", "--seed", "7"], &[]));
    let b = json(&run(&["verify", arg(&p), "--trials", "20", "--seed", "7", "--jobs", "1"], &[]));
    let mut a = without_timing(a);
    let mut b = without_timing(b);
    a.as_object_mut().unwrap().remove("args");
    b.as_object_mut().unwrap().remove("args");
    assert_eq!(a, b);
}

#[test]
fn out_flag_writes_file() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "unit.json", UNIT);
    let target = dir.path().join("report.json");
    let out = run(&["spectrum", arg(&p), "--out", arg(&target)], &[]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(target).unwrap()).unwrap();
    assert_eq!(r["command"], "spectrum");
    assert_eq!(r["inputs_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn problem_file_round_trip() {
    let omega = IntervalUnion::new(&[(-1.0, 0.5), (2.0, 2.25)]).unwrap();
    let b = BoundaryMatrix::permutation(&[1, 0]).unwrap();
    let text = ProblemFile::from_parts(&omega, &b).to_json();
    let parsed = ProblemFile::from_json(&text).unwrap();
    assert_eq!(parsed.to_json(), text);
    let problem = parsed.validate().unwrap();
    assert_eq!(problem.omega, omega);
    assert_eq!(problem.b.matrix().max_abs_diff(b.matrix()), 0.0);
}

#[test]
fn shipped_problems_verify() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("problems");
    for (name, verdict) in [("unit", "spectral"), ("pair", "spectral"), ("weighted_swap", "spectral"), ("swap", "not_spectral")] {
        let p = dir.join(format!("{name}.json"));
        let out = run(&["verify", arg(&p), "--trials", "30"], &[]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        assert_eq!(json(&out)["result"]["verdict"], verdict, "{name}");
    }
}
