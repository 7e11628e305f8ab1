use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cs_adapt::matrix::{gaussian_matrix, read_matrix_csv, write_matrix_csv, write_vector_csv};
use cs_adapt::RngSeed;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cs-adapt"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn cs-adapt")
}

fn stderr_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().unwrap_or_default();
    assert_eq!(text.trim_end().lines().count(), 1, "expected one stderr line, got {text:?}");
    serde_json::from_str(line).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {line}"))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_matches_golden_file() {
    let mut text = String::new();
    for args in [
        vec!["--help"],
        vec!["optimize", "--help"],
        vec!["recover", "--help"],
        vec!["experiment", "--help"],
        vec!["coherence", "--help"],
    ] {
        let out = run(&args);
        assert!(out.status.success());
        text.push_str(&format!("$ cs-adapt {}\n", args.join(" ")));
        text.push_str(&String::from_utf8(out.stdout).unwrap());
        text.push('\n');
    }
    let golden = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/help.txt");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&golden, &text).unwrap();
    }
    let expected = std::fs::read_to_string(&golden).expect("golden help file");
    assert_eq!(text, expected, "help text changed; rerun with UPDATE_GOLDEN=1 to accept");
}

#[test]
fn version_flag() {
    let out = run(&["--version"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("cs-adapt "));
}

#[test]
fn missing_config_is_a_usage_error_naming_the_path() {
    let out = run(&["experiment", "--config", "missing.json"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_json(&out);
    assert_eq!(err["error"], "usage");
    assert!(err["message"].as_str().unwrap().contains("missing.json"));
}

#[test]
fn unknown_flag_and_subcommand_exit_1() {
    for args in [vec!["optimize", "--objective", "mua", "--bogus"], vec!["frobnicate"], vec![]] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert_eq!(stderr_json(&out)["error"], "usage");
    }
}

#[test]
fn invalid_parameter_exit_1_and_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("phi.csv");
    let out = run(&[
        "optimize",
        "--objective",
        "mua",
        "--m",
        "4",
        "--n",
        "8",
        "--shrink-factor",
        "1.5",
        "--out",
        s(&out_path),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out_path.exists());
}

#[test]
fn optimize_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for objective in ["mua", "cross"] {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let phi = dir.path().join(format!("{objective}{rep}.csv"));
            let report = dir.path().join(format!("{objective}{rep}.json"));
            let out = run(&[
                "optimize",
                "--objective",
                objective,
                "--dict",
                "idct",
                "--m",
                "6",
                "--n",
                "16",
                "--l",
                "32",
                "--seed",
                "7",
                "--iters",
                "40",
                "--out",
                s(&phi),
                "--report",
                s(&report),
            ]);
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
            let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
            assert_eq!(r["objective"].as_array().unwrap().len(), 41);
            assert!(r["final_coherence"].as_f64().unwrap() <= r["objective"][0].as_f64().unwrap());
            outputs.push(std::fs::read(&phi).unwrap());
        }
        assert_eq!(outputs[0], outputs[1], "{objective}");
        let m = read_matrix_csv(dir.path().join(format!("{objective}0.csv"))).unwrap();
        assert_eq!(m.shape(), (6, 16));
    }
}

#[test]
fn coherence_reduced_writes_distribution() {
    let dir = tempfile::tempdir().unwrap();
    let phi = dir.path().join("phi.csv");
    let psi = dir.path().join("psi.csv");
    write_matrix_csv(&gaussian_matrix(5, 12, RngSeed(1)).unwrap(), &phi).unwrap();
    write_matrix_csv(&gaussian_matrix(12, 20, RngSeed(2)).unwrap(), &psi).unwrap();
    let dist = dir.path().join("dist.csv");
    let hist = dir.path().join("hist.csv");
    let out = run(&[
        "coherence",
        "--matrix",
        s(&phi),
        "--dict",
        s(&psi),
        "--reduced",
        "--out",
        s(&dist),
        "--hist",
        s(&hist),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&dist).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("pair_label,value"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5 * 4 / 2 + 5 * 20);
    assert_eq!(rows.iter().filter(|r| r.starts_with("phi_phi,")).count(), 10);
    assert_eq!(rows.iter().filter(|r| r.starts_with("psi_psi,")).count(), 0);
    let h = std::fs::read_to_string(&hist).unwrap();
    assert!(h.starts_with("bin_center,count\n"));
    let total: usize = h.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(total, 110);
}

#[test]
fn coherence_of_a_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let phi = dir.path().join("phi.csv");
    write_matrix_csv(&gaussian_matrix(4, 8, RngSeed(3)).unwrap(), &phi).unwrap();
    let out = run(&["coherence", "--matrix", s(&phi), "--dict", "idct"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 16 * 15 / 2);
    assert!(text.lines().skip(1).all(|l| l.starts_with("a_a,")));
}

fn recovery_fixture(dir: &Path) -> (PathBuf, PathBuf, PathBuf, PathBuf) {
    let phi = gaussian_matrix(18, 20, RngSeed(4)).unwrap();
    let psi = gaussian_matrix(20, 40, RngSeed(5)).unwrap();
    let mut alpha = vec![0.0; 40];
    alpha[3] = 1.5;
    alpha[27] = -0.8;
    let y = phi.matmul(&psi).unwrap().matvec(&alpha).unwrap();
    let paths = (dir.join("phi.csv"), dir.join("psi.csv"), dir.join("y.csv"), dir.join("alpha.csv"));
    write_matrix_csv(&phi, &paths.0).unwrap();
    write_matrix_csv(&psi, &paths.1).unwrap();
    write_vector_csv(&y, &paths.2).unwrap();
    write_vector_csv(&alpha, &paths.3).unwrap();
    paths
}

#[test]
fn recover_prints_estimate_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let (phi, psi, y, alpha) = recovery_fixture(dir.path());
    for algo in ["omp", "bp"] {
        let mut args = vec!["recover", "--matrix", s(&phi), "--dict", s(&psi), "--y", s(&y), "--algo", algo];
        args.extend(["--alpha", s(&alpha)]);
        if algo == "omp" {
            args.extend(["--k", "2"]);
        }
        let out = run(&args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let est: Vec<f64> = String::from_utf8(out.stdout.clone())
            .unwrap()
            .lines()
            .map(|l| l.parse().unwrap())
            .collect();
        assert_eq!(est.len(), 40);
        assert!((est[3] - 1.5).abs() < 1e-8 && (est[27] + 0.8).abs() < 1e-8, "{algo}");
        let meta = stderr_json(&out);
        assert_eq!(meta["algorithm"], algo);
        assert_eq!(meta["success"], true);
        assert_eq!(meta["support"], serde_json::json!([3, 27]));
    }
}

#[test]
fn recover_dimension_mismatch_is_a_computation_error() {
    let dir = tempfile::tempdir().unwrap();
    let (phi, psi, _, _) = recovery_fixture(dir.path());
    let bad_y = dir.path().join("bad_y.csv");
    write_vector_csv(&[1.0, 2.0, 3.0], &bad_y).unwrap();
    let est = dir.path().join("est.csv");
    let out = run(&[
        "recover",
        "--matrix",
        s(&phi),
        "--dict",
        s(&psi),
        "--y",
        s(&bad_y),
        "--algo",
        "bp",
        "--out",
        s(&est),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "computation");
    assert!(!est.exists());
}

#[test]
fn malformed_matrix_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let phi = dir.path().join("phi.csv");
    std::fs::write(&phi, "1.0,2.0\n3.0,abc\n").unwrap();
    let out = run(&["coherence", "--matrix", s(&phi), "--dict", "idct"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_json(&out);
    assert!(err["message"].as_str().unwrap().contains("phi.csv"));
}

#[test]
fn experiment_writes_outputs_independent_of_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"m": 6, "n": 12, "l": 24, "matrix_variants": ["rand", "cross"], "sparsity_levels": [0, 1, 3],
            "trials_per_level": 40, "master_seed": 5, "cross_coherence": {"iterations": 50},
            "emit_distributions": true}"#,
    )
    .unwrap();
    let mut curves = Vec::new();
    for threads in ["1", "3"] {
        let out_dir = dir.path().join(format!("out{threads}"));
        let out = run(&["--threads", threads, "experiment", "--config", s(&cfg), "--out", s(&out_dir)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        for f in ["curves.csv", "provenance.json", "dist_rand_a.csv", "dist_cross_reduced.csv"] {
            assert!(out_dir.join(f).exists(), "{f}");
        }
        curves.push(std::fs::read(out_dir.join("curves.csv")).unwrap());
    }
    assert_eq!(curves[0], curves[1]);
    let text = String::from_utf8(curves.pop().unwrap()).unwrap();
    let points = cs_adapt::harness::parse_curves_csv(&text).unwrap();
    assert_eq!(points.len(), 2 * 2 * 3);
    assert!(points.iter().filter(|p| p.sparsity == 0).all(|p| p.frequency == 1.0));
}

#[test]
fn experiment_rejects_unknown_config_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"trials": 10}"#).unwrap();
    let out = run(&["experiment", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("curves.csv").exists());
}
