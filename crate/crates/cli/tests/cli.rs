//! CLI contract tests: exit codes, output schemas, and byte-level
//! determinism of repeated runs (acceptance criterion 13).

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn dglab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dglab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn collect_csvs(root: &Path, below: &Path, out: &mut Vec<PathBuf>) {
    for entry in std::fs::read_dir(below).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            collect_csvs(root, &path, out);
        } else if path.extension().is_some_and(|e| e == "csv") {
            out.push(path.strip_prefix(root).unwrap().to_path_buf());
        }
    }
}

/// Byte-compares every CSV below two run directories.
fn assert_csvs_identical(a: &Path, b: &Path) {
    let mut files_a = Vec::new();
    let mut files_b = Vec::new();
    collect_csvs(a, a, &mut files_a);
    collect_csvs(b, b, &mut files_b);
    files_a.sort();
    files_b.sort();
    assert_eq!(files_a, files_b, "run directories differ in file sets");
    assert!(!files_a.is_empty(), "no CSV outputs found");
    for rel in &files_a {
        let bytes_a = std::fs::read(a.join(rel)).unwrap();
        let bytes_b = std::fs::read(b.join(rel)).unwrap();
        assert_eq!(bytes_a, bytes_b, "{} differs between runs", rel.display());
    }
}

#[test]
fn exit_codes_contract() {
    // unknown verb: usage error, no files
    let out = dglab(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(64));

    // missing required args
    let out = dglab(&["evolve-linear"]);
    assert_eq!(out.status.code(), Some(64));

    // verify without a mode
    let out = dglab(&["verify"]);
    assert_eq!(out.status.code(), Some(64));

    // happy path
    let out = dglab(&["verify-bounds", "--kmax", "64"]);
    assert_eq!(out.status.code(), Some(0));

    // help exits zero
    let out = dglab(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn coeffs_surface_quotes_exact_values() {
    let one = stdout(&dglab(&["coeffs", "--k", "1"]));
    assert!(one.contains("\"d_k\": \"3/4\""), "{one}");
    assert!(one.contains("\"diff_k\": \"11/18\""));
    assert!(one.contains("\"eps_k\": \"62/405\""));

    let two = stdout(&dglab(&["coeffs", "--k", "2"]));
    assert!(two.contains("\"d_k\": \"0/1\""));
    assert!(two.contains("\"diff_k\": \"-3/8\""));

    let five = stdout(&dglab(&["coeffs", "--k", "5"]));
    assert!(five.contains("\"diff_k\": \"-1269/2450\""));

    let out = dglab(&["coeffs", "--k", "0"]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn verify_bounds_cli_full_range() {
    // acceptance criterion 2 exercised end to end through the verb
    let out = dglab(&["verify-bounds", "--kmax", "100000"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("\"verified\": true"));
}

#[test]
fn coeffs_table_and_panels() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("table.csv");
    let out = dglab(&["coeffs", "--table", "--kmax", "50", "--out", table.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&table).unwrap();
    assert!(text.starts_with("k,d_k,diff_k,a_k,eps_k,lam1,lam2\n"));
    assert_eq!(text.lines().count(), 51);
    for panel in ["dk_diff", "ak", "epsk", "lamb1", "lamb2"] {
        let p = dir.path().join("plot_data").join(format!("{panel}.csv"));
        assert!(p.exists(), "missing panel {panel}");
    }
    // every lamb1 value inside the certified bracket
    let lamb1 = std::fs::read_to_string(dir.path().join("plot_data/lamb1.csv")).unwrap();
    for line in lamb1.lines().skip(1) {
        let v: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(v > 0.02 && v < 0.6, "λ1 value {v} outside bracket");
    }
}

fn write_init(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path
}

#[test]
fn evolve_linear_outputs_and_guard() {
    let dir = tempfile::tempdir().unwrap();
    let init = write_init(
        dir.path(),
        "e1.json",
        r#"{"kind": "single_mode", "amplitudes": {"1": 1.0}}"#,
    );
    let run = dir.path().join("run");
    let out = dglab(&[
        "evolve-linear",
        "--init",
        init.to_str().unwrap(),
        "--T",
        "2",
        "--dt",
        "1e-3",
        "--N",
        "64",
        "--snap-every",
        "1000",
        "--out",
        run.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let traj = std::fs::read_to_string(run.join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("time,energy,rayleigh,j1,j2,tail_flux\n"));
    assert_eq!(traj.lines().count(), 2002);
    assert!(run.join("run.json").exists());
    assert!(run.join("states/0000.csv").exists());
    assert!(run.join("plot_data/energy.csv").exists());

    // malformed spec: usage error, exit 64
    let bad = write_init(dir.path(), "bad.json", r#"{"kind": "nope"}"#);
    let out = dglab(&[
        "evolve-linear",
        "--init",
        bad.to_str().unwrap(),
        "--T",
        "1",
        "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn evolve_nonlinear_report() {
    let dir = tempfile::tempdir().unwrap();
    let init = write_init(
        dir.path(),
        "e2.json",
        r#"{"kind": "even_family", "amplitudes": {"2": 0.01}}"#,
    );
    let run = dir.path().join("run");
    let out = dglab(&[
        "evolve-nonlinear",
        "--init",
        init.to_str().unwrap(),
        "--T",
        "0.5",
        "--out",
        run.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["label"], "evolve-nonlinear (perturbation)");
    assert!(report["guard"].is_null());
    let traj = std::fs::read_to_string(run.join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("time,hdw_norm,"));
}

#[test]
fn run_record_manifest_hashes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let init = write_init(
        dir.path(),
        "e1.json",
        r#"{"kind": "single_mode", "amplitudes": {"1": 1.0}}"#,
    );
    let run = dir.path().join("run");
    let out = dglab(&[
        "--json",
        "evolve-linear",
        "--init",
        init.to_str().unwrap(),
        "--T",
        "0.1",
        "--N",
        "32",
        "--out",
        run.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    // last stdout line is the RunRecord
    let text = stdout(&out);
    let record: serde_json::Value =
        serde_json::from_str(text.lines().last().unwrap()).unwrap();
    let files = record["files"].as_object().unwrap();
    assert!(files.contains_key("trajectory.csv"));
    use sha2::Digest;
    let bytes = std::fs::read(run.join("trajectory.csv")).unwrap();
    let hash = hex::encode(sha2::Sha256::digest(&bytes));
    assert_eq!(files["trajectory.csv"].as_str().unwrap(), hash);
}

/// Criterion 13: repeated runs of the configurations of criteria 5, 8 and 11
/// produce byte-identical CSVs.
#[test]
fn criterion_13_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let init = write_init(
        dir.path(),
        "e1.json",
        r#"{"kind": "single_mode", "amplitudes": {"1": 1.0}}"#,
    );

    let init_arg = init.to_str().unwrap().to_string();
    // criterion 5, criterion 8 (both mode sets) and criterion 11 configurations
    let cases: Vec<(&str, Vec<String>)> = vec![
        (
            "linear",
            vec![
                "evolve-linear".into(),
                "--init".into(),
                init_arg.clone(),
                "--T".into(),
                "10".into(),
                "--dt".into(),
                "1e-3".into(),
                "--N".into(),
                "256".into(),
                "--snap-every".into(),
                "2000".into(),
            ],
        ),
        (
            "stab2",
            vec![
                "experiment".into(),
                "stability".into(),
                "--amplitude".into(),
                "0.01".into(),
                "--modes-set".into(),
                "2".into(),
                "--T".into(),
                "20".into(),
            ],
        ),
        (
            "stab24",
            vec![
                "experiment".into(),
                "stability".into(),
                "--amplitude".into(),
                "0.01".into(),
                "--modes-set".into(),
                "2,4".into(),
                "--T".into(),
                "20".into(),
            ],
        ),
        (
            "instab",
            vec![
                "experiment".into(),
                "instability".into(),
                "--epsilons".into(),
                "1e-2,1e-3,1e-4".into(),
                "--K".into(),
                "10".into(),
                "--linear-check".into(),
                "1e-6".into(),
            ],
        ),
    ];

    for (name, base_args) in cases {
        let run_a = dir.path().join(format!("{name}_a"));
        let run_b = dir.path().join(format!("{name}_b"));
        for out in [&run_a, &run_b] {
            let mut argv = base_args.clone();
            argv.push("--out".into());
            argv.push(out.to_str().unwrap().into());
            let argv: Vec<&str> = argv.iter().map(|s| s.as_str()).collect();
            let result = dglab(&argv);
            assert_eq!(
                result.status.code(),
                Some(0),
                "{name}: {}",
                String::from_utf8_lossy(&result.stderr)
            );
        }
        assert_csvs_identical(&run_a, &run_b);
        println!("acceptance 13 determinism ({name}): PASS — byte-identical CSVs");
    }
}

#[test]
fn verify_compare_identical_runs() {
    let dir = tempfile::tempdir().unwrap();
    let init = write_init(
        dir.path(),
        "e1.json",
        r#"{"kind": "single_mode", "amplitudes": {"1": 1.0}}"#,
    );
    let mk = |out: &Path| {
        let r = dglab(&[
            "evolve-linear",
            "--init",
            init.to_str().unwrap(),
            "--T",
            "0.5",
            "--N",
            "64",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(r.status.code(), Some(0));
    };
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    mk(&a);
    mk(&b);
    let out = dglab(&["verify", "--compare", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["max_rel"], 0.0);
}

#[test]
fn verify_cross_check_passes() {
    let out = dglab(&["verify", "--cross-check", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("oracle_collocation: pass"));
    assert!(text.contains("oracle_quadrature: pass"));
    assert!(text.contains("formulation_equivalence: pass"));
}
