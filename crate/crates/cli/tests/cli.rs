//! End-to-end tests of the `trust-regions` binary: artifact schemas, CSV
//! determinism, bundle verification, and the exit-status taxonomy.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_trust-regions"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, content).unwrap();
    path
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

const BT_CONFIG: &str = r#"{
  "task": "binary-trust",
  "utility": {"kind": "quadratic-loss"},
  "tau": {"kind": "uniform"},
  "alpha": "0.75"
}"#;

#[test]
fn binary_trust_golden_row() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "bt.json", BT_CONFIG);
    let out_dir = tmp.path().join("out");
    let out = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        exit_code(&out),
        0,
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(out_dir.join("binary_trust.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("alpha,lo,hi,cutoff"));
    let fields: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|f| f.parse().unwrap())
        .collect();
    // Golden values from the quadratic-root oracle: (sqrt(10)-1)/6 and its
    // mirror.
    let lo = (10.0_f64.sqrt() - 1.0) / 6.0;
    assert_eq!(fields[0], 0.75);
    assert!((fields[1] - lo).abs() < 1e-6, "lo {}", fields[1]);
    assert!((fields[2] - (1.0 - lo)).abs() < 1e-6, "hi {}", fields[2]);
    assert_eq!(fields[3], 0.5);
    // Stdout carries the one-line summary.
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("binary-trust alpha=0.75"), "{stdout}");
}

#[test]
fn artifacts_round_trip_and_rerun_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "bt.json", BT_CONFIG);
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    for dir in [&out_a, &out_b] {
        let out = run(&[
            "solve",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&out), 0);
    }
    // Determinism: byte-identical artifacts across runs.
    for name in ["binary_trust.csv", "binary_trust.json"] {
        assert_eq!(
            fs::read(out_a.join(name)).unwrap(),
            fs::read(out_b.join(name)).unwrap(),
            "{name} differs between runs"
        );
    }
    // Round trip: the JSON artifact re-parses to the same value tree.
    let text = fs::read_to_string(out_a.join("binary_trust.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    let reserialized = serde_json::to_string_pretty(&value).unwrap() + "\n";
    let revalue: serde_json::Value = serde_json::from_str(&reserialized).unwrap();
    assert_eq!(value, revalue);
    assert_eq!(value["schema_version"], "1");
}

const SWEEP_CONFIG: &str = r#"{
  "task": "sweep",
  "utility": {"kind": "quadratic-loss"},
  "tau": {"kind": "uniform"},
  "alphas": [0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 1.0]
}"#;

#[test]
fn sweep_is_monotone_and_jobs_invariant() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "sweep.json", SWEEP_CONFIG);
    let serial = tmp.path().join("serial");
    let parallel = tmp.path().join("parallel");
    for (dir, jobs) in [(&serial, "1"), (&parallel, "4")] {
        let out = run(&[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
            "--jobs",
            jobs,
        ]);
        assert_eq!(
            exit_code(&out),
            0,
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    assert_eq!(
        fs::read(serial.join("sweep.csv")).unwrap(),
        fs::read(parallel.join("sweep.csv")).unwrap(),
        "sweep output depends on --jobs"
    );
    let csv = fs::read_to_string(serial.join("sweep.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 11);
    for w in rows.windows(2) {
        assert!(
            w[1][1] <= w[0][1] && w[1][2] >= w[0][2],
            "columns not monotone"
        );
    }
    assert_eq!(rows[0][1], 0.5);
    assert!(rows[10][1] <= 1e-6 && rows[10][2] >= 1.0 - 1e-6);
}

#[test]
fn mva_from_csv_matrix() {
    let tmp = tempfile::tempdir().unwrap();
    let matrix = write(tmp.path(), "pi.csv", "1,0,0\n0,1,0\n0,0,1\n");
    let cfg = write(
        tmp.path(),
        "mva.json",
        &format!(
            r#"{{"task": "mva", "matrix_csv": {:?}}}"#,
            matrix.to_str().unwrap()
        ),
    );
    let out_dir = tmp.path().join("out");
    let out = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        exit_code(&out),
        0,
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let artifact: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("mva.json")).unwrap()).unwrap();
    let alpha_star = artifact["solution"]["alpha_star"].as_f64().unwrap();
    assert!((alpha_star - 1.0 / 3.0).abs() < 1e-8, "{alpha_star}");
    assert_eq!(artifact["solution"]["rank"], 3);
}

#[test]
fn full_bundle_verifies_then_corruption_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let out_str = out_dir.to_str().unwrap().to_string();

    // Emit binary-trust, spherical, binary-action, and TRE artifacts.
    let bt = write(tmp.path(), "bt.json", BT_CONFIG);
    assert_eq!(
        exit_code(&run(&[
            "solve",
            "--config",
            bt.to_str().unwrap(),
            "--out",
            &out_str
        ])),
        0
    );
    let sph = write(
        tmp.path(),
        "sph.json",
        r#"{"task": "spherical",
            "spherical": {"center": [0.3333333333333333, 0.3333333333333333, 0.3333333333333334], "r0": 0.3},
            "alpha": 0.8}"#,
    );
    assert_eq!(
        exit_code(&run(&[
            "solve",
            "--config",
            sph.to_str().unwrap(),
            "--out",
            &out_str
        ])),
        0
    );
    let ba = write(
        tmp.path(),
        "ba.json",
        r#"{"task": "binary-action",
            "vdist": {"kind": "atoms", "atoms": [[-1, 0.5], [2, 0.5]]},
            "alpha": 0.8}"#,
    );
    assert_eq!(
        exit_code(&run(&[
            "solve",
            "--config",
            ba.to_str().unwrap(),
            "--out",
            &out_str
        ])),
        0
    );
    let tre = write(
        tmp.path(),
        "tre.json",
        r#"{"task": "verify-tre",
            "utility": {"kind": "quadratic-loss"},
            "tau": {"kind": "uniform"},
            "alpha": 0.75, "seed": 7}"#,
    );
    assert_eq!(
        exit_code(&run(&[
            "verify",
            "--config",
            tre.to_str().unwrap(),
            "--out",
            &out_str
        ])),
        0
    );

    let vb = write(
        tmp.path(),
        "vb.json",
        &format!(r#"{{"task": "verify-bundle", "bundle": {:?}}}"#, out_str),
    );
    let ok = run(&["verify", "--config", vb.to_str().unwrap()]);
    assert_eq!(exit_code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stdout));

    // Hand-corrupt the claimed upper endpoint by +0.05: the pushforward
    // check must fail loudly.
    let bt_artifact = out_dir.join("binary_trust.json");
    let mut value: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&bt_artifact).unwrap()).unwrap();
    let hi = value["interval"]["hi"].as_f64().unwrap();
    value["interval"]["hi"] = serde_json::json!(hi + 0.05);
    fs::write(&bt_artifact, serde_json::to_string_pretty(&value).unwrap()).unwrap();

    let bad = run(&["verify", "--config", vb.to_str().unwrap()]);
    assert_eq!(exit_code(&bad), 1);
    let stdout = String::from_utf8_lossy(&bad.stdout);
    let pushforward = stdout
        .lines()
        .find(|l| l.contains("pushforward"))
        .expect("pushforward check reported");
    assert!(pushforward.contains("FAIL"), "{pushforward}");
    let margin: f64 = pushforward
        .split_whitespace()
        .find_map(|w| w.parse().ok())
        .expect("margin parses");
    assert!(margin > 0.01, "deviation {margin} too small");
}

#[test]
fn oracle_runs_and_verifies() {
    let tmp = tempfile::tempdir().unwrap();
    let k = 9usize;
    let mut messages = Vec::new();
    for i in 0..k {
        let mu = i as f64 / (k - 1) as f64;
        messages.push(serde_json::json!({"posterior": [1.0 - mu, mu], "prob": 1.0 / k as f64}));
    }
    let mut payoff = Vec::new();
    for a in 0..k {
        let act = a as f64 / (k - 1) as f64;
        payoff.push(-(act * act));
        payoff.push(-(act - 1.0) * (act - 1.0));
    }
    let game = serde_json::json!({
        "schema_version": "1",
        "prior": [0.5, 0.5],
        "messages": messages,
        "n_actions": k,
        "payoff": payoff,
        "alpha": 0.75
    });
    let game_path = write(tmp.path(), "game.json", &game.to_string());
    let cfg = write(
        tmp.path(),
        "oracle.json",
        &format!(
            r#"{{"task": "oracle", "game_file": {:?}, "utility": {{"kind": "quadratic-loss"}}}}"#,
            game_path.to_str().unwrap()
        ),
    );
    let out_dir = tmp.path().join("out");
    let out = run(&[
        "oracle",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        exit_code(&out),
        0,
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let artifact: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("oracle.json")).unwrap()).unwrap();
    assert_eq!(artifact["structure"]["all_pass"], true);
    let vb = write(
        tmp.path(),
        "vb.json",
        &format!(
            r#"{{"task": "verify-bundle", "bundle": {:?}}}"#,
            out_dir.to_str().unwrap()
        ),
    );
    let verified = run(&["verify", "--config", vb.to_str().unwrap()]);
    assert_eq!(
        exit_code(&verified),
        0,
        "{}",
        String::from_utf8_lossy(&verified.stdout)
    );
}

#[test]
fn exit_codes_for_bad_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    // Empty bundle directory: validation error.
    let empty = tmp.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let vb = write(
        tmp.path(),
        "vb.json",
        &format!(
            r#"{{"task": "verify-bundle", "bundle": {:?}}}"#,
            empty.to_str().unwrap()
        ),
    );
    assert_eq!(
        exit_code(&run(&["verify", "--config", vb.to_str().unwrap()])),
        2
    );

    // Unknown task value.
    let bad_task = write(
        tmp.path(),
        "bad_task.json",
        r#"{"task": "solve-everything"}"#,
    );
    let out = run(&["solve", "--config", bad_task.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("task"));

    // Schema violation names the failing field path.
    let bad_field = write(
        tmp.path(),
        "bad_field.json",
        r#"{"task": "binary-trust", "utility": {"kind": "quadratic-loss"},
            "tau": {"kind": "uniform"}, "alpha": "half"}"#,
    );
    let out = run(&["solve", "--config", bad_field.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("alpha"),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    // Missing referenced file.
    let missing_game = write(
        tmp.path(),
        "missing_game.json",
        r#"{"task": "oracle", "game_file": "/nonexistent/game.json"}"#,
    );
    assert_eq!(
        exit_code(&run(&[
            "oracle",
            "--config",
            missing_game.to_str().unwrap()
        ])),
        2
    );

    // Task/subcommand mismatch.
    let bt = write(tmp.path(), "bt.json", BT_CONFIG);
    assert_eq!(
        exit_code(&run(&["sweep", "--config", bt.to_str().unwrap()])),
        2
    );

    // Genericity violation surfaces as a validation error.
    let degenerate = write(
        tmp.path(),
        "degenerate.json",
        r#"{"task": "binary-action",
            "vdist": {"kind": "atoms", "atoms": [[1, 0.5], [2, 0.5]]},
            "alpha": 0.8}"#,
    );
    let out = run(&["solve", "--config", degenerate.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("genericity"));
}

#[test]
fn log_env_var_controls_verbosity() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "bt.json", BT_CONFIG);
    let out_dir = tmp.path().join("out");
    let quiet = bin()
        .args([
            "solve",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!String::from_utf8_lossy(&quiet.stderr).contains("dispatching"));
    let chatty = bin()
        .env("TRUST_REGION_LOG", "info")
        .args([
            "solve",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        String::from_utf8_lossy(&chatty.stderr).contains("dispatching task binary-trust"),
        "{}",
        String::from_utf8_lossy(&chatty.stderr)
    );
}

#[test]
fn spherical_sweep_schema() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "sweep.json",
        r#"{"task": "sweep",
            "spherical": {"center": [0.3333333333333333, 0.3333333333333333, 0.3333333333333334], "r0": 0.3},
            "alphas": [0.5, 0.6, 0.7, 0.8, 0.9, 1.0]}"#,
    );
    let out_dir = tmp.path().join("out");
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        exit_code(&out),
        0,
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    assert!(csv.starts_with("alpha,r_star,residual\n"));
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows[0][1], 0.0);
    assert!((rows[5][1] - 0.3).abs() < 1e-9);
    for w in rows.windows(2) {
        assert!(w[1][1] >= w[0][1]);
    }
}
