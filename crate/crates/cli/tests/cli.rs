use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qsynth::circuit::import_json;
use qsynth::synth::{parse_target_json, preparation_fidelity};

fn qsynth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsynth"))
        .args(args)
        .env_remove("QSYNTH_THREADS")
        .env_remove("QSYNTH_OUTPUT_ROOT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMOKE: &str = "n_qubits = 2\n[train]\nepisodes = 30\ncheckpoint_every = 10\n";

/// Train the smoke config under `root`; returns the run directory.
fn train(dir: &Path, root: &str, config: &str) -> PathBuf {
    let cfg = dir.join("run.toml");
    fs::write(&cfg, config).unwrap();
    let root = dir.join(root);
    let o = qsynth(&["train", "--config", cfg.to_str().unwrap(), "--out-root", root.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let run = PathBuf::from(stdout(&o).lines().last().unwrap().trim());
    assert!(run.starts_with(&root));
    run
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn train_writes_a_complete_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    let run = train(dir.path(), "runs", SMOKE);
    for f in ["config.toml", "seed", "metrics.csv", "agent.json"] {
        assert!(run.join(f).is_file(), "{f}");
    }
    assert_eq!(fs::read_to_string(run.join("seed")).unwrap().trim(), "0");
    let ckpts = fs::read_dir(run.join("checkpoints")).unwrap().count();
    assert_eq!(ckpts, 2);
    let rows = csv_rows(&run.join("metrics.csv"));
    assert_eq!(rows[0][0], "episode");
    assert_eq!(rows.len(), 31);

    // The snapshot alone reproduces the run.
    let again = train(dir.path(), "rerun", &fs::read_to_string(run.join("config.toml")).unwrap());
    assert_eq!(fs::read(run.join("metrics.csv")).unwrap(), fs::read(again.join("metrics.csv")).unwrap());
}

#[test]
fn config_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[train]\nepisodes = 3\n").unwrap();
    let o = qsynth(&["train", "--config", cfg.to_str().unwrap(), "--out-root", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("n_qubits"), "{}", stderr(&o));

    fs::write(&cfg, "n_qubits = 2\n[agent]\nlearning_rate = 0.1\n").unwrap();
    let o = qsynth(&["train", "--config", cfg.to_str().unwrap(), "--out-root", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("learning_rate"), "{}", stderr(&o));
}

#[test]
fn eval_sweeps_budgets_and_handles_bad_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let run = train(dir.path(), "runs", SMOKE);
    let ckpt = run.join("agent.json");
    let out = dir.path().join("summary.csv");
    let per = dir.path().join("per.csv");
    let hist = dir.path().join("hist.csv");
    let o = qsynth(&[
        "eval", "--checkpoint", ckpt.to_str().unwrap(), "--n-states", "4", "--structure", "zero",
        "--budget", "0", "--budget", "1", "--budget", "2",
        "--out", out.to_str().unwrap(), "--per-target", per.to_str().unwrap(), "--histogram", hist.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 4);
    for (row, budget) in rows[1..].iter().zip(["0", "1", "2"]) {
        assert_eq!(row[0], "agent");
        assert_eq!(row[1], budget);
        assert!((row[4].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    }
    assert_eq!(csv_rows(&per).len(), 13);
    assert_eq!(csv_rows(&hist)[0], ["budget", "cnots", "count"]);

    let bad = dir.path().join("bad.json");
    fs::write(&bad, b"{\"format\": \"something-else\"}").unwrap();
    let o = qsynth(&["eval", "--checkpoint", bad.to_str().unwrap(), "--n-states", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("checkpoint"), "{}", stderr(&o));

    let mut file: serde_json::Value = serde_json::from_slice(&fs::read(&ckpt).unwrap()).unwrap();
    file["version"] = serde_json::json!(99);
    fs::write(&bad, serde_json::to_vec(&file).unwrap()).unwrap();
    let o = qsynth(&["eval", "--checkpoint", bad.to_str().unwrap(), "--n-states", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("version"), "{}", stderr(&o));
}

#[test]
fn prepare_round_trips_and_rejects_unnormalized_targets() {
    let dir = tempfile::tempdir().unwrap();
    let run = train(dir.path(), "runs", SMOKE);
    let ckpt = run.join("agent.json");
    let target = dir.path().join("t.json");
    fs::write(&target, "[[0.6, 0], [0, 0.48], [0, 0], [0.64, 0]]").unwrap();
    let prefix = dir.path().join("prep");
    let o = qsynth(&[
        "prepare", "--checkpoint", ckpt.to_str().unwrap(), "--target", target.to_str().unwrap(),
        "--out", prefix.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let printed: f64 = stdout(&o)
        .lines()
        .find_map(|l| l.strip_prefix("fidelity "))
        .unwrap()
        .parse()
        .unwrap();
    let (c, p) = import_json(&fs::read(prefix.with_extension("json")).unwrap()).unwrap();
    let psi = parse_target_json(&fs::read(&target).unwrap()).unwrap();
    let f = preparation_fidelity(&c, &p, &psi).unwrap();
    assert!((f - printed).abs() < 1e-9, "{f} vs {printed}");
    assert!(prefix.with_extension("txt").is_file());

    fs::write(&target, "[0.5, 0.5, 0.5, 0.6]").unwrap();
    let o = qsynth(&[
        "prepare", "--checkpoint", ckpt.to_str().unwrap(), "--target", target.to_str().unwrap(),
        "--out", prefix.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("normalized"), "{}", stderr(&o));
}

#[test]
fn compare_labels_rows_and_single_state_intervals_collapse() {
    let dir = tempfile::tempdir().unwrap();
    let run = train(dir.path(), "runs", SMOKE);
    let out = dir.path().join("cmp.csv");
    let o = qsynth(&[
        "compare", "--checkpoint", run.join("agent.json").to_str().unwrap(), "--layers", "1", "--layers", "2",
        "--n-states", "1", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&out);
    let labels: Vec<&str> = rows[1..].iter().map(|r| r[0].as_str()).collect();
    assert_eq!(labels, ["agent", "layered", "agent", "layered"]);
    for r in &rows[1..] {
        assert_eq!(r[4], r[5]);
        assert_eq!(r[5], r[6]);
    }
}

#[test]
fn oracle_rows_and_refusals() {
    let dir = tempfile::tempdir().unwrap();
    let o = qsynth(&["oracle", "--state", "ghz", "--qubits", "3", "--k", "2", "--graph", "line", "--table"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let last = stdout(&o).lines().last().unwrap().to_string();
    assert!(last.starts_with("2, 1.000, "), "{last}");

    let product = dir.path().join("p.json");
    let h = std::f64::consts::FRAC_1_SQRT_2;
    fs::write(&product, format!("[{h}, {h}, 0, 0]")).unwrap();
    let o = qsynth(&["oracle", "--target", product.to_str().unwrap(), "--k", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "0, 1.000,");

    let o = qsynth(&["oracle", "--state", "w", "--qubits", "4", "--k", "6"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("k <= 5"), "{}", stderr(&o));
    let o = qsynth(&["oracle", "--state", "w", "--qubits", "5", "--k", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(qsynth(&["eval"]).status.code(), Some(1));
    assert_eq!(qsynth(&["nonsense"]).status.code(), Some(1));
    assert_eq!(qsynth(&["--help"]).status.code(), Some(0));
    let o = qsynth(&["eval", "--checkpoint", "/nonexistent/agent.json"]);
    assert_eq!(o.status.code(), Some(1));
}
