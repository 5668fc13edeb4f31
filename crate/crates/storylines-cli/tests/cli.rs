//! End-to-end CLI behavior: exit codes, error wording, config precedence,
//! and reruns from an echoed config.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_storylines"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn stderr_line(output: &Output) -> String {
    let text = String::from_utf8_lossy(&output.stderr)
        .trim_end()
        .to_string();
    assert!(
        !text.contains('\n'),
        "expected a single stderr line, got:\n{text}"
    );
    text
}

/// Copy the fixture CSVs into `dir/data`.
fn stage_fixtures(dir: &Path) {
    let data = dir.join("data");
    fs::create_dir_all(&data).unwrap();
    for name in ["tiny_scenarios.csv", "tiny_theta.csv", "tiny_meta.json"] {
        fs::copy(
            Path::new(env!("CARGO_MANIFEST_DIR"))
                .join("tests/fixtures")
                .join(name),
            data.join(name),
        )
        .unwrap();
    }
}

fn walk_files(root: &Path) -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = fs::read_dir(root)
        .unwrap()
        .map(|e| e.unwrap().path().strip_prefix(root).unwrap().to_path_buf())
        .collect();
    out.sort();
    out
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(dir.path(), &["pipeline", "--bogus"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn missing_flag_value_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(dir.path(), &["pipeline", "--k"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn missing_input_file_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(
        dir.path(),
        &["pipeline", "--input", "missing.csv", "--k", "2"],
    );
    assert_eq!(output.status.code(), Some(3));
    let line = stderr_line(&output);
    assert!(line.starts_with("storylines: error:"), "{line}");
    assert!(line.contains("missing.csv"), "{line}");
}

#[test]
fn pipeline_without_k_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    stage_fixtures(dir.path());
    let output = run(
        dir.path(),
        &["pipeline", "--input", "data/tiny_scenarios.csv"],
    );
    assert_eq!(output.status.code(), Some(3));
    assert!(stderr_line(&output).contains('k'));
}

#[test]
fn bad_screening_rule_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    stage_fixtures(dir.path());
    let output = run(
        dir.path(),
        &[
            "screen",
            "--input",
            "data/tiny_scenarios.csv",
            "--rule",
            "biggest=3",
        ],
    );
    assert_eq!(output.status.code(), Some(3));
    assert!(stderr_line(&output).contains("biggest"));
}

#[test]
fn threshold_screening_across_units_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    stage_fixtures(dir.path());
    let output = run(
        dir.path(),
        &[
            "screen",
            "--input",
            "data/tiny_scenarios.csv",
            "--meta",
            "data/tiny_meta.json",
            "--rule",
            "threshold=2.0",
        ],
    );
    assert_eq!(output.status.code(), Some(3));
    assert!(stderr_line(&output).contains("unit"));
}

#[test]
fn discover_without_theta_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    stage_fixtures(dir.path());
    let output = run(
        dir.path(),
        &["discover", "--input", "data/tiny_scenarios.csv", "--k", "2"],
    );
    assert_eq!(output.status.code(), Some(3));
    assert!(stderr_line(&output).contains("theta"));
}

#[test]
fn invalid_synth_noise_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(dir.path(), &["synth", "--noise", "1.5", "--out", "data"]);
    assert_eq!(output.status.code(), Some(3));
    assert!(stderr_line(&output).contains("noise"));
}

#[test]
fn unknown_config_key_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cfg.json"), r#"{ "sead": 7 }"#).unwrap();
    let output = run(
        dir.path(),
        &["synth", "--config", "cfg.json", "--out", "data"],
    );
    assert_eq!(output.status.code(), Some(3));
    assert!(stderr_line(&output).contains("sead"));
}

#[test]
fn synth_is_reproducible_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    for (out, seed) in [("a", "7"), ("b", "7"), ("c", "8")] {
        let output = run(
            dir.path(),
            &["synth", "--n", "50", "--seed", seed, "--out", out],
        );
        assert!(output.status.success());
    }
    let read = |out: &str| fs::read(dir.path().join(out).join("scenarios.csv")).unwrap();
    assert_eq!(read("a"), read("b"), "same seed must reproduce the data");
    assert_ne!(read("a"), read("c"), "different seeds must differ");
}

#[test]
fn pipeline_announces_each_artifact_on_stdout() {
    let dir = tempfile::tempdir().unwrap();
    stage_fixtures(dir.path());
    let output = run(
        dir.path(),
        &[
            "pipeline",
            "--input",
            "data/tiny_scenarios.csv",
            "--k",
            "2",
            "--out",
            "run",
        ],
    );
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    for artifact in [
        "run/config.json",
        "run/assignment.csv",
        "run/tree.json",
        "run/tree.txt",
        "run/tree.dot",
        "run/reorder.json",
        "run/radar_node00.svg",
    ] {
        assert!(stdout.contains(&format!("wrote {artifact}")), "{stdout}");
    }
}

#[test]
fn rerun_from_the_echoed_config_reproduces_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    stage_fixtures(dir.path());
    let first = run(
        dir.path(),
        &[
            "pipeline",
            "--input",
            "data/tiny_scenarios.csv",
            "--meta",
            "data/tiny_meta.json",
            "--k",
            "2",
            "--out",
            "run",
        ],
    );
    assert!(first.status.success());
    let second = run(
        dir.path(),
        &["pipeline", "--config", "run/config.json", "--out", "rerun"],
    );
    assert!(second.status.success());

    let files = walk_files(&dir.path().join("run"));
    assert_eq!(files, walk_files(&dir.path().join("rerun")));
    for rel in &files {
        let a = fs::read(dir.path().join("run").join(rel)).unwrap();
        let b = fs::read(dir.path().join("rerun").join(rel)).unwrap();
        if rel == Path::new("config.json") {
            let mut a: serde_json::Value = serde_json::from_slice(&a).unwrap();
            let mut b: serde_json::Value = serde_json::from_slice(&b).unwrap();
            assert_eq!(a["out"], "run");
            assert_eq!(b["out"], "rerun");
            a["out"].take();
            b["out"].take();
            assert_eq!(a, b, "echoed configs differ beyond the output directory");
        } else {
            assert_eq!(a, b, "{} differs after a config rerun", rel.display());
        }
    }
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    stage_fixtures(dir.path());
    fs::write(
        dir.path().join("cfg.json"),
        r#"{ "input": "data/tiny_scenarios.csv", "k": 2, "seed": 5 }"#,
    )
    .unwrap();
    let output = run(
        dir.path(),
        &[
            "pipeline", "--config", "cfg.json", "--seed", "9", "--out", "run",
        ],
    );
    assert!(output.status.success());
    let echoed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("run/config.json")).unwrap())
            .unwrap();
    assert_eq!(echoed["seed"], 9, "flag seed must win over the file seed");
    assert_eq!(echoed["k"], 2, "file k must survive");
}

#[test]
fn elbow_writes_a_monotone_curve() {
    let dir = tempfile::tempdir().unwrap();
    stage_fixtures(dir.path());
    let output = run(
        dir.path(),
        &[
            "elbow",
            "--input",
            "data/tiny_scenarios.csv",
            "--k-min",
            "1",
            "--k-max",
            "6",
            "--out",
            "run",
        ],
    );
    assert!(output.status.success());
    let csv = fs::read_to_string(dir.path().join("run/elbow.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k,d_initial,d_reordered"));
    let d: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(d.len(), 6);
    for pair in d.windows(2) {
        assert!(pair[1] <= pair[0] + 1e-9, "curve rose: {d:?}");
    }
}

#[test]
fn single_cluster_pipeline_degenerates_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    stage_fixtures(dir.path());
    let output = run(
        dir.path(),
        &[
            "pipeline",
            "--input",
            "data/tiny_scenarios.csv",
            "--k",
            "1",
            "--out",
            "run",
        ],
    );
    assert!(output.status.success());
    let text = fs::read_to_string(dir.path().join("run/tree.txt")).unwrap();
    assert_eq!(text.lines().count(), 1, "a k=1 tree is a single storyline");
    assert!(text.starts_with("Storyline 0 (n=12"), "{text}");
    assert!(dir.path().join("run/radar_node00.svg").exists());
    assert!(!dir.path().join("run/radar_node01.svg").exists());
}

#[test]
fn discover_emits_a_scatter_only_for_two_driving_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let synth = run(
        dir.path(),
        &["synth", "--n", "300", "--p", "8", "--out", "data"],
    );
    assert!(synth.status.success());
    let output = run(
        dir.path(),
        &[
            "discover",
            "--input",
            "data/scenarios.csv",
            "--theta",
            "data/theta.csv",
            "--k",
            "3",
            "--out",
            "run",
        ],
    );
    assert!(output.status.success());
    assert!(dir.path().join("run/discovery.csv").exists());
    assert!(dir.path().join("run/discovery_tree.json").exists());
    assert!(
        dir.path().join("run/scatter.svg").exists(),
        "two driving inputs should produce a scatter plot"
    );

    // The fixture's labels hinge on a single input, so no scatter there.
    stage_fixtures(dir.path());
    let tiny = run(
        dir.path(),
        &[
            "discover",
            "--input",
            "data/tiny_scenarios.csv",
            "--theta",
            "data/tiny_theta.csv",
            "--k",
            "2",
            "--folds",
            "3",
            "--out",
            "tinyrun",
        ],
    );
    assert!(tiny.status.success());
    assert!(!dir.path().join("tinyrun/scatter.svg").exists());
}
