use bvc_cli::{run_experiment, ExperimentConfig};
use std::fs;
use std::path::Path;
use std::process::Command;

fn build_cfg(experiment: &str, out: &Path, pairs: &[(&str, &str)]) -> ExperimentConfig {
    let mut overrides: Vec<(String, String)> =
        vec![("out".to_string(), out.display().to_string())];
    overrides.extend(pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())));
    ExperimentConfig::load(experiment, None, &overrides).unwrap()
}

/// Every CSV under `dir`, sorted by name. SVGs are derived from the same rows,
/// so byte-comparing the CSVs is the determinism contract.
fn read_csvs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "csv") {
            out.push((
                path.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&path).unwrap(),
            ));
        }
    }
    out.sort();
    assert!(!out.is_empty(), "no CSV output in {}", dir.display());
    out
}

const SMALL: &[(&str, &str)] = &[
    ("m", "32"),
    ("trials", "8"),
    ("ladder", "geometric:1.0,0.85,8"),
];

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = tmp.path().join(name);
        let cfg = build_cfg("opnorm-biharmonic", &out, SMALL);
        run_experiment(&cfg).unwrap();
        read_csvs(&out.join("opnorm-biharmonic"))
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn worker_count_does_not_change_output() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: usize| {
        let out = tmp.path().join(name);
        let cfg = build_cfg("opnorm-biharmonic", &out, SMALL);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| run_experiment(&cfg)).unwrap();
        read_csvs(&out.join("opnorm-biharmonic"))
    };
    assert_eq!(run("one", 1), run("four", 4));
}

#[test]
fn schrodinger_without_potential_matches_free_flow_byte_for_byte() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |experiment: &str| {
        let out = tmp.path().join(experiment);
        let mut pairs = SMALL.to_vec();
        pairs.push(("family", "none"));
        let cfg = build_cfg(experiment, &out, &pairs);
        run_experiment(&cfg).unwrap();
        fs::read(out.join(experiment).join("trials.csv")).unwrap()
    };
    assert_eq!(run("opnorm-biharmonic"), run("opnorm-schrodinger"));
}

#[test]
fn binary_runs_and_reports_pass() {
    let tmp = tempfile::tempdir().unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_bvc"))
        .args(["variation-selftest", "--trials", "5", "--out"])
        .arg(tmp.path())
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(output.status.success(), "{:?}\n{stdout}", output.status);
    assert!(stdout.contains("[PASS] variation-selftest"), "{stdout}");
    assert!(tmp.path().join("variation-selftest/trials.csv").exists());
}

#[test]
fn binary_rejects_unknown_experiment() {
    let output = Command::new(env!("CARGO_BIN_EXE_bvc"))
        .arg("no-such-experiment")
        .output()
        .unwrap();
    assert!(!output.status.success());
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("unknown experiment"), "{err}");
}

#[test]
fn config_file_feeds_the_binary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = tmp.path().join("run.cfg");
    fs::write(
        &cfg_path,
        "# tiny run\nexperiment = variation-selftest\ntrials = 3\n",
    )
    .unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_bvc"))
        .args(["variation-selftest", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(tmp.path())
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(output.status.success(), "{:?}\n{stdout}", output.status);
    let rows = fs::read_to_string(tmp.path().join("variation-selftest/trials.csv")).unwrap();
    assert_eq!(rows.lines().count(), 4, "header plus three trials:\n{rows}");
}
