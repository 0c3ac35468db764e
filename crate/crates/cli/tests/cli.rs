use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mtbi_cli::{EXIT_DATA, EXIT_OK, EXIT_USAGE};

fn mtbi(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mtbi"))
        .args(args)
        .current_dir(cwd)
        .env_remove("MTBI_THREADS")
        .output()
        .unwrap()
}

fn error_record(out: &Output) -> serde_json::Value {
    let line = String::from_utf8_lossy(&out.stderr)
        .lines()
        .last()
        .unwrap_or_default()
        .to_string();
    serde_json::from_str(&line).unwrap_or_else(|e| panic!("{e}: {line}"))
}

fn small_phantom(dir: &Path, preset: &str, n: &str) {
    let out = mtbi(
        &[
            "phantom",
            "--preset",
            preset,
            "--n-per-class",
            n,
            "--seed",
            "2",
            "--out",
            "data",
        ],
        dir,
    );
    assert_eq!(
        out.status.code(),
        Some(EXIT_OK),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn phantom_then_validate_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    small_phantom(tmp.path(), "mean-difference", "3");
    let out = mtbi(&["validate", "--dataset", "data/manifest.csv"], tmp.path());
    assert_eq!(out.status.code(), Some(EXIT_OK));
    assert!(out.stderr.is_empty());
    assert!(tmp.path().join("data/ground_truth.json").exists());
    assert!(tmp.path().join("data/run_manifest.json").exists());
}

#[test]
fn validate_reports_missing_volume() {
    let tmp = tempfile::tempdir().unwrap();
    small_phantom(tmp.path(), "mean-difference", "2");
    fs::remove_file(tmp.path().join("data/s001/FA.vol")).unwrap();
    let out = mtbi(&["validate", "--dataset", "data/manifest.csv"], tmp.path());
    assert_eq!(out.status.code(), Some(EXIT_DATA));
    assert_eq!(error_record(&out)["kind"], "ValidationFailed");
    let issue: serde_json::Value = serde_json::from_slice(out.stdout.split(|&b| b == b'\n').next().unwrap()).unwrap();
    assert_eq!(issue["subject_id"], "s001");
}

#[test]
fn roi_features_have_41_columns() {
    let tmp = tempfile::tempdir().unwrap();
    small_phantom(tmp.path(), "mean-difference", "2");
    let out = mtbi(
        &[
            "features",
            "--dataset",
            "data/manifest.csv",
            "--approach",
            "roi-means",
            "--output",
            "run",
        ],
        tmp.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(EXIT_OK),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = fs::read_to_string(tmp.path().join("run/features/roi-means.csv")).unwrap();
    let header: Vec<&str> = table.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), 2 + 41);
    assert_eq!(table.lines().count(), 1 + 4);
}

#[test]
fn select_on_texture_phantom_prefers_visual_words() {
    let tmp = tempfile::tempdir().unwrap();
    small_phantom(tmp.path(), "texture", "20");
    fs::write(
        tmp.path().join("run.toml"),
        "dataset = \"data/manifest.csv\"\napproach = \"bow\"\noutput = \"run\"\nseed = 4\n",
    )
    .unwrap();
    let out = mtbi(&["select", "--config", "run.toml"], tmp.path());
    assert_eq!(
        out.status.code(),
        Some(EXIT_OK),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let trace = fs::read_to_string(tmp.path().join("run/selection/bow.csv")).unwrap();
    let first = trace.lines().nth(1).unwrap();
    assert!(first.contains(",bow-word/"), "{first}");
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(summary["accuracy"].as_f64().unwrap() >= 0.9);
    assert!(tmp.path().join("run/models/bow.svm").exists());
    assert!(tmp.path().join("run/dictionaries/final/FA_Thalamus.dict").exists());

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("run/run_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 4);
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn reruns_are_byte_identical_and_flags_override_config() {
    let tmp = tempfile::tempdir().unwrap();
    small_phantom(tmp.path(), "texture", "3");
    fs::write(
        tmp.path().join("run.toml"),
        "dataset = \"data/manifest.csv\"\napproach = \"roi-means\"\noutput = \"ignored\"\n",
    )
    .unwrap();
    for out_dir in ["a", "b"] {
        let out = mtbi(
            &["select", "--config", "run.toml", "--output", out_dir, "--threads", "2"],
            tmp.path(),
        );
        assert_eq!(
            out.status.code(),
            Some(EXIT_OK),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    assert!(!tmp.path().join("ignored").exists());
    for f in [
        "features/roi-means.csv",
        "selection/roi-means.csv",
        "selection/roi-means.json",
        "models/roi-means.svm",
    ] {
        assert_eq!(
            fs::read(tmp.path().join("a").join(f)).unwrap(),
            fs::read(tmp.path().join("b").join(f)).unwrap()
        );
    }
}

#[test]
fn histograms_cover_requested_subjects() {
    let tmp = tempfile::tempdir().unwrap();
    small_phantom(tmp.path(), "texture", "3");
    let out = mtbi(
        &[
            "histograms",
            "--dataset",
            "data/manifest.csv",
            "--output",
            "h",
            "--subjects",
            "s000,s005",
        ],
        tmp.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(EXIT_OK),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(tmp.path().join("h/histograms.csv")).unwrap();
    // 2 subjects × 10 channels × 20 words.
    assert_eq!(text.lines().count(), 1 + 2 * 10 * 20);
    assert!(text.starts_with("subject_id,label,metric,region,word,provenance,count,frequency"));

    let bad = mtbi(
        &[
            "histograms",
            "--dataset",
            "data/manifest.csv",
            "--output",
            "h",
            "--subjects",
            "nobody",
        ],
        tmp.path(),
    );
    assert_eq!(bad.status.code(), Some(EXIT_USAGE));
}

#[test]
fn usage_errors_exit_one_with_json_record() {
    let tmp = tempfile::tempdir().unwrap();
    let out = mtbi(&["select"], tmp.path());
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    assert_eq!(error_record(&out)["status"], "error");

    fs::write(tmp.path().join("bad.toml"), "approach = \"everything\"\n").unwrap();
    let out = mtbi(&["features", "--config", "bad.toml"], tmp.path());
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    assert_eq!(error_record(&out)["kind"], "Usage");

    let out = mtbi(&["phantom", "--out", "x"], tmp.path());
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
}

#[test]
fn data_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("m.csv"),
        "subject_id,label,age,sex,mask\na,patient,30,M,a.roi\n",
    )
    .unwrap();
    let out = mtbi(&["validate", "--dataset", "m.csv"], tmp.path());
    assert_eq!(out.status.code(), Some(EXIT_DATA));
    assert_eq!(error_record(&out)["kind"], "BadLabel");
}

#[test]
fn phantom_spec_file_out_of_bounds() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("spec.toml"), "n_per_class = 2\ndims = [16, 16, 2]\n").unwrap();
    let out = mtbi(&["phantom", "--spec", "spec.toml", "--out", "p"], tmp.path());
    assert_eq!(out.status.code(), Some(EXIT_DATA));
    assert_eq!(error_record(&out)["kind"], "SpecRegionOutOfBounds");
}
