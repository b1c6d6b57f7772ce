mod common;

use std::path::Path;

use serde_json::Value;

use common::{bin, path_str, probekit, toy_csv};

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("MANIFEST.json")).unwrap()).unwrap()
}

fn stderr(o: &std::process::Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn data_rows(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().skip(1).map(str::to_string).collect()
}

fn write_idx(path: &Path, kind: u8, dims: &[u32], payload: &[u8]) {
    let mut bytes = vec![0, 0, 0x08, kind];
    for d in dims {
        bytes.extend_from_slice(&d.to_be_bytes());
    }
    bytes.extend_from_slice(payload);
    std::fs::write(path, bytes).unwrap();
}

/// `n` 2x2 images; class c lights pixel c.
fn idx_pair(dir: &Path, stem: &str, n: usize) -> (String, String) {
    let labels: Vec<u8> = (0..n).map(|i| (i % 3) as u8).collect();
    let mut pixels = Vec::new();
    for (i, &c) in labels.iter().enumerate() {
        let mut img = [(i % 7) as u8; 4];
        img[c as usize] = 250;
        pixels.extend_from_slice(&img);
    }
    let images = dir.join(format!("{stem}-images.idx"));
    let label_file = dir.join(format!("{stem}-labels.idx"));
    write_idx(&images, 0x03, &[n as u32, 2, 2], &pixels);
    write_idx(&label_file, 0x01, &[n as u32], &labels);
    (path_str(&images).to_string(), path_str(&label_file).to_string())
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = path_str(dir.path());
    for args in [
        vec!["probe1d", "--variant", "sideways", "--out", out],
        vec!["probe1d", "--model", "knn", "--out", out],
        vec!["parity", "--regime", "constant:127", "--min-dim", "6", "--max-dim", "8", "--out", out],
        vec!["parity", "--jobs", "0", "--out", out],
        vec!["bench", "--out", out],
        vec!["frobnicate"],
    ] {
        let o = probekit(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
    let o = probekit(&["parity", "--regime", "constant:127", "--min-dim", "6", "--out", out]);
    assert!(stderr(&o).contains("D >= 7"), "{}", stderr(&o));
}

#[test]
fn bad_config_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "sede = 3\n").unwrap();
    let o = probekit(&["probe1d", "--config", path_str(&cfg), "--out", path_str(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn probe1d_writes_named_figures_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = probekit(&["probe1d", "--model", "1nn", "--model", "distance-softmax", "--out", path_str(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    for name in [
        "two-point-1nn-plain.svg",
        "two-point-1nn-plain.csv",
        "two-point-distance-softmax-repeat-features.svg",
        "two-point-distance-softmax-repeat-samples.csv",
        "two-point-1nn-repeat-single-class.svg",
        "periodic-4-distance-softmax-periodic.svg",
        "two-point-1nn-ensembles.csv",
    ] {
        assert!(dir.path().join(name).is_file(), "missing {name}");
    }
    let m = manifest(dir.path());
    assert_eq!(m["command"], "probe1d");
    assert!(m["failures"].as_array().unwrap().is_empty());
    let files: Vec<&str> = m["files"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(files.contains(&"two-point-1nn-plain.svg"));

    // 1nn on the two-point scenario: a hard step at 0
    let rows = data_rows(&dir.path().join("two-point-1nn-plain.csv"));
    assert_eq!(rows.len(), 401 * 2);
    let at = |x: &str| rows.iter().find(|r| r.starts_with("1nn,") && r.split(',').nth(1) == Some(x)).unwrap().clone();
    assert!(at("-0.5").ends_with(",1.00000000,0.00000000"), "{}", at("-0.5"));
    assert!(at("0.5").ends_with(",0.00000000,1.00000000"));
}

#[test]
fn repeat_features_sweep_is_flat_for_1nn() {
    let dir = tempfile::tempdir().unwrap();
    let o = probekit(&["probe1d", "--model", "1nn", "--variant", "repeat-features", "--out", path_str(dir.path())]);
    assert!(o.status.success());
    let rows = data_rows(&dir.path().join("two-point-1nn-repeat-features.csv"));
    let mut by_setting: std::collections::BTreeMap<String, Vec<String>> = Default::default();
    for r in rows {
        let (setting, rest) = r.split_once(',').unwrap();
        by_setting.entry(setting.to_string()).or_default().push(rest.to_string());
    }
    assert_eq!(by_setting.len(), 4);
    let first = by_setting.values().next().unwrap();
    assert!(by_setting.values().all(|v| v == first));
}

#[test]
fn failing_model_keeps_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = probekit(&["probe1d", "--model", "1nn", "--model", "cmd:false", "--variant", "plain", "--out", path_str(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(dir.path().join("two-point-1nn-plain.svg").is_file());
    let m = manifest(dir.path());
    let failures = m["failures"].as_array().unwrap();
    assert!(!failures.is_empty());
    assert_eq!(failures[0]["model"], "cmd-false");
}

#[test]
fn env_var_sets_default_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = std::process::Command::new(bin())
        .args(["parity", "--model", "parity-oracle", "--max-dim", "4"])
        .env("PROBEKIT_OUT", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("parity-errors.csv").is_file());
}

#[test]
fn probe2d_reports_full_agreement_for_1nn() {
    let dir = tempfile::tempdir().unwrap();
    let o = probekit(&["probe2d", "--model", "1nn", "--resolution", "81", "--out", path_str(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&dir.path().join("probe2d-agreement.csv"));
    let plain: Vec<&String> = rows.iter().filter(|r| r.contains(",1nn,plain,")).collect();
    assert_eq!(plain.len(), 2);
    for r in plain {
        assert!(r.ends_with(",6561,100.0000"), "{r}");
    }
    let svg = std::fs::read_to_string(dir.path().join("random-10-1nn-plain.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(svg.contains("#ffd400"));
}

#[test]
fn parity_csv_rows_and_regime_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let o = probekit(&["parity", "--model", "1nn", "--model", "parity-oracle", "--max-dim", "5", "--out", path_str(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&dir.path().join("parity-errors.csv"));
    assert_eq!(rows.len(), 3 * 3 * 2);
    let half3 = rows.iter().find(|r| r.starts_with("3,half,1nn,")).unwrap();
    assert!(half3.starts_with("3,half,1nn,3,8,8,"), "{half3}");
    assert!(rows.contains(&"5,all,1nn,31,32,32,32,1.000000".to_string()));
    assert!(rows.contains(&"5,quarter,parity-oracle,7,32,32,0,0.000000".to_string()));
    for regime in ["all", "half", "quarter"] {
        assert!(dir.path().join(format!("parity-{regime}.svg")).is_file());
    }
}

#[test]
fn parity_max_folds_subsamples() {
    let dir = tempfile::tempdir().unwrap();
    let o = probekit(&[
        "parity", "--model", "1nn", "--min-dim", "6", "--max-dim", "6", "--regime", "constant:20", "--max-folds", "10",
        "--out", path_str(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&dir.path().join("parity-errors.csv"));
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("6,constant-20,1nn,20,10,64,"), "{}", rows[0]);
}

#[test]
fn bench_schemes_produce_expected_record_counts() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("toy.csv");
    std::fs::write(&csv, toy_csv(12)).unwrap();
    let csv = path_str(&csv);

    let group = dir.path().join("group");
    let o = probekit(&["bench", "--csv", csv, "--group-column", "batch", "--scheme", "group", "--model", "1nn", "--out", path_str(&group)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(data_rows(&group.join("bench-1nn-splits.csv")).len(), 3);
    let confusion = std::fs::read_to_string(group.join("bench-1nn-confusion.csv")).unwrap();
    assert!(confusion.starts_with("true\\predicted,cancer,biopsy,normal\n"));
    assert!(group.join("bench-1nn-group-b0-confusion.csv").is_file());

    let random = dir.path().join("random");
    let o = probekit(&["bench", "--csv", csv, "--group-column", "batch", "--model", "1nn", "--model", "logreg", "--out", path_str(&random)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(data_rows(&random.join("bench-logreg-splits.csv")).len(), 10);
    let md = std::fs::read_to_string(random.join("bench-summary.md")).unwrap();
    assert!(md.contains("| logreg | random-0.75x10 | 10 | 1.0000 ± 0.0000 |"), "{md}");
    assert_eq!(data_rows(&random.join("bench-summary.csv")).len(), 2);

    let o = probekit(&["bench", "--csv", csv, "--scheme", "group", "--out", path_str(&random)]);
    assert_eq!(o.status.code(), Some(2), "group scheme without a group column");
}

#[test]
fn bench_idx_subsample_with_fixed_test_set() {
    let dir = tempfile::tempdir().unwrap();
    let (ti, tl) = idx_pair(dir.path(), "train", 60);
    let (vi, vl) = idx_pair(dir.path(), "test", 21);
    let out = dir.path().join("out");
    let o = probekit(&[
        "bench", "--idx-train-images", &ti, "--idx-train-labels", &tl, "--idx-test-images", &vi, "--idx-test-labels", &vl,
        "--scheme", "subsample", "--sizes", "6,30", "--splits", "3", "--model", "1nn", "--out", path_str(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&out.join("bench-1nn-splits.csv"));
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.split(',').nth(1) == Some("21")), "{rows:?}");
    assert!(rows.iter().filter(|r| r.starts_with("subsample-30-")).all(|r| r.contains(",1.000000,1.000000,0.000000")));
}

#[test]
fn bench_capability_failure_is_recorded_and_others_continue() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("toy.csv");
    std::fs::write(&csv, toy_csv(6)).unwrap();
    let limited = format!("cmd:{} serve --model 1nn --max-features 1", bin());
    let out = dir.path().join("out");
    let o = probekit(&["bench", "--csv", path_str(&csv), "--group-column", "batch", "--splits", "2", "--model", &limited, "--model", "1nn", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("capability error"), "{}", stderr(&o));
    assert!(out.join("bench-1nn-splits.csv").is_file());
    let failures = manifest(&out)["failures"].as_array().unwrap().clone();
    assert_eq!(failures.len(), 1);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    let from_file = dir.path().join("from-file");
    std::fs::write(
        &cfg,
        format!("out = {:?}\nmodels = [\"parity-oracle\"]\n[parity]\nmax_dim = 4\n", path_str(&from_file)),
    )
    .unwrap();
    let o = probekit(&["parity", "--config", path_str(&cfg)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(data_rows(&from_file.join("parity-errors.csv")).len(), 2 * 3);

    let flagged = dir.path().join("flagged");
    let o = probekit(&["parity", "--config", path_str(&cfg), "--max-dim", "3", "--out", path_str(&flagged)]);
    assert!(o.status.success());
    assert_eq!(data_rows(&flagged.join("parity-errors.csv")).len(), 3);
}

#[test]
fn seed_changes_random_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str| {
        let out = dir.path().join(seed);
        let o = probekit(&["probe2d", "--model", "1nn", "--resolution", "21", "--seed", seed, "--out", path_str(&out)]);
        assert!(o.status.success());
        std::fs::read(out.join("random-10-1nn-plain.csv")).unwrap()
    };
    assert_ne!(run("1"), run("2"));
}
