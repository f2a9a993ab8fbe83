mod common;

use std::collections::BTreeSet;
use std::path::Path;

use common::{ffdg, quick_train, s, small_data};
use ffdg::cli::{DATASET_FILE, MANIFEST_FILE, SPLIT_FILE};
use ffdg::dataset_csv;
use ffdg::manifest::RunManifest;
use ffdg::report::FILES;

#[test]
fn synth_fleet_counts_and_is_seed_stable() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert_eq!(ffdg(&["synth-fleet", "--types", "16", "--gen-types", "8", "--seed", "3", "--out", s(&a)]), 0);
    assert_eq!(ffdg(&["synth-fleet", "--types", "16", "--gen-types", "8", "--seed", "3", "--out", s(&b)]), 0);
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 1 + 24);
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());

    let fleet = ffdg::fleet_csv::read_fleet(&a).unwrap();
    let imputed = fleet.impute_missing(&Default::default()).unwrap();
    imputed.validate().unwrap();

    // pass-through validation of a user file
    let c = dir.path().join("c.csv");
    assert_eq!(ffdg(&["synth-fleet", "--from", s(&a), "--out", s(&c)]), 0);
    assert_eq!(std::fs::read_to_string(&c).unwrap(), text);
    let m = RunManifest::read(&dir.path().join("a.manifest.json")).unwrap();
    assert_eq!(m.command, "synth-fleet");
    assert_eq!(m.outputs.len(), 1);
}

#[test]
fn gen_data_labels_every_variant_of_every_flight() {
    let dir = tempfile::tempdir().unwrap();
    let fleet = dir.path().join("fleet.csv");
    let out = dir.path().join("data");
    assert_eq!(ffdg(&["synth-fleet", "--types", "3", "--gen-types", "0", "--seed", "1", "--out", s(&fleet)]), 0);
    let args = ["gen-data", "--fleet", s(&fleet), "--flights-per-type", "2", "--seed", "1", "--cruise-s", "300", "--out", s(&out)];
    assert_eq!(ffdg(&args), 0);
    let rows = dataset_csv::read_dataset(&out.join(DATASET_FILE)).unwrap();
    let variants: BTreeSet<(&str, u8)> = rows.iter().map(|r| (r.flight_id.as_str(), r.mass_variant)).collect();
    assert_eq!(variants.len(), 2 * 3 * 6);
    // two flights per type cannot be split 80/10/10
    assert!(!out.join(SPLIT_FILE).exists());
}

#[test]
fn gen_data_is_reproducible_and_split_is_disjoint() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_data(dir.path());
    let first = std::fs::read(data.join(DATASET_FILE)).unwrap();
    let again = dir.path().join("again");
    let fleet = dir.path().join("fleet.csv");
    let args = ["gen-data", "--fleet", s(&fleet), "--flights-per-type", "10", "--seed", "7", "--cruise-s", "600", "--out", s(&again)];
    assert_eq!(ffdg(&args), 0);
    assert_eq!(first, std::fs::read(again.join(DATASET_FILE)).unwrap());

    let split = dataset_csv::read_split(&data.join(SPLIT_FILE)).unwrap();
    split.check_leakage().unwrap();
    let m = RunManifest::read(&data.join(MANIFEST_FILE)).unwrap();
    assert_eq!(m.prng, ffdg_core::rng::PRNG_ID);
    assert_eq!(m.inputs.len(), 1);
    assert_eq!(m.outputs.len(), 5);
}

#[test]
fn train_and_eval_produce_their_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_data(dir.path());
    let ckpt = dir.path().join("m.ckpt");
    assert_eq!(quick_train(&data, &ckpt, &["--epochs", "1"]), 0);
    let loaded = ffdg::checkpoint::Checkpoint::load(&ckpt).unwrap();
    assert_eq!(loaded.history.epochs.len(), 1);
    assert!(dir.path().join("m.history.csv").exists());
    assert!(dir.path().join("m.manifest.json").exists());

    let report = dir.path().join("report");
    assert_eq!(ffdg(&["eval", "--ckpt", s(&ckpt), "--data", s(&data), "--out", s(&report)]), 0);
    for f in FILES {
        assert!(report.join(f).exists(), "{f}");
    }
    assert!(report.join(MANIFEST_FILE).exists());
    let scatter = std::fs::read_to_string(report.join("gen_vs_distance.csv")).unwrap();
    let d_min: Vec<f64> = scatter.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(d_min.len(), 1);
    assert!(d_min.iter().all(|&d| d >= 0.0));
}

#[test]
fn noise_changes_the_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_data(dir.path());
    let (a, b) = (dir.path().join("a.ckpt"), dir.path().join("b.ckpt"));
    assert_eq!(quick_train(&data, &a, &["--noise", "0"]), 0);
    assert_eq!(quick_train(&data, &b, &["--noise", "0.01"]), 0);
    let params = |p: &Path| ffdg::checkpoint::Checkpoint::load(p).unwrap().model.params;
    assert_ne!(params(&a), params(&b));
}

#[test]
fn exit_codes_follow_the_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_data(dir.path());
    let ckpt = dir.path().join("m.ckpt");

    assert_eq!(ffdg(&["no-such-command"]), 2);
    assert_eq!(quick_train(&data, &ckpt, &["--head", "X"]), 2);
    assert_eq!(quick_train(&data, &ckpt, &["--epochs", "0"]), 2);
    assert_eq!(quick_train(&dir.path().join("missing"), &ckpt, &[]), 3);

    assert_eq!(quick_train(&data, &ckpt, &[]), 0);
    let out = dir.path().join("r");
    let base = ["eval", "--ckpt", s(&ckpt), "--data", s(&data), "--out", s(&out)];
    assert_eq!(ffdg(&[&base[..], &["--rows", "train"]].concat()), 3);
    assert_eq!(ffdg(&[&base[..], &["--rows", "train", "--allow-train-eval"]].concat()), 0);

    // a diverging run surfaces as a numeric failure
    assert_eq!(quick_train(&data, &ckpt, &["--learning-rate", "1e300", "--loss", "mse", "--head", "C"]), 4);
}

#[test]
fn binary_prints_machine_readable_errors() {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_ffdg"))
        .args(["synth-fleet", "--from", "/nonexistent/fleet.csv", "--out", "/nonexistent/x.csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.lines().any(|l| l.starts_with("error: ")), "{stderr}");
}
