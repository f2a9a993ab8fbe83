#![allow(dead_code)]

use std::path::{Path, PathBuf};

/// Runs the command line in-process; `args` excludes the program name.
pub fn ffdg(args: &[&str]) -> i32 {
    ffdg::cli::run(std::iter::once("ffdg").chain(args.iter().copied()))
}

pub fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

/// Three training types, one generalization type, ten short flights each.
pub fn small_data(root: &Path) -> PathBuf {
    let fleet = root.join("fleet.csv");
    let data = root.join("data");
    assert_eq!(ffdg(&["synth-fleet", "--types", "3", "--gen-types", "1", "--seed", "7", "--out", s(&fleet)]), 0);
    assert_eq!(
        ffdg(&["gen-data", "--fleet", s(&fleet), "--flights-per-type", "10", "--seed", "7", "--cruise-s", "600", "--out", s(&data)]),
        0
    );
    data
}

/// A quick random-sampler training run on `data`.
pub fn quick_train(data: &Path, out: &Path, extra: &[&str]) -> i32 {
    let mut args = vec![
        "train", "--data", s(data), "--out", s(out), "--sampler", "random", "--arch", "1-8-2",
        "--train-per-flight", "20", "--val-per-flight", "20", "--batch-size", "64",
    ];
    if !extra.contains(&"--epochs") {
        args.extend(["--epochs", "2"]);
    }
    args.extend_from_slice(extra);
    ffdg(&args)
}
