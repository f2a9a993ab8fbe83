use clap::Parser;
use ffdg::checkpoint::Checkpoint;
use ffdg::cli::{resolve_train_config, Cli, Command};
use ffdg::{config, Error};
use ffdg_core::nn::{HeadVariant, LossKind, ModelState};
use ffdg_core::sampling::SamplerKind;
use ffdg_core::train::{EpochRecord, TrainConfig, TrainHistory};

fn sample_checkpoint() -> Checkpoint {
    let mut train = TrainConfig::default();
    (train.n_blocks, train.width, train.head_width, train.head_variant) = (2, 8, 3, HeadVariant::Sigmoid);
    train.noise = 0.01;
    let mut model = ModelState::new(train.model_config(ffdg_core::dataset::INPUT_DIM), 11).unwrap();
    model.running_mean.iter_mut().enumerate().for_each(|(i, m)| *m = 0.1 * i as f64 + 1e-17);
    model.provenance.best_epoch = 2;
    model.provenance.best_val_metric = 1.0 / 3.0;
    model.provenance.checkpoint_metric = train.checkpoint_metric();
    model.provenance.training_types = vec!["AAA".into(), "BBB".into()];
    let rec = |epoch, gen| EpochRecord {
        epoch,
        train_loss: 10.0 / epoch as f64,
        val_metric: 0.1 * epoch as f64,
        val_mape: 3.5,
        val_mae: 12.25,
        val_me: -0.7,
        gen_mape: gen,
    };
    let history = TrainHistory { epochs: vec![rec(1, Some(9.0)), rec(2, None)], best_epoch: 2 };
    Checkpoint { tool_version: "0.1.0".into(), model, train, history }
}

#[test]
fn save_load_save_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = sample_checkpoint();
    let a = dir.path().join("a.ckpt");
    let b = dir.path().join("b.ckpt");
    ckpt.save(&a).unwrap();
    let loaded = Checkpoint::load(&a).unwrap();
    assert_eq!(loaded, ckpt);
    loaded.save(&b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn loaded_model_predicts_identically() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = sample_checkpoint();
    let path = dir.path().join("m.ckpt");
    ckpt.save(&path).unwrap();
    let loaded = Checkpoint::load(&path).unwrap();
    let batch = ffdg_core::nn::Batch {
        inputs: (0..3 * ffdg_core::dataset::INPUT_DIM).map(|i| (i % 7) as f64 * 13.0).collect(),
        input_dim: ffdg_core::dataset::INPUT_DIM,
        targets: vec![1.0; 3],
        ff_cap: vec![2.0; 3],
    };
    let p0: Vec<u64> = ckpt.model.predict(&batch).unwrap().iter().map(|v| v.to_bits()).collect();
    let p1: Vec<u64> = loaded.model.predict(&batch).unwrap().iter().map(|v| v.to_bits()).collect();
    assert_eq!(p0, p1);
}

#[test]
fn corrupt_checkpoints_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.ckpt");
    let text = sample_checkpoint().to_text();

    let truncated = &text[..text.len() / 2];
    assert!(Checkpoint::parse(&path, truncated).is_err());

    let trailing = format!("{text}extra\n");
    assert!(Checkpoint::parse(&path, &trailing).is_err());

    let wrong_prng = text.replace(ffdg_core::rng::PRNG_ID, "mt19937");
    let err = Checkpoint::parse(&path, &wrong_prng).unwrap_err();
    assert!(err.to_string().contains(":3:"), "{err}");

    let bad_param = text.replacen("[params", "[params_x", 1);
    assert!(matches!(Checkpoint::parse(&path, &bad_param).unwrap_err(), Error::Parse { .. }));
}

#[test]
fn config_text_round_trips() {
    let mut c = TrainConfig::default();
    c.loss.kind = LossKind::Mae;
    c.loss.beta = 0.0;
    c.sampler = SamplerKind::Random;
    c.learning_rate = 3e-4;
    c.resample_each_epoch = true;
    let path = std::path::Path::new("c.conf");
    let back = config::apply_text(TrainConfig::default(), path, &config::to_text(&c)).unwrap();
    assert_eq!(back, c);
}

#[test]
fn config_errors_name_the_line() {
    let path = std::path::Path::new("c.conf");
    let err = config::apply_text(TrainConfig::default(), path, "# comment\nepochs = 3\nwidht = 9\n").unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("c.conf:3"), "{err}");
    let err = config::apply_text(TrainConfig::default(), path, "head = Q\n").unwrap_err();
    assert!(err.to_string().contains("c.conf:1"), "{err}");
}

fn train_args(extra: &[&str]) -> ffdg::cli::TrainArgs {
    let mut argv = vec!["ffdg", "train", "--data", "d", "--out", "m.ckpt"];
    argv.extend_from_slice(extra);
    match Cli::try_parse_from(argv).unwrap().command {
        Command::Train(a) => a,
        other => panic!("parsed {other:?}"),
    }
}

#[test]
fn flags_override_file_which_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "epochs = 7\nnoise = 0.05\nsampler = random\nhead = C\n").unwrap();
    let conf_s = conf.to_str().unwrap();

    let c = resolve_train_config(&train_args(&["--config", conf_s, "--epochs", "3", "--head", "S"])).unwrap();
    assert_eq!(c.epochs, 3);
    assert_eq!(c.head_variant, HeadVariant::Sigmoid);
    assert_eq!(c.noise, 0.05);
    assert_eq!(c.sampler, SamplerKind::Random);
    assert_eq!(c.batch_size, TrainConfig::default().batch_size);

    let c = resolve_train_config(&train_args(&["--arch", "3-32-5", "--no-track-generalization"])).unwrap();
    assert_eq!((c.n_blocks, c.width, c.head_width), (3, 32, 5));
    assert!(!c.track_generalization);
}

#[test]
fn invalid_flag_values_are_usage_errors() {
    for extra in [&["--head", "X"][..], &["--arch", "3-32"], &["--sampler", "stratified"], &["--loss", "huber"]] {
        let mut argv = vec!["ffdg", "train", "--data", "d", "--out", "m.ckpt"];
        argv.extend_from_slice(extra);
        let err = Cli::try_parse_from(argv).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{extra:?}");
    }
    let err = resolve_train_config(&train_args(&["--epochs", "0"])).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}
