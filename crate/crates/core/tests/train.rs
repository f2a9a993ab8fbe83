mod common;

use ffdg_core::dataset::{split_flights, DatasetSplit, Subset};
use ffdg_core::fleet::{Fleet, FleetEntry, Membership};
use ffdg_core::nn::HeadVariant;
use ffdg_core::sampling::{SamplerKind, SamplingBudget};
use ffdg_core::train::*;
use ffdg_core::Error;

fn affine_setup() -> (Vec<ffdg_core::dataset::ObservationRow>, DatasetSplit, Fleet) {
    let rows = common::affine_rows("LIN", 20, 60, 1);
    let flights: Vec<(String, String)> = (0..20).map(|f| (format!("LIN-{f:03}"), "LIN".to_string())).collect();
    let split = split_flights(&flights, 42).unwrap();
    let fleet = Fleet::new(vec![FleetEntry { spec: common::narrowbody("LIN"), membership: Membership::Training }]).unwrap();
    (rows, split, fleet)
}

fn small_config(epochs: usize) -> TrainConfig {
    TrainConfig {
        epochs,
        sampler: SamplerKind::Random,
        budget: SamplingBudget::new(50, 50).unwrap(),
        n_blocks: 2,
        width: 8,
        head_width: 2,
        head_variant: HeadVariant::Relu,
        batch_size: 64,
        ..TrainConfig::default()
    }
}

#[test]
fn single_epoch_is_its_own_best() {
    let (rows, split, fleet) = affine_setup();
    let config = small_config(1);
    let data = TrainingData::build(&rows, &split, &fleet, &config).unwrap();
    let (model, history) = train_model(&data, &config).unwrap();
    assert_eq!(history.epochs.len(), 1);
    assert_eq!(history.best_epoch, 1);
    assert_eq!(model.provenance.best_epoch, 1);
    assert_eq!(model.provenance.training_types, vec!["LIN".to_string()]);
}

#[test]
fn realizable_affine_target_is_learned() {
    let (rows, split, fleet) = affine_setup();
    let config = small_config(200);
    let data = TrainingData::build(&rows, &split, &fleet, &config).unwrap();
    let (_, history) = train_model(&data, &config).unwrap();
    assert_eq!(history.epochs.len(), 200);
    let best = &history.epochs[history.best_epoch - 1];
    assert!(best.val_mape < 1.0, "validation MAPE {}", best.val_mape);
    assert!(history.best_val_metric() <= history.epochs.last().unwrap().val_metric);
    let min = history.epochs.iter().map(|e| e.val_metric).fold(f64::INFINITY, f64::min);
    assert_eq!(history.best_val_metric(), min);
}

#[test]
fn longer_runs_never_worsen_the_checkpoint() {
    let (rows, split, fleet) = affine_setup();
    let mut last = f64::INFINITY;
    for epochs in [1, 3, 6] {
        let config = small_config(epochs);
        let data = TrainingData::build(&rows, &split, &fleet, &config).unwrap();
        let (model, history) = train_model(&data, &config).unwrap();
        assert!(model.provenance.best_val_metric <= last);
        assert_eq!(model.provenance.best_val_metric, history.best_val_metric());
        last = model.provenance.best_val_metric;
    }
}

#[test]
fn identical_configs_give_identical_runs() {
    let (rows, split, fleet) = affine_setup();
    let mut config = small_config(4);
    config.noise = 0.01;
    let run = || {
        let data = TrainingData::build(&rows, &split, &fleet, &config).unwrap();
        train_model(&data, &config).unwrap()
    };
    let (m1, h1) = run();
    let (m2, h2) = run();
    assert_eq!(h1, h2);
    assert_eq!(m1, m2);
}

#[test]
fn noise_changes_the_model() {
    let (rows, split, fleet) = affine_setup();
    let base = small_config(2);
    let noisy = TrainConfig { noise: 0.01, ..base.clone() };
    let train = |c: &TrainConfig| {
        let data = TrainingData::build(&rows, &split, &fleet, c).unwrap();
        train_model(&data, c).unwrap().0
    };
    assert_ne!(train(&base).params, train(&noisy).params);
}

#[test]
fn overlapping_split_is_refused() {
    let (rows, split, fleet) = affine_setup();
    let mut assignments = split.assignments().to_vec();
    let val = assignments.iter().find(|a| a.2 == Subset::Validation).unwrap().0.clone();
    assignments.push((val.clone(), "LIN".into(), Subset::Train));
    let leaky = DatasetSplit::from_assignments(assignments);
    let err = TrainingData::build(&rows, &leaky, &fleet, &small_config(1)).unwrap_err();
    assert_eq!(err, Error::FlightLeakage { flight_id: val });
}

#[test]
fn invalid_configs_are_rejected() {
    for bad in [
        TrainConfig { epochs: 0, ..small_config(1) },
        TrainConfig { noise: -0.1, ..small_config(1) },
        TrainConfig { n_blocks: 0, ..small_config(1) },
    ] {
        assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
    }
}

#[test]
fn derived_seeds_are_stable_and_distinct() {
    assert_eq!(derive_seeds(42, "epoch-shuffle", 1), derive_seeds(42, "epoch-shuffle", 1));
    assert_ne!(derive_seeds(42, "epoch-shuffle", 1), derive_seeds(42, "feature-noise", 1));
}
