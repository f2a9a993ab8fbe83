use ffdg_core::nn::*;
use ffdg_core::rng::Rng;
use proptest::prelude::*;

const KINDS: [LossKind; 5] = [LossKind::Mse, LossKind::Me, LossKind::Mae, LossKind::Mape, LossKind::BetaMape];
const HEADS: [HeadVariant; 3] = [HeadVariant::Clamp, HeadVariant::Relu, HeadVariant::Sigmoid];

fn toy_batch(rows: usize, dim: usize, seed: u64) -> Batch {
    let mut rng = Rng::new(seed);
    let inputs = (0..rows * dim).map(|_| rng.uniform(-2.0, 2.0) * (1.0 + 10.0 * (rng.next_f64() < 0.2) as u8 as f64)).collect();
    let targets = (0..rows).map(|_| rng.uniform(0.2, 1.5)).collect();
    let ff_cap = (0..rows).map(|_| rng.uniform(1.8, 2.5)).collect();
    Batch { input_dim: dim, inputs, targets, ff_cap }
}

/// Objective evaluated from scratch for a parameter vector (training-mode
/// batch statistics, running statistics untouched).
fn objective_at(model: &ModelState, params: &[f64], batch: &Batch, spec: LossSpec) -> f64 {
    let mut m = model.clone();
    m.params.copy_from_slice(params);
    let cache = m.forward_cached(batch, Mode::Train).unwrap();
    m.objective(&cache, batch, spec).unwrap()
}

/// Central differences with step 1e-4; returns the maximum relative error.
fn max_fd_relative_error(model: &ModelState, batch: &Batch, spec: LossSpec) -> (f64, usize) {
    let cache = model.forward_cached(batch, Mode::Train).unwrap();
    let analytic = model.backward(&cache, batch, spec).unwrap();
    let h = 1e-4;
    let mut worst = (0.0, 0);
    let mut p = model.params.clone();
    for i in 0..p.len() {
        let orig = p[i];
        p[i] = orig + h;
        let up = objective_at(model, &p, batch, spec);
        p[i] = orig - h;
        let down = objective_at(model, &p, batch, spec);
        p[i] = orig;
        let numeric = (up - down) / (2.0 * h);
        let denom = analytic[i].abs().max(numeric.abs()).max(1e-6);
        let rel = (analytic[i] - numeric).abs() / denom;
        if rel > worst.0 {
            worst = (rel, i);
        }
    }
    worst
}

/// A 3-8-2 model whose head pre-activations sit inside the differentiable
/// region for the given variant.
fn toy_model(head: HeadVariant, seed: u64) -> ModelState {
    let mut config = ModelConfig::new(3, 8, 2, head, 4);
    config.l2_coeff = 1e-3;
    ModelState::new(config, seed).unwrap()
}

#[test]
fn analytic_gradients_match_finite_differences_for_every_head_and_loss() {
    for head in HEADS {
        for kind in KINDS {
            let model = toy_model(head, 5);
            let batch = toy_batch(16, 4, 9);
            let (err, at) = max_fd_relative_error(&model, &batch, LossSpec::new(kind, 20.0));
            assert!(err < 1e-4, "{head:?} {kind:?}: rel err {err:e} at param {at}");
        }
    }
}

#[test]
fn zero_l2_and_perfect_mse_fit_gives_zero_gradient() {
    let mut config = ModelConfig::new(3, 8, 2, HeadVariant::Sigmoid, 4);
    config.l2_coeff = 0.0;
    let model = ModelState::new(config, 1).unwrap();
    let mut batch = toy_batch(12, 4, 2);
    batch.targets = model.forward_cached(&batch, Mode::Train).unwrap().predictions;
    let cache = model.forward_cached(&batch, Mode::Train).unwrap();
    let grads = model.backward(&cache, &batch, LossSpec::new(LossKind::Mse, 0.0)).unwrap();
    assert!(grads.iter().all(|&g| g == 0.0));
}

#[test]
fn dead_relu_head_passes_no_gradient() {
    let mut model = toy_model(HeadVariant::Relu, 3);
    let &(w, b, _, _) = model.layout.layers.last().unwrap();
    model.params[w..b].fill(0.0);
    model.params[b] = -1.0;
    let batch = toy_batch(8, 4, 4);
    let cache = model.forward_cached(&batch, Mode::Train).unwrap();
    assert!(cache.predictions.iter().all(|&p| p == 0.0));
    let mut grads = model.backward(&cache, &batch, LossSpec::beta_mape(20.0)).unwrap();
    // only the L2 term survives
    for (i, g) in grads.iter_mut().enumerate() {
        if model.layout.is_weight(i) {
            *g -= 2.0 * model.config.l2_coeff * model.params[i];
        }
    }
    assert!(grads.iter().all(|g| g.abs() < 1e-15));
}

#[test]
fn head_examples() {
    assert_eq!(HeadVariant::Sigmoid.apply(0.0, 3.0).0, 1.5);
    assert_eq!(HeadVariant::Clamp.apply(2.0 * 3.0, 3.0).0, 3.0);
    assert_eq!(HeadVariant::Relu.apply(7.0, 3.0).0, 3.0);
    assert_eq!(HeadVariant::Relu.apply(-7.0, 3.0).0, 0.0);
    assert_eq!(HeadVariant::Relu.apply(0.5, 3.0).0, 1.5);
}

#[test]
fn l2_term_is_additive() {
    let mut model = toy_model(HeadVariant::Clamp, 8);
    let batch = toy_batch(10, 4, 1);
    let spec = LossSpec::beta_mape(20.0);
    model.config.l2_coeff = 0.0;
    let cache = model.forward_cached(&batch, Mode::Train).unwrap();
    let base = model.objective(&cache, &batch, spec).unwrap();
    model.config.l2_coeff = 0.37;
    let with = model.objective(&cache, &batch, spec).unwrap();
    assert_eq!(with, base + 0.37 * model.weight_norm_sq());
}

#[test]
fn inference_is_pure_and_training_updates_running_stats() {
    let mut model = toy_model(HeadVariant::Relu, 2);
    let batch = toy_batch(32, 4, 6);
    let a = model.predict(&batch).unwrap();
    let b = model.predict(&batch).unwrap();
    assert_eq!(a, b);
    let before = model.running_mean.clone();
    model.forward(&batch, Mode::Train).unwrap();
    assert_ne!(model.running_mean, before);
    assert!(model.running_var.iter().all(|&v| v >= 0.0));
    let after = model.running_mean.clone();
    model.forward(&batch, Mode::Infer).unwrap();
    assert_eq!(model.running_mean, after);
}

#[test]
fn wrong_input_dim_is_rejected() {
    let model = toy_model(HeadVariant::Relu, 2);
    let batch = toy_batch(4, 5, 6);
    assert!(matches!(model.predict(&batch), Err(ffdg_core::Error::DimensionMismatch { .. })));
}

#[test]
fn non_finite_input_reports_layer() {
    let model = toy_model(HeadVariant::Relu, 2);
    let mut batch = toy_batch(4, 4, 6);
    batch.inputs[3] = f64::INFINITY;
    assert!(matches!(model.predict(&batch), Err(ffdg_core::Error::NonFiniteActivation { .. })));
}

#[test]
fn beta_zero_equals_mae_exactly() {
    let mut rng = Rng::new(3);
    for _ in 0..100 {
        let y: Vec<f64> = (0..20).map(|_| rng.uniform(0.1, 5.0)).collect();
        let p: Vec<f64> = (0..20).map(|_| rng.uniform(0.0, 6.0)).collect();
        let mae = loss(&p, &y, LossSpec::new(LossKind::Mae, 0.0)).unwrap();
        assert_eq!(loss(&p, &y, LossSpec::beta_mape(0.0)).unwrap(), mae);
    }
}

#[test]
fn noise_is_confined_to_designated_columns_and_zero_noise_is_identity() {
    let batch = toy_batch(50, 6, 1);
    let mut same = batch.clone();
    apply_feature_noise(&mut same, 2..5, 0.0, &mut Rng::new(1));
    assert_eq!(same, batch);
    let mut noisy = batch.clone();
    apply_feature_noise(&mut noisy, 2..5, 0.1, &mut Rng::new(1));
    for (r, (a, b)) in noisy.inputs.chunks(6).zip(batch.inputs.chunks(6)).enumerate() {
        assert_eq!(a[..2], b[..2], "row {r}");
        assert_eq!(a[5], b[5]);
        assert!(a[2..5] != b[2..5]);
    }
    assert_eq!(noisy.targets, batch.targets);
    assert_eq!(noisy.ff_cap, batch.ff_cap);
}

#[test]
fn noise_factor_statistics() {
    let n = 1_000_000;
    let batch = Batch { input_dim: 1, inputs: vec![1.0; n], targets: vec![1.0; n], ff_cap: vec![1.0; n] };
    let mut rng = Rng::new(99);
    let mut b1 = batch.clone();
    apply_feature_noise(&mut b1, 0..1, 1.0, &mut rng);
    let mean = b1.inputs.iter().sum::<f64>() / n as f64;
    assert!((mean - 1.0).abs() < 3.0 * NOISE_SIGMA / (n as f64).sqrt(), "{mean}");

    let mut b2 = batch;
    apply_feature_noise(&mut b2, 0..1, 0.01, &mut rng);
    let dev: Vec<f64> = b2.inputs.iter().map(|x| x - 1.0).collect();
    let m = dev.iter().sum::<f64>() / n as f64;
    let sd = (dev.iter().map(|d| (d - m).powi(2)).sum::<f64>() / n as f64).sqrt();
    assert!((sd / 0.0033 - 1.0).abs() < 0.02, "{sd}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn heads_stay_within_bounds(z in -1e6f64..1e6, cap in 1e-3f64..100.0) {
        for head in [HeadVariant::Clamp, HeadVariant::Relu] {
            let (y, _) = head.apply(z, cap);
            prop_assert!((0.0..=cap).contains(&y));
        }
        let (y, _) = HeadVariant::Sigmoid.apply(z, cap);
        prop_assert!(y > 0.0 && y < cap);
    }
}
