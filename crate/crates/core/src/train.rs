//! The experiment loop: pool construction, per-epoch optimization with
//! optional feature noise, and validation-based checkpoint selection.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::dataset::{DatasetSplit, ObservationRow, Subset, INPUT_DIM, SPEC_COLUMNS};
use crate::error::{Error, Result};
use crate::fleet::{Fleet, Membership};
use crate::nn::{apply_feature_noise, Adam, Batch, HeadVariant, LossKind, LossSpec, ModelConfig, ModelState};
use crate::rng::{derive_seed, Rng};
use crate::sampling::{random_sample, InverseDensityWeights, SamplerKind, SamplingBudget};

pub use crate::rng::derive_seed as derive_seeds;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub loss: LossSpec,
    /// Relative feature-noise level `p`.
    pub noise: f64,
    pub sampler: SamplerKind,
    pub budget: SamplingBudget,
    pub seed: u64,
    pub n_blocks: usize,
    pub width: usize,
    pub head_width: usize,
    pub head_variant: HeadVariant,
    pub l2_coeff: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Redraw the training pool at the start of every epoch.
    pub resample_each_epoch: bool,
    /// Evaluate the generalization rows after every epoch (recorded only).
    pub track_generalization: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 1000,
            loss: LossSpec::beta_mape(20.0),
            noise: 0.0,
            sampler: SamplerKind::Uniform,
            budget: SamplingBudget::default(),
            seed: 42,
            n_blocks: 7,
            width: 250,
            head_width: 4,
            head_variant: HeadVariant::Relu,
            l2_coeff: 1e-4,
            learning_rate: 1e-3,
            batch_size: 4096,
            resample_each_epoch: false,
            track_generalization: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if !(self.loss.beta >= 0.0) {
            return bad("beta must be non-negative");
        }
        if !(self.noise >= 0.0) {
            return bad("noise must be non-negative");
        }
        if self.batch_size == 0 || !(self.learning_rate > 0.0) {
            return bad("batch_size and learning_rate must be positive");
        }
        SamplingBudget::new(self.budget.train_per_flight, self.budget.val_per_flight)?;
        self.model_config(INPUT_DIM).validate()
    }

    pub fn model_config(&self, input_dim: usize) -> ModelConfig {
        ModelConfig {
            n_blocks: self.n_blocks,
            width: self.width,
            head_width: self.head_width,
            head_variant: self.head_variant,
            l2_coeff: self.l2_coeff,
            input_dim,
        }
    }

    /// Name of the checkpoint selection metric.
    pub fn checkpoint_metric(&self) -> String {
        match self.loss.kind {
            LossKind::BetaMape => format!("val_beta_mape(beta={})", self.loss.beta),
            kind => format!("val_{}", kind.name()),
        }
    }
}

/// One row of [`TrainHistory`].
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    /// Checkpoint metric (the training loss evaluated on validation).
    pub val_metric: f64,
    pub val_mape: f64,
    /// kg/h
    pub val_mae: f64,
    /// kg/h
    pub val_me: f64,
    pub gen_mape: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    /// 1-based epoch of the retained snapshot.
    pub best_epoch: usize,
}

impl TrainHistory {
    pub fn best_val_metric(&self) -> f64 {
        self.epochs[self.best_epoch - 1].val_metric
    }
}

/// Rows plus the index pools drawn from them.
#[derive(Debug, Clone)]
pub struct TrainingData<'a> {
    pub rows: &'a [ObservationRow],
    pub train_pool: Vec<usize>,
    pub val_pool: Vec<usize>,
    /// Test rows of generalization types, for the optional trace.
    pub generalization: Vec<usize>,
    /// Training-subset rows of training types (redraw source).
    pub train_subset: Vec<usize>,
    train_weights: Option<InverseDensityWeights>,
    sampler: SamplerKind,
    budget: SamplingBudget,
}

impl<'a> TrainingData<'a> {
    /// Selects rows by split and fleet membership, checks for leakage and
    /// draws the training and validation pools with the configured sampler.
    pub fn build(rows: &'a [ObservationRow], split: &DatasetSplit, fleet: &Fleet, config: &TrainConfig) -> Result<Self> {
        let subsets = SubsetRows::select(rows, split, fleet)?;
        Self::from_subsets(rows, subsets, config)
    }

    pub fn from_subsets(rows: &'a [ObservationRow], subsets: SubsetRows, config: &TrainConfig) -> Result<Self> {
        let weights = match config.sampler {
            SamplerKind::Uniform => Some(InverseDensityWeights::fit(rows, &subsets.train)?),
            SamplerKind::Random => None,
        };
        let val_weights = match config.sampler {
            SamplerKind::Uniform => Some(InverseDensityWeights::fit(rows, &subsets.validation)?),
            SamplerKind::Random => None,
        };
        Self::with_weights(rows, subsets, config, weights, val_weights.as_ref())
    }

    /// Like [`TrainingData::from_subsets`] with inverse-density weights fitted
    /// beforehand (they depend on the rows only, not on the seed).
    pub fn with_weights(
        rows: &'a [ObservationRow],
        subsets: SubsetRows,
        config: &TrainConfig,
        train_weights: Option<InverseDensityWeights>,
        val_weights: Option<&InverseDensityWeights>,
    ) -> Result<Self> {
        let mut data = TrainingData {
            rows,
            train_pool: Vec::new(),
            val_pool: Vec::new(),
            generalization: subsets.generalization,
            train_subset: subsets.train,
            train_weights,
            sampler: config.sampler,
            budget: config.budget,
        };
        data.train_pool = data.draw_train_pool(derive_seed(config.seed, "pool-train", 0))?;
        let val_seed = derive_seed(config.seed, "pool-val", 0);
        data.val_pool = match (config.sampler, val_weights) {
            (SamplerKind::Random, _) => random_sample(rows, &subsets.validation, config.budget.val_per_flight, val_seed),
            (SamplerKind::Uniform, Some(w)) => w.draw(config.budget.val_per_flight, val_seed),
            (SamplerKind::Uniform, None) => InverseDensityWeights::fit(rows, &subsets.validation)?.draw(config.budget.val_per_flight, val_seed),
        };
        Ok(data)
    }

    fn draw_train_pool(&self, seed: u64) -> Result<Vec<usize>> {
        let budget = self.budget.train_per_flight;
        Ok(match (&self.train_weights, self.sampler) {
            (Some(w), SamplerKind::Uniform) => w.draw(budget, seed),
            (None, SamplerKind::Uniform) => InverseDensityWeights::fit(self.rows, &self.train_subset)?.draw(budget, seed),
            (_, SamplerKind::Random) => random_sample(self.rows, &self.train_subset, budget, seed),
        })
    }

    /// Fails if a flight feeds both the training and the validation pool.
    pub fn check_leakage(&self) -> Result<()> {
        let train: BTreeSet<&str> = self.train_pool.iter().map(|&i| self.rows[i].flight_id.as_str()).collect();
        match self.val_pool.iter().map(|&i| &self.rows[i].flight_id).find(|f| train.contains(f.as_str())) {
            Some(f) => Err(Error::FlightLeakage { flight_id: f.clone() }),
            None => Ok(()),
        }
    }

    /// Sorted, de-duplicated aircraft types of the training pool.
    pub fn training_types(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.train_pool.iter().map(|&i| self.rows[i].type_code.as_str()).collect();
        set.into_iter().map(String::from).collect()
    }
}

/// Row indices of each role, before pooling.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SubsetRows {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    /// Primary-fleet test rows.
    pub test: Vec<usize>,
    /// Generalization-fleet test rows.
    pub generalization: Vec<usize>,
}

impl SubsetRows {
    pub fn select(rows: &[ObservationRow], split: &DatasetSplit, fleet: &Fleet) -> Result<Self> {
        split.check_leakage()?;
        let index = split.index();
        let mut out = SubsetRows::default();
        for (i, row) in rows.iter().enumerate() {
            let membership = fleet.membership(&row.type_code).ok_or_else(|| Error::InvalidSpec {
                type_code: row.type_code.clone(),
                reason: "type is not in the fleet".into(),
            })?;
            let Some(&subset) = index.get(row.flight_id.as_str()) else { continue };
            match (membership, subset) {
                (Membership::Training, Subset::Train) => out.train.push(i),
                (Membership::Training, Subset::Validation) => out.validation.push(i),
                (Membership::Training, Subset::Test) => out.test.push(i),
                (Membership::Generalization, Subset::Test) => out.generalization.push(i),
                (Membership::Generalization, _) => {}
            }
        }
        Ok(out)
    }
}

/// Network batch for the given rows (raw features, targets and caps).
pub fn batch_from_rows(rows: &[ObservationRow], indices: &[usize]) -> Batch {
    let mut inputs = alloc::vec![0.0; indices.len() * INPUT_DIM];
    let mut targets = Vec::with_capacity(indices.len());
    let mut ff_cap = Vec::with_capacity(indices.len());
    for (slot, &i) in inputs.chunks_exact_mut(INPUT_DIM).zip(indices) {
        rows[i].write_inputs(slot);
        targets.push(rows[i].target_ff);
        ff_cap.push(rows[i].ff_cap());
    }
    Batch { input_dim: INPUT_DIM, inputs, targets, ff_cap }
}

const PREDICT_CHUNK: usize = 8192;

/// Inference-mode predictions (kg/s) for `indices`.
pub fn predict_rows(model: &ModelState, rows: &[ObservationRow], indices: &[usize]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(indices.len());
    for chunk in indices.chunks(PREDICT_CHUNK) {
        out.extend(model.predict(&batch_from_rows(rows, chunk))?);
    }
    Ok(out)
}

struct Scores {
    metric: f64,
    mape: f64,
    mae: f64,
    me: f64,
}

fn score(model: &ModelState, rows: &[ObservationRow], indices: &[usize], spec: LossSpec) -> Result<Scores> {
    let pred = predict_rows(model, rows, indices)?;
    let target: Vec<f64> = indices.iter().map(|&i| rows[i].target_ff).collect();
    let metric = crate::nn::loss(&pred, &target, spec)?;
    let mape = crate::nn::loss(&pred, &target, LossSpec::new(LossKind::Mape, 0.0))?;
    let mae = crate::nn::loss(&pred, &target, LossSpec::new(LossKind::Mae, 0.0))? * 3600.0;
    let me = crate::nn::loss(&pred, &target, LossSpec::new(LossKind::Me, 0.0))? * 3600.0;
    Ok(Scores { metric, mape, mae, me })
}

/// Trains for `config.epochs` epochs and returns the snapshot with the lowest
/// validation metric together with the full history.
pub fn train_model(data: &TrainingData<'_>, config: &TrainConfig) -> Result<(ModelState, TrainHistory)> {
    config.validate()?;
    data.check_leakage()?;
    if data.train_pool.is_empty() || data.val_pool.is_empty() {
        return Err(Error::TooFew { what: "training and validation rows", needed: 1, got: 0 });
    }
    let rows = data.rows;
    let mut model = ModelState::new(config.model_config(INPUT_DIM), config.seed)?;
    let mut optimizer = Adam::new(model.n_params(), config.learning_rate);
    let mut history = TrainHistory::default();
    let mut best: Option<(f64, ModelState)> = None;
    let mut pool = data.train_pool.clone();

    for epoch in 1..=config.epochs {
        if config.resample_each_epoch && epoch > 1 {
            pool = data.draw_train_pool(derive_seed(config.seed, "pool-train", epoch as u64))?;
        }
        let mut order = pool.clone();
        Rng::derived(config.seed, "epoch-shuffle", epoch as u64).shuffle(&mut order);
        let mut loss_sum = 0.0;
        for (b, chunk) in order.chunks(config.batch_size).enumerate() {
            let mut batch = batch_from_rows(rows, chunk);
            if config.noise > 0.0 {
                let mut rng = Rng::derived(config.seed, "feature-noise", ((epoch as u64) << 32) | b as u64);
                apply_feature_noise(&mut batch, SPEC_COLUMNS, config.noise, &mut rng);
            }
            let (value, grads) = model.train_step_gradients(&batch, config.loss).map_err(|e| match e {
                e if e.is_numeric() => Error::NonFiniteLoss { epoch, batch: b },
                e => e,
            })?;
            if !value.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, batch: b });
            }
            optimizer.step(&mut model.params, &grads);
            loss_sum += value * chunk.len() as f64;
        }

        let val = score(&model, rows, &data.val_pool, config.loss)?;
        let gen_mape = if config.track_generalization && !data.generalization.is_empty() {
            Some(score(&model, rows, &data.generalization, config.loss)?.mape)
        } else {
            None
        };
        history.epochs.push(EpochRecord {
            epoch,
            train_loss: loss_sum / order.len() as f64,
            val_metric: val.metric,
            val_mape: val.mape,
            val_mae: val.mae,
            val_me: val.me,
            gen_mape,
        });
        if best.as_ref().is_none_or(|(m, _)| val.metric < *m) {
            history.best_epoch = epoch;
            best = Some((val.metric, model.clone()));
        }
    }

    let (metric, mut best_model) = best.expect("at least one epoch");
    best_model.provenance.seed = config.seed;
    best_model.provenance.epochs_run = config.epochs;
    best_model.provenance.best_epoch = history.best_epoch;
    best_model.provenance.best_val_metric = metric;
    best_model.provenance.checkpoint_metric = config.checkpoint_metric();
    best_model.provenance.training_types = data.training_types();
    Ok((best_model, history))
}
