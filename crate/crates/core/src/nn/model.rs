use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::loss::{loss, loss_gradient, LossSpec};
use super::HeadVariant;
use crate::error::{Error, Result};
use crate::math;
use crate::rng::Rng;

/// Running-statistics momentum of the input batch normalization.
pub const BN_MOMENTUM: f64 = 0.99;
pub const BN_EPSILON: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    /// Number of hidden blocks (`N`).
    pub n_blocks: usize,
    /// Width of each block (`K`).
    pub width: usize,
    /// Width of the layer feeding the head (`M`).
    pub head_width: usize,
    pub head_variant: HeadVariant,
    pub l2_coeff: f64,
    pub input_dim: usize,
}

impl ModelConfig {
    pub fn new(n_blocks: usize, width: usize, head_width: usize, head_variant: HeadVariant, input_dim: usize) -> Self {
        ModelConfig { n_blocks, width, head_width, head_variant, l2_coeff: 1e-4, input_dim }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_blocks == 0 || self.width == 0 || self.head_width == 0 || self.input_dim == 0 {
            return Err(Error::InvalidConfig("N, K, M and input_dim must all be at least 1".into()));
        }
        if !(self.l2_coeff >= 0.0 && self.l2_coeff.is_finite()) {
            return Err(Error::InvalidConfig("l2_coeff must be finite and non-negative".into()));
        }
        Ok(())
    }

    /// `(fan_in, fan_out)` of every dense layer, head included.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.n_blocks + 2);
        let mut fan_in = self.input_dim;
        for _ in 0..self.n_blocks {
            dims.push((fan_in, self.width));
            fan_in = self.width;
        }
        dims.push((fan_in, self.head_width));
        dims.push((self.head_width, 1));
        dims
    }
}

/// Offsets of every parameter group in the flat parameter vector:
/// batch-norm scale and shift, then weights (row-major, `fan_in x fan_out`)
/// and bias of each dense layer in order.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub gamma: usize,
    pub beta: usize,
    /// `(weights_offset, bias_offset, fan_in, fan_out)` per dense layer.
    pub layers: Vec<(usize, usize, usize, usize)>,
    pub len: usize,
}

impl Layout {
    pub fn new(config: &ModelConfig) -> Self {
        let d = config.input_dim;
        let mut offset = 2 * d;
        let layers = config
            .layer_dims()
            .into_iter()
            .map(|(i, o)| {
                let w = offset;
                let b = w + i * o;
                offset = b + o;
                (w, b, i, o)
            })
            .collect();
        Layout { gamma: 0, beta: d, layers, len: offset }
    }

    /// True if parameter `index` is a dense-layer weight (subject to L2).
    pub fn is_weight(&self, index: usize) -> bool {
        self.layers.iter().any(|&(w, b, _, _)| (w..b).contains(&index))
    }
}

/// Where a model came from; stored in checkpoints.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Provenance {
    pub seed: u64,
    pub epochs_run: usize,
    /// 1-based epoch of the retained snapshot.
    pub best_epoch: usize,
    pub best_val_metric: f64,
    /// Name of the checkpoint selection metric.
    pub checkpoint_metric: String,
    /// Aircraft types the model was trained on.
    pub training_types: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub config: ModelConfig,
    pub layout: Layout,
    pub params: Vec<f64>,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    pub provenance: Provenance,
}

/// Network inputs with the per-row head scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub input_dim: usize,
    /// Row-major, `rows x input_dim`.
    pub inputs: Vec<f64>,
    /// kg/s
    pub targets: Vec<f64>,
    /// `1.1 x n_engines x ff_takeoff`, kg/s
    pub ff_cap: Vec<f64>,
}

impl Batch {
    pub fn rows(&self) -> usize {
        self.targets.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Batch statistics; running statistics are updated.
    Train,
    /// Running statistics; pure.
    Infer,
}

/// Intermediate values of one forward pass, needed by the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub rows: usize,
    pub batch_mean: Vec<f64>,
    pub batch_var: Vec<f64>,
    /// Normalized inputs before scale and shift.
    x_hat: Vec<f64>,
    /// Inputs to each dense layer (first entry: batch-norm output).
    layer_inputs: Vec<Vec<f64>>,
    /// Pre-activations of each dense layer.
    pre_activations: Vec<Vec<f64>>,
    /// Head output.
    pub predictions: Vec<f64>,
    head_slope: Vec<f64>,
}

fn dense_forward(input: &[f64], rows: usize, w: &[f64], b: &[f64], fan_in: usize, fan_out: usize) -> Vec<f64> {
    let mut out = vec![0.0; rows * fan_out];
    for (x, o) in input.chunks_exact(fan_in).zip(out.chunks_exact_mut(fan_out)) {
        o.copy_from_slice(b);
        for (k, &xk) in x.iter().enumerate() {
            if xk == 0.0 {
                continue;
            }
            let wk = &w[k * fan_out..(k + 1) * fan_out];
            for (oj, wj) in o.iter_mut().zip(wk) {
                *oj += xk * wj;
            }
        }
    }
    out
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            acc[l] += a[4 * c + l] * b[4 * c + l];
        }
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

impl ModelState {
    /// Fresh model: fan-in scaled uniform weights `U(±√(6/fan_in))`, zero
    /// biases, identity batch normalization.
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(&config);
        let mut params = vec![0.0; layout.len];
        let d = config.input_dim;
        params[layout.gamma..layout.gamma + d].fill(1.0);
        let mut rng = Rng::derived(seed, "weight-init", 0);
        for &(w, b, fan_in, _) in &layout.layers {
            let limit = math::sqrt(6.0 / fan_in as f64);
            for p in &mut params[w..b] {
                *p = rng.uniform(-limit, limit);
            }
        }
        // head bias starts inside the linear range of every variant
        let &(_, head_bias, _, _) = layout.layers.last().expect("at least one layer");
        params[head_bias] = 0.5;
        Ok(ModelState {
            config,
            layout,
            params,
            running_mean: vec![0.0; d],
            running_var: vec![1.0; d],
            provenance: Provenance { seed, ..Provenance::default() },
        })
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    /// `Σ‖W‖²` over dense-layer weights.
    pub fn weight_norm_sq(&self) -> f64 {
        self.layout.layers.iter().map(|&(w, b, _, _)| self.params[w..b].iter().map(|x| x * x).sum::<f64>()).sum()
    }

    fn check_batch(&self, batch: &Batch) -> Result<()> {
        if batch.input_dim != self.config.input_dim {
            return Err(Error::DimensionMismatch { expected: self.config.input_dim, got: batch.input_dim });
        }
        let rows = batch.rows();
        if batch.inputs.len() != rows * batch.input_dim || batch.ff_cap.len() != rows {
            return Err(Error::DimensionMismatch { expected: rows * batch.input_dim, got: batch.inputs.len() });
        }
        if rows == 0 {
            return Err(Error::TooFew { what: "batch rows", needed: 1, got: 0 });
        }
        Ok(())
    }

    /// Forward pass without touching running statistics.
    pub fn forward_cached(&self, batch: &Batch, mode: Mode) -> Result<ForwardCache> {
        self.check_batch(batch)?;
        let rows = batch.rows();
        let d = self.config.input_dim;
        let (batch_mean, batch_var) = match mode {
            Mode::Train => {
                let mut mean = vec![0.0; d];
                for x in batch.inputs.chunks_exact(d) {
                    for (m, v) in mean.iter_mut().zip(x) {
                        *m += v;
                    }
                }
                mean.iter_mut().for_each(|m| *m /= rows as f64);
                let mut var = vec![0.0; d];
                for x in batch.inputs.chunks_exact(d) {
                    for ((s, v), m) in var.iter_mut().zip(x).zip(&mean) {
                        *s += (v - m) * (v - m);
                    }
                }
                var.iter_mut().for_each(|s| *s /= rows as f64);
                (mean, var)
            }
            Mode::Infer => (self.running_mean.clone(), self.running_var.clone()),
        };
        let inv_std: Vec<f64> = batch_var.iter().map(|v| 1.0 / math::sqrt(v + BN_EPSILON)).collect();
        let gamma = &self.params[self.layout.gamma..self.layout.gamma + d];
        let beta = &self.params[self.layout.beta..self.layout.beta + d];
        let mut x_hat = vec![0.0; rows * d];
        let mut normalized = vec![0.0; rows * d];
        for r in 0..rows {
            for k in 0..d {
                let i = r * d + k;
                x_hat[i] = (batch.inputs[i] - batch_mean[k]) * inv_std[k];
                normalized[i] = gamma[k] * x_hat[i] + beta[k];
            }
        }
        if normalized.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteActivation { layer: 0 });
        }

        let n_layers = self.layout.layers.len();
        let mut layer_inputs = Vec::with_capacity(n_layers);
        let mut pre_activations = Vec::with_capacity(n_layers);
        let mut current = normalized;
        for (l, &(w, b, fan_in, fan_out)) in self.layout.layers.iter().enumerate() {
            let z = dense_forward(&current, rows, &self.params[w..b], &self.params[b..b + fan_out], fan_in, fan_out);
            if z.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteActivation { layer: l + 1 });
            }
            let next = if l + 1 < n_layers { z.iter().map(|v| v.max(0.0)).collect() } else { Vec::new() };
            layer_inputs.push(current);
            pre_activations.push(z);
            current = next;
        }
        let head = self.config.head_variant;
        let z = pre_activations.last().expect("head layer");
        let (predictions, head_slope) = z.iter().zip(&batch.ff_cap).map(|(&z, &cap)| head.apply(z, cap)).unzip();
        Ok(ForwardCache { rows, batch_mean, batch_var, x_hat, layer_inputs, pre_activations, predictions, head_slope })
    }

    /// Folds the batch statistics of a training-mode pass into the running
    /// statistics.
    pub fn update_running_stats(&mut self, cache: &ForwardCache) {
        for k in 0..self.config.input_dim {
            self.running_mean[k] = BN_MOMENTUM * self.running_mean[k] + (1.0 - BN_MOMENTUM) * cache.batch_mean[k];
            self.running_var[k] = BN_MOMENTUM * self.running_var[k] + (1.0 - BN_MOMENTUM) * cache.batch_var[k];
        }
    }

    /// Predictions in kg/s. Training mode normalizes with batch statistics
    /// and updates the running statistics.
    pub fn forward(&mut self, batch: &Batch, mode: Mode) -> Result<Vec<f64>> {
        let cache = self.forward_cached(batch, mode)?;
        if mode == Mode::Train {
            self.update_running_stats(&cache);
        }
        Ok(cache.predictions)
    }

    /// Inference-mode predictions; a pure function of the model and inputs.
    pub fn predict(&self, batch: &Batch) -> Result<Vec<f64>> {
        Ok(self.forward_cached(batch, Mode::Infer)?.predictions)
    }

    /// Data loss plus `l2_coeff · Σ‖W‖²`.
    pub fn objective(&self, cache: &ForwardCache, batch: &Batch, spec: LossSpec) -> Result<f64> {
        Ok(loss(&cache.predictions, &batch.targets, spec)? + self.config.l2_coeff * self.weight_norm_sq())
    }

    /// Gradient of [`ModelState::objective`] with respect to every parameter.
    ///
    /// No parameters precede the batch normalization, so its gradients stop
    /// at the scale and shift; the batch statistics only enter through `x̂`.
    pub fn backward(&self, cache: &ForwardCache, batch: &Batch, spec: LossSpec) -> Result<Vec<f64>> {
        let rows = cache.rows;
        let mut grads = vec![0.0; self.params.len()];
        let dloss = loss_gradient(&cache.predictions, &batch.targets, spec)?;
        let mut upstream: Vec<f64> = dloss.iter().zip(&cache.head_slope).map(|(g, s)| g * s).collect();

        for l in (0..self.layout.layers.len()).rev() {
            let (w, b, fan_in, fan_out) = self.layout.layers[l];
            let input = &cache.layer_inputs[l];
            {
                let (gw, gb) = grads[w..b + fan_out].split_at_mut(b - w);
                for (x, dz) in input.chunks_exact(fan_in).zip(upstream.chunks_exact(fan_out)) {
                    for (gbj, dzj) in gb.iter_mut().zip(dz) {
                        *gbj += dzj;
                    }
                    for (k, &xk) in x.iter().enumerate() {
                        if xk == 0.0 {
                            continue;
                        }
                        let row = &mut gw[k * fan_out..(k + 1) * fan_out];
                        for (g, dzj) in row.iter_mut().zip(dz) {
                            *g += xk * dzj;
                        }
                    }
                }
            }
            let weights = &self.params[w..b];
            let mut down = vec![0.0; rows * fan_in];
            for (dz, dx) in upstream.chunks_exact(fan_out).zip(down.chunks_exact_mut(fan_in)) {
                for (k, dxk) in dx.iter_mut().enumerate() {
                    *dxk = dot(dz, &weights[k * fan_out..(k + 1) * fan_out]);
                }
            }
            if l > 0 {
                // ReLU of the previous layer
                for (g, z) in down.iter_mut().zip(&cache.pre_activations[l - 1]) {
                    if *z <= 0.0 {
                        *g = 0.0;
                    }
                }
            }
            upstream = down;
        }

        let d = self.config.input_dim;
        for r in 0..rows {
            for k in 0..d {
                let dy = upstream[r * d + k];
                grads[self.layout.gamma + k] += dy * cache.x_hat[r * d + k];
                grads[self.layout.beta + k] += dy;
            }
        }
        let l2 = 2.0 * self.config.l2_coeff;
        if l2 != 0.0 {
            for &(w, b, _, _) in &self.layout.layers {
                for (g, p) in grads[w..b].iter_mut().zip(&self.params[w..b]) {
                    *g += l2 * p;
                }
            }
        }
        if let Some(index) = grads.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient { index });
        }
        Ok(grads)
    }

    /// Training-mode forward (updating running statistics) and backward.
    /// Returns the objective value and its gradient.
    pub fn train_step_gradients(&mut self, batch: &Batch, spec: LossSpec) -> Result<(f64, Vec<f64>)> {
        let cache = self.forward_cached(batch, Mode::Train)?;
        let value = self.objective(&cache, batch, spec)?;
        let grads = self.backward(&cache, batch, spec)?;
        self.update_running_stats(&cache);
        Ok((value, grads))
    }
}
