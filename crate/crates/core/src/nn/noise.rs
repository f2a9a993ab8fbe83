use core::ops::Range;

use super::Batch;
use crate::rng::Rng;

/// Standard deviation of the multiplicative feature noise.
pub const NOISE_SIGMA: f64 = 0.33;

/// Multiplies every cell of `columns` by `1 + p·g`, `g ~ N(0, 0.33²)`, drawing
/// fresh values on each call. Other columns, targets and caps are untouched.
pub fn apply_feature_noise(batch: &mut Batch, columns: Range<usize>, p: f64, rng: &mut Rng) {
    if p == 0.0 {
        return;
    }
    let dim = batch.input_dim;
    for row in batch.inputs.chunks_exact_mut(dim) {
        for x in &mut row[columns.clone()] {
            *x *= 1.0 + p * NOISE_SIGMA * rng.normal();
        }
    }
}
