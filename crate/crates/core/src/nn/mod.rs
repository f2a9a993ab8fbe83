//! Dense regression network: input batch normalization, `N` ReLU blocks of
//! width `K`, one ReLU layer of width `M`, and a bounded scalar head.
//!
//! Parameters live in a single flat vector (see [`Layout`]) so that the
//! optimizer, gradient checks and checkpoints treat them uniformly.

mod adam;
mod loss;
mod model;
mod noise;

pub use adam::{Adam, ADAM_BETA1, ADAM_BETA2, ADAM_EPSILON};
pub use loss::{loss, loss_gradient, LossKind, LossSpec};
pub use model::{
    Batch, ForwardCache, Layout, Mode, ModelConfig, ModelState, Provenance, BN_EPSILON, BN_MOMENTUM,
};
pub use noise::{apply_feature_noise, NOISE_SIGMA};

/// Output head of the network, applied to the scalar pre-activation `z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum HeadVariant {
    /// `min(relu(z), ff_cap)`
    Clamp,
    /// `min(relu(z), 1) · ff_cap`
    #[default]
    Relu,
    /// `sigmoid(z) · ff_cap`
    Sigmoid,
}

impl HeadVariant {
    pub fn letter(self) -> char {
        match self {
            HeadVariant::Clamp => 'C',
            HeadVariant::Relu => 'R',
            HeadVariant::Sigmoid => 'S',
        }
    }

    pub fn from_letter(s: &str) -> Option<Self> {
        match s {
            "C" => Some(HeadVariant::Clamp),
            "R" => Some(HeadVariant::Relu),
            "S" => Some(HeadVariant::Sigmoid),
            _ => None,
        }
    }

    /// Head output and its derivative with respect to `z`. Clamped regions
    /// (including their boundaries) have derivative zero.
    #[inline]
    pub fn apply(self, z: f64, cap: f64) -> (f64, f64) {
        match self {
            HeadVariant::Clamp => {
                let y = z.max(0.0).min(cap);
                (y, if z > 0.0 && z < cap { 1.0 } else { 0.0 })
            }
            HeadVariant::Relu => {
                let y = z.max(0.0).min(1.0) * cap;
                (y, if z > 0.0 && z < 1.0 { cap } else { 0.0 })
            }
            HeadVariant::Sigmoid => {
                let s = if z >= 0.0 {
                    1.0 / (1.0 + crate::math::exp(-z))
                } else {
                    let e = crate::math::exp(z);
                    e / (1.0 + e)
                };
                // saturated sigmoid rounds onto the bounds; keep the open interval
                let y = (s * cap).clamp(f64::MIN_POSITIVE, cap.next_down());
                (y, s * (1.0 - s) * cap)
            }
        }
    }
}
