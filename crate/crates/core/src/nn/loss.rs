use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    Mse,
    /// Mean signed error, prediction minus target.
    Me,
    Mae,
    /// Percent.
    Mape,
    /// `MAE + β · MAPE`
    BetaMape,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Mse => "mse",
            LossKind::Me => "me",
            LossKind::Mae => "mae",
            LossKind::Mape => "mape",
            LossKind::BetaMape => "beta_mape",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [LossKind::Mse, LossKind::Me, LossKind::Mae, LossKind::Mape, LossKind::BetaMape]
            .into_iter()
            .find(|k| k.name() == name)
    }

    fn needs_positive_targets(self) -> bool {
        matches!(self, LossKind::Mape | LossKind::BetaMape)
    }
}

/// A loss kind together with its `β` (ignored by all kinds but `BetaMape`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSpec {
    pub kind: LossKind,
    pub beta: f64,
}

impl LossSpec {
    pub fn new(kind: LossKind, beta: f64) -> Self {
        LossSpec { kind, beta }
    }

    pub fn beta_mape(beta: f64) -> Self {
        LossSpec { kind: LossKind::BetaMape, beta }
    }
}

fn check(pred: &[f64], target: &[f64], kind: LossKind) -> Result<()> {
    if pred.len() != target.len() {
        return Err(Error::DimensionMismatch { expected: target.len(), got: pred.len() });
    }
    if kind.needs_positive_targets() {
        if let Some(row) = target.iter().position(|&y| y == 0.0) {
            return Err(Error::ZeroTarget { row });
        }
    }
    Ok(())
}

pub fn loss(pred: &[f64], target: &[f64], spec: LossSpec) -> Result<f64> {
    check(pred, target, spec.kind)?;
    let n = pred.len() as f64;
    let mean = |f: &dyn Fn(f64, f64) -> f64| pred.iter().zip(target).map(|(&p, &y)| f(p, y)).sum::<f64>() / n;
    Ok(match spec.kind {
        LossKind::Mse => mean(&|p, y| (p - y) * (p - y)),
        LossKind::Me => mean(&|p, y| p - y),
        LossKind::Mae => mean(&|p, y| math::abs(p - y)),
        LossKind::Mape => 100.0 * mean(&|p, y| math::abs((p - y) / y)),
        LossKind::BetaMape => {
            // evaluated literally as MAE + beta * MAPE
            let mape = 100.0 * mean(&|p, y| math::abs((p - y) / y));
            mean(&|p, y| math::abs(p - y)) + spec.beta * mape
        }
    })
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Derivative of [`loss`] with respect to each prediction.
pub fn loss_gradient(pred: &[f64], target: &[f64], spec: LossSpec) -> Result<Vec<f64>> {
    check(pred, target, spec.kind)?;
    let n = pred.len() as f64;
    Ok(pred
        .iter()
        .zip(target)
        .map(|(&p, &y)| {
            let e = p - y;
            match spec.kind {
                LossKind::Mse => 2.0 * e / n,
                LossKind::Me => 1.0 / n,
                LossKind::Mae => sign(e) / n,
                LossKind::Mape => 100.0 * sign(e) / (math::abs(y) * n),
                LossKind::BetaMape => sign(e) / n + spec.beta * 100.0 * sign(e) / (math::abs(y) * n),
            }
        })
        .collect())
}
