//! Per-type metrics, the distance-stratified generalization report and the
//! flight-phase histogram.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::ObservationRow;
use crate::error::{Error, Result};
use crate::fleet::{closest_training_distance, Fleet, Membership, QuantileMap};
use crate::math;
use crate::nn::ModelState;
use crate::train::predict_rows;

/// Seconds per hour; MAE and ME are reported in kg/h.
const KG_S_TO_KG_H: f64 = 3600.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TypeMetrics {
    pub type_code: String,
    /// %
    pub mape: f64,
    /// kg/h
    pub mae: f64,
    /// Prediction minus target, kg/h.
    pub me: f64,
    pub n_rows: usize,
}

/// Unweighted mean and population standard deviation across types.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Aggregate {
    pub mape: (f64, f64),
    pub mae: (f64, f64),
    pub me: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerTypeReport {
    /// Sorted by type code.
    pub types: Vec<TypeMetrics>,
    pub aggregate: Aggregate,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    if n == 0.0 {
        return (0.0, 0.0);
    }
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, math::sqrt(var))
}

pub fn aggregate(types: &[TypeMetrics]) -> Aggregate {
    Aggregate {
        mape: mean_std(types.iter().map(|t| t.mape)),
        mae: mean_std(types.iter().map(|t| t.mae)),
        me: mean_std(types.iter().map(|t| t.me)),
    }
}

/// Metrics per type from predictions (kg/s) aligned with `indices`.
pub fn metrics_by_type(rows: &[ObservationRow], indices: &[usize], predictions: &[f64]) -> Result<PerTypeReport> {
    if indices.len() != predictions.len() {
        return Err(Error::DimensionMismatch { expected: indices.len(), got: predictions.len() });
    }
    // (Σ|e/y|, Σ|e|, Σe, n)
    let mut sums: BTreeMap<&str, (f64, f64, f64, usize)> = BTreeMap::new();
    for (&i, &p) in indices.iter().zip(predictions) {
        let row = &rows[i];
        if row.target_ff == 0.0 {
            return Err(Error::ZeroTarget { row: i });
        }
        let e = p - row.target_ff;
        let s = sums.entry(row.type_code.as_str()).or_default();
        s.0 += math::abs(e / row.target_ff);
        s.1 += math::abs(e);
        s.2 += e;
        s.3 += 1;
    }
    let types: Vec<TypeMetrics> = sums
        .into_iter()
        .map(|(code, (ape, ae, e, n))| {
            let n_f = n as f64;
            TypeMetrics {
                type_code: code.into(),
                mape: 100.0 * ape / n_f,
                mae: ae / n_f * KG_S_TO_KG_H,
                me: e / n_f * KG_S_TO_KG_H,
                n_rows: n,
            }
        })
        .collect();
    let aggregate = aggregate(&types);
    Ok(PerTypeReport { types, aggregate })
}

/// Inference-mode evaluation of `model` on `indices`, grouped by type.
pub fn evaluate_per_type(model: &ModelState, rows: &[ObservationRow], indices: &[usize]) -> Result<PerTypeReport> {
    let pred = predict_rows(model, rows, indices)?;
    metrics_by_type(rows, indices, &pred)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenEntry {
    /// Pseudo-distance to the closest training type.
    pub d_min: f64,
    pub closest: String,
    pub metrics: TypeMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenReport {
    /// One entry per generalization type, sorted by type code.
    pub entries: Vec<GenEntry>,
    pub aggregate: Aggregate,
    /// Spearman rank correlation of `d_min` and MAPE; `None` when undefined.
    pub spearman: Option<f64>,
}

/// Joins per-type metrics of generalization rows with their distance to the
/// training fleet.
pub fn generalization_report_from_predictions(
    rows: &[ObservationRow],
    gen_indices: &[usize],
    predictions: &[f64],
    fleet: &Fleet,
    qmap: &QuantileMap,
) -> Result<GenReport> {
    for &i in gen_indices {
        let code = &rows[i].type_code;
        if fleet.membership(code) != Some(Membership::Generalization) {
            return Err(Error::TypeLeakage { type_code: code.clone() });
        }
    }
    let per_type = metrics_by_type(rows, gen_indices, predictions)?;
    let entries = per_type
        .types
        .into_iter()
        .map(|metrics| {
            let spec = &fleet.get(&metrics.type_code).expect("membership checked").spec;
            let (d_min, closest) = closest_training_distance(spec, fleet, qmap)?;
            Ok(GenEntry { d_min, closest, metrics })
        })
        .collect::<Result<Vec<_>>>()?;
    let d: Vec<f64> = entries.iter().map(|e| e.d_min).collect();
    let m: Vec<f64> = entries.iter().map(|e| e.metrics.mape).collect();
    Ok(GenReport { spearman: spearman(&d, &m), aggregate: per_type.aggregate, entries })
}

/// Generalization report for `model`. Types the model was trained on are
/// rejected.
pub fn generalization_report(
    model: &ModelState,
    rows: &[ObservationRow],
    gen_indices: &[usize],
    fleet: &Fleet,
    qmap: &QuantileMap,
) -> Result<GenReport> {
    let trained = &model.provenance.training_types;
    if let Some(&i) = gen_indices.iter().find(|&&i| trained.contains(&rows[i].type_code)) {
        return Err(Error::TypeLeakage { type_code: rows[i].type_code.clone() });
    }
    let pred = predict_rows(model, rows, gen_indices)?;
    generalization_report_from_predictions(rows, gen_indices, &pred, fleet, qmap)
}

/// Ranks starting at 1, ties receiving their average rank.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation (Pearson correlation of average ranks).
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / math::sqrt(vx * vy))
}

/// Vertical rate separating level flight from climb and descent, ft/min.
pub const LEVEL_THRESHOLD_FPM: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Climb,
    Level,
    Descent,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::Climb, Phase::Level, Phase::Descent];

    pub fn name(self) -> &'static str {
        match self {
            Phase::Climb => "climb",
            Phase::Level => "level",
            Phase::Descent => "descent",
        }
    }

    pub fn classify(vertical_rate: f64, threshold: f64) -> Phase {
        if vertical_rate > threshold {
            Phase::Climb
        } else if vertical_rate < -threshold {
            Phase::Descent
        } else {
            Phase::Level
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PhaseHistogram {
    pub climb: usize,
    pub level: usize,
    pub descent: usize,
}

impl PhaseHistogram {
    pub fn from_vertical_rates(rates: impl IntoIterator<Item = f64>, threshold: f64) -> Self {
        let mut h = PhaseHistogram::default();
        for vr in rates {
            match Phase::classify(vr, threshold) {
                Phase::Climb => h.climb += 1,
                Phase::Level => h.level += 1,
                Phase::Descent => h.descent += 1,
            }
        }
        h
    }

    pub fn total(&self) -> usize {
        self.climb + self.level + self.descent
    }

    pub fn count(&self, phase: Phase) -> usize {
        match phase {
            Phase::Climb => self.climb,
            Phase::Level => self.level,
            Phase::Descent => self.descent,
        }
    }

    pub fn fraction(&self, phase: Phase) -> f64 {
        match self.total() {
            0 => 0.0,
            n => self.count(phase) as f64 / n as f64,
        }
    }
}

/// Phase histogram of the rows at `indices`.
pub fn phase_histogram(rows: &[ObservationRow], indices: &[usize]) -> PhaseHistogram {
    PhaseHistogram::from_vertical_rates(indices.iter().map(|&i| rows[i].vertical_rate()), LEVEL_THRESHOLD_FPM)
}
