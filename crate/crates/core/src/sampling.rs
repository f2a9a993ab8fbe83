//! Observation pools for training and validation.
//!
//! Two samplers draw a fixed budget of rows per flight, with replacement:
//! plain uniform-at-random draws, and the density-flattening sampler. The
//! latter maps each aircraft type's state features through per-feature
//! quantile transforms, projects them onto the top two principal axes,
//! estimates the density there with a Gaussian KDE and samples rows with
//! weights proportional to the inverse density. Rows from under-represented
//! flight regimes (climbs, descents, unusual speeds) are therefore drawn more
//! often than the dominant cruise regime.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::dataset::{ObservationRow, N_STATE};
use crate::error::{Error, Result};
use crate::linalg;
use crate::math;
use crate::quantile::QuantileColumn;
use crate::rng::Rng;

/// Density floor applied before inverting.
pub const DENSITY_FLOOR: f64 = 1e-12;
/// Minimum KDE bandwidth per dimension.
pub const BANDWIDTH_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplingBudget {
    pub train_per_flight: usize,
    pub val_per_flight: usize,
}

impl Default for SamplingBudget {
    fn default() -> Self {
        SamplingBudget { train_per_flight: 1000, val_per_flight: 500 }
    }
}

impl SamplingBudget {
    pub fn new(train_per_flight: usize, val_per_flight: usize) -> Result<Self> {
        if train_per_flight == 0 || val_per_flight == 0 {
            return Err(Error::InvalidConfig("sampling budgets must be at least 1".into()));
        }
        Ok(SamplingBudget { train_per_flight, val_per_flight })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplerKind {
    Random,
    #[default]
    Uniform,
}

impl SamplerKind {
    pub fn name(self) -> &'static str {
        match self {
            SamplerKind::Random => "random",
            SamplerKind::Uniform => "uniform",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "random" => Some(SamplerKind::Random),
            "uniform" => Some(SamplerKind::Uniform),
            _ => None,
        }
    }
}

/// Row indices grouped by a key, keys in sorted order, indices ascending.
fn group_by<'a>(rows: &'a [ObservationRow], idx: &[usize], key: impl Fn(&'a ObservationRow) -> &'a str) -> BTreeMap<&'a str, Vec<usize>> {
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for &i in idx {
        groups.entry(key(&rows[i])).or_default().push(i);
    }
    groups
}

/// Draws `budget` rows per flight uniformly with replacement from the rows
/// listed in `subset`. Returns indices into `rows`, flights in sorted order.
pub fn random_sample(rows: &[ObservationRow], subset: &[usize], budget: usize, seed: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(budget * 16);
    for (flight, members) in group_by(rows, subset, |r| r.flight_id.as_str()) {
        let mut rng = Rng::derived(seed, &format!("random-sample:{flight}"), 0);
        out.extend((0..budget).map(|_| members[rng.below(members.len() as u64) as usize]));
    }
    out
}

/// Quantile transform, centring and projection onto two principal axes.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection2D<const D: usize> {
    pub columns: Vec<QuantileColumn>,
    pub center: [f64; D],
    /// Unit-norm, orthogonal; first non-zero loading of each is positive.
    pub axes: [[f64; D]; 2],
    /// Variance along each axis, descending.
    pub explained_variance: [f64; 2],
}

impl<const D: usize> Projection2D<D> {
    pub fn map(&self, point: &[f64; D]) -> [f64; D] {
        let mut out = [0.0; D];
        for (d, o) in out.iter_mut().enumerate() {
            *o = self.columns[d].map(point[d]);
        }
        out
    }

    pub fn project(&self, point: &[f64; D]) -> [f64; 2] {
        let mapped = self.map(point);
        let mut out = [0.0; 2];
        for (k, axis) in self.axes.iter().enumerate() {
            out[k] = (0..D).map(|d| (mapped[d] - self.center[d]) * axis[d]).sum();
        }
        out
    }
}

pub fn fit_projection<const D: usize>(points: &[[f64; D]]) -> Result<Projection2D<D>> {
    if points.len() < 3 {
        return Err(Error::TooFew { what: "rows for projection", needed: 3, got: points.len() });
    }
    assert!(D >= 2, "projection needs at least two features");
    let columns = (0..D)
        .map(|d| QuantileColumn::fit(&points.iter().map(|p| p[d]).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    let mapped: Vec<[f64; D]> = points
        .iter()
        .map(|p| {
            let mut m = [0.0; D];
            for d in 0..D {
                m[d] = columns[d].map(p[d]);
            }
            m
        })
        .collect();
    let n = mapped.len() as f64;
    let mut center = [0.0; D];
    for m in &mapped {
        for d in 0..D {
            center[d] += m[d];
        }
    }
    for c in &mut center {
        *c /= n;
    }
    let mut cov = vec![0.0; D * D];
    for m in &mapped {
        for a in 0..D {
            let da = m[a] - center[a];
            for b in a..D {
                cov[a * D + b] += da * (m[b] - center[b]);
            }
        }
    }
    for a in 0..D {
        for b in a..D {
            cov[a * D + b] /= n;
            cov[b * D + a] = cov[a * D + b];
        }
    }
    let (values, vectors) = linalg::symmetric_eigen(&cov, D);
    let mut axes = [[0.0; D]; 2];
    for k in 0..2 {
        axes[k].copy_from_slice(&vectors[k]);
        if let Some(first) = axes[k].iter().copied().find(|v| math::abs(*v) > 1e-12) {
            if first < 0.0 {
                axes[k].iter_mut().for_each(|v| *v = -*v);
            }
        }
    }
    Ok(Projection2D { columns, center, axes, explained_variance: [values[0].max(0.0), values[1].max(0.0)] })
}

/// Gaussian product-kernel density estimate in the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Kde2 {
    points: Vec<[f64; 2]>,
    weights: Vec<f64>,
    total_weight: f64,
    bandwidth: [f64; 2],
}

impl Kde2 {
    pub fn new(points: &[[f64; 2]]) -> Result<Self> {
        Self::weighted(points.to_vec(), vec![1.0; points.len()])
    }

    /// Points with integer-like multiplicities; equivalent to repeating each
    /// point `weight` times.
    pub fn weighted(points: Vec<[f64; 2]>, weights: Vec<f64>) -> Result<Self> {
        let total_weight: f64 = weights.iter().sum();
        if total_weight < 2.0 {
            return Err(Error::TooFew { what: "KDE points", needed: 2, got: total_weight as usize });
        }
        let mut bandwidth = [0.0; 2];
        for (d, h) in bandwidth.iter_mut().enumerate() {
            let mean = points.iter().zip(&weights).map(|(p, w)| p[d] * w).sum::<f64>() / total_weight;
            let ss: f64 = points.iter().zip(&weights).map(|(p, w)| w * (p[d] - mean) * (p[d] - mean)).sum();
            let sigma = math::sqrt(ss / (total_weight - 1.0));
            *h = (sigma * math::powf(total_weight, -1.0 / 6.0)).max(BANDWIDTH_FLOOR);
        }
        Ok(Kde2 { points, weights, total_weight, bandwidth })
    }

    pub fn bandwidth(&self) -> [f64; 2] {
        self.bandwidth
    }

    pub fn density(&self, query: [f64; 2]) -> f64 {
        let [hx, hy] = self.bandwidth;
        let (ix, iy) = (1.0 / hx, 1.0 / hy);
        let mut acc = 0.0;
        for (p, w) in self.points.iter().zip(&self.weights) {
            let u = (query[0] - p[0]) * ix;
            let v = (query[1] - p[1]) * iy;
            acc += w * math::exp(-0.5 * (u * u + v * v));
        }
        acc / (self.total_weight * TAU * hx * hy)
    }
    /// Density at each of the estimator's own points, using kernel symmetry
    /// to evaluate every pair once.
    pub fn self_density(&self) -> Vec<f64> {
        let [hx, hy] = self.bandwidth;
        let (ix, iy) = (1.0 / hx, 1.0 / hy);
        let n = self.points.len();
        let mut acc: Vec<f64> = self.weights.clone();
        for i in 0..n {
            let (pi, wi) = (self.points[i], self.weights[i]);
            let mut row = 0.0;
            for j in (i + 1)..n {
                let u = (pi[0] - self.points[j][0]) * ix;
                let v = (pi[1] - self.points[j][1]) * iy;
                let k = math::exp(-0.5 * (u * u + v * v));
                row += self.weights[j] * k;
                acc[j] += wi * k;
            }
            acc[i] += row;
        }
        let norm = 1.0 / (self.total_weight * TAU * hx * hy);
        acc.iter_mut().for_each(|a| *a *= norm);
        acc
    }
}

/// Density of `points` evaluated at each query.
pub fn kde_density(points: &[[f64; 2]], queries: &[[f64; 2]]) -> Result<Vec<f64>> {
    let kde = Kde2::new(points)?;
    Ok(queries.iter().map(|&q| kde.density(q)).collect())
}

/// Collapses exactly repeated points into `(point, multiplicity)` pairs and
/// returns, for each input, the index of its representative.
fn dedup_points(points: &[[f64; 2]]) -> (Vec<[f64; 2]>, Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..points.len()).collect();
    let key = |p: &[f64; 2]| (p[0].to_bits(), p[1].to_bits());
    order.sort_by_key(|&i| key(&points[i]));
    let mut unique = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut rep = vec![0; points.len()];
    for i in order {
        if unique.last().map(|u: &[f64; 2]| key(u)) != Some(key(&points[i])) {
            unique.push(points[i]);
            weights.push(0.0);
        }
        *weights.last_mut().unwrap() += 1.0;
        rep[i] = unique.len() - 1;
    }
    (unique, weights, rep)
}

#[derive(Debug, Clone, PartialEq)]
struct TypeWeights {
    type_code: alloc::string::String,
    members: Vec<usize>,
    cumulative: Vec<f64>,
    n_flights: usize,
}

/// Fitted inverse-density weights for every type of a row subset. Fitting is
/// the expensive part; drawing for several seeds reuses it.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseDensityWeights {
    types: Vec<TypeWeights>,
    /// KDE density of every row of the subset, aligned with the subset.
    pub density: Vec<f64>,
    /// Sampling weight `1 / max(density, floor)`, aligned with the subset.
    pub weight: Vec<f64>,
    /// Projected coordinates, aligned with the subset.
    pub projected: Vec<[f64; 2]>,
}

impl InverseDensityWeights {
    pub fn fit(rows: &[ObservationRow], subset: &[usize]) -> Result<Self> {
        let position: BTreeMap<usize, usize> = subset.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        let mut density = vec![0.0; subset.len()];
        let mut weight = vec![0.0; subset.len()];
        let mut projected = vec![[0.0; 2]; subset.len()];
        let mut types = Vec::new();
        for (type_code, members) in group_by(rows, subset, |r| r.type_code.as_str()) {
            let states: Vec<[f64; N_STATE]> = members.iter().map(|&i| rows[i].state).collect();
            let projection = fit_projection(&states)?;
            let points: Vec<[f64; 2]> = states.iter().map(|s| projection.project(s)).collect();
            // mass variants of a flight share their state, so most points repeat
            let (unique, counts, rep) = dedup_points(&points);
            let unique_density = Kde2::weighted(unique, counts)?.self_density();

            let mut cumulative = Vec::with_capacity(members.len());
            let mut acc = 0.0;
            for (k, &i) in members.iter().enumerate() {
                let d = unique_density[rep[k]];
                let w = 1.0 / d.max(DENSITY_FLOOR);
                density[position[&i]] = d;
                weight[position[&i]] = w;
                projected[position[&i]] = points[k];
                acc += w;
                cumulative.push(acc);
            }
            let mut ids: Vec<&str> = members.iter().map(|&i| rows[i].flight_id.as_str()).collect();
            ids.sort_unstable();
            ids.dedup();
            types.push(TypeWeights { type_code: type_code.into(), members, cumulative, n_flights: ids.len() });
        }
        Ok(InverseDensityWeights { types, density, weight, projected })
    }

    /// Weighted draw with replacement of `budget × flights` rows per type, by
    /// inversion of the cumulative weights.
    pub fn draw(&self, budget: usize, seed: u64) -> Vec<usize> {
        let mut indices = Vec::new();
        for t in &self.types {
            let total = *t.cumulative.last().expect("non-empty type group");
            let mut rng = Rng::derived(seed, &format!("uniform-sample:{}", t.type_code), 0);
            for _ in 0..budget * t.n_flights {
                let target = rng.next_f64() * total;
                let k = t.cumulative.partition_point(|&c| c <= target).min(t.members.len() - 1);
                indices.push(t.members[k]);
            }
        }
        indices
    }
}

/// Inverse-density sampling: per type, `budget × flights-of-type` rows.
pub fn uniform_sample(rows: &[ObservationRow], subset: &[usize], budget: usize, seed: u64) -> Result<Vec<usize>> {
    Ok(InverseDensityWeights::fit(rows, subset)?.draw(budget, seed))
}

/// Dispatches to the configured sampler.
pub fn sample(kind: SamplerKind, rows: &[ObservationRow], subset: &[usize], budget: usize, seed: u64) -> Result<Vec<usize>> {
    match kind {
        SamplerKind::Random => Ok(random_sample(rows, subset, budget, seed)),
        SamplerKind::Uniform => uniform_sample(rows, subset, budget, seed),
    }
}
