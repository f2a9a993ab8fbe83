//! Uniform quantile transform of a single feature column.
//!
//! Fitting keeps `n_quantiles = min(1000, n)` anchors taken at evenly spaced
//! empirical-CDF levels. Mapping interpolates linearly between anchors, clamps
//! outside the fitted range, and when several anchors share a value returns
//! the midpoint of their levels. A column with a single distinct value maps
//! everything to 0.5.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

pub const MAX_QUANTILES: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantileColumn {
    anchors: Vec<f64>,
}

impl QuantileColumn {
    pub fn fit(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::TooFew { what: "quantile fit samples", needed: 1, got: 0 });
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let n_q = n.min(MAX_QUANTILES);
        let anchors = if n_q == 1 {
            alloc::vec![sorted[0]]
        } else {
            (0..n_q)
                .map(|k| {
                    let pos = k as f64 / (n_q - 1) as f64 * (n - 1) as f64;
                    let lo = math::floor(pos) as usize;
                    let hi = (lo + 1).min(n - 1);
                    let frac = pos - lo as f64;
                    sorted[lo] + frac * (sorted[hi] - sorted[lo])
                })
                .collect()
        };
        Ok(QuantileColumn { anchors })
    }

    pub fn n_quantiles(&self) -> usize {
        self.anchors.len()
    }

    pub fn anchors(&self) -> &[f64] {
        &self.anchors
    }

    pub fn is_constant(&self) -> bool {
        self.anchors[0] == self.anchors[self.anchors.len() - 1]
    }

    fn level(&self, k: usize) -> f64 {
        k as f64 / (self.anchors.len() - 1) as f64
    }

    /// Maps `value` into `[0, 1]`.
    pub fn map(&self, value: f64) -> f64 {
        if self.is_constant() {
            return 0.5;
        }
        let q = &self.anchors;
        let last = q.len() - 1;
        if value <= q[0] {
            return 0.0;
        }
        if value >= q[last] {
            return 1.0;
        }
        let below = q.partition_point(|&a| a < value);
        let upto = q.partition_point(|&a| a <= value);
        if upto > below {
            // value hits one or more anchors exactly
            return 0.5 * (self.level(below) + self.level(upto - 1));
        }
        let (lo, hi) = (below - 1, below);
        let frac = (value - q[lo]) / (q[hi] - q[lo]);
        self.level(lo) + frac * (self.level(hi) - self.level(lo))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_interpolation_and_clamping() {
        let col = QuantileColumn::fit(&[3.0, 1.0, 4.0, 2.0]).unwrap();
        assert_eq!(col.map(1.0), 0.0);
        assert_eq!(col.map(4.0), 1.0);
        assert!((col.map(2.5) - 0.5).abs() < 1e-15);
        assert_eq!(col.map(100.0), 1.0);
        assert_eq!(col.map(-100.0), 0.0);
    }

    #[test]
    fn constant_column_maps_to_midpoint() {
        let col = QuantileColumn::fit(&[7.0; 5]).unwrap();
        assert_eq!(col.map(7.0), 0.5);
        assert_eq!(col.map(-1.0), 0.5);
    }

    #[test]
    fn anchors_are_capped_and_monotone() {
        let values: Vec<f64> = (0..5000).map(|i| ((i * 7919) % 5000) as f64).collect();
        let col = QuantileColumn::fit(&values).unwrap();
        assert_eq!(col.n_quantiles(), MAX_QUANTILES);
        assert!(col.anchors().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn binary_column_maps_to_ends() {
        let col = QuantileColumn::fit(&[0.0, 0.0, 1.0, 0.0, 1.0]).unwrap();
        assert_eq!(col.map(0.0), 0.0);
        assert_eq!(col.map(1.0), 1.0);
    }

    #[test]
    fn tied_interior_anchors_map_to_level_midpoint() {
        let col = QuantileColumn::fit(&[0.0, 1.0, 1.0, 1.0, 2.0]).unwrap();
        // levels 0, .25, .5, .75, 1 ; value 1 sits on anchors 1..=3
        assert!((col.map(1.0) - 0.5).abs() < 1e-15);
    }
}
