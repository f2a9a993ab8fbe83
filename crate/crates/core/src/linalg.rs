//! Small dense linear algebra: symmetric eigendecomposition and
//! minimum-norm least squares. Sizes here are at most a few dozen columns.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Eigen-decomposition of a symmetric `n x n` matrix (row-major) by cyclic
/// Jacobi rotations.
///
/// Returns eigenvalues in descending order and the matching unit eigenvectors
/// as rows of the second element.
pub fn symmetric_eigen(matrix: &[f64], n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    assert_eq!(matrix.len(), n * n);
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (math::abs(theta) + math::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / math::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&col| (0..n).map(|row| v[row * n + col]).collect())
        .collect();
    (values, vectors)
}

/// Minimum-norm least-squares fit of `y ~ intercept + X b`.
///
/// `x` is row-major with `cols` columns. Columns are centred and scaled
/// internally; constant columns receive a zero coefficient. Directions of the
/// normal matrix with eigenvalue below `1e-10` of the largest are discarded,
/// which yields the pseudo-inverse solution for rank-deficient designs.
/// Returns `(intercept, coefficients)`.
pub fn least_squares(x: &[f64], y: &[f64], cols: usize) -> (f64, Vec<f64>) {
    let rows = y.len();
    assert_eq!(x.len(), rows * cols);
    assert!(rows > 0);
    let n = rows as f64;
    let y_mean = y.iter().sum::<f64>() / n;
    let mut mean = vec![0.0; cols];
    let mut scale = vec![0.0; cols];
    for j in 0..cols {
        mean[j] = (0..rows).map(|r| x[r * cols + j]).sum::<f64>() / n;
        let ss: f64 = (0..rows).map(|r| { let d = x[r * cols + j] - mean[j]; d * d }).sum();
        scale[j] = math::sqrt(ss / n);
    }
    let active: Vec<usize> = (0..cols).filter(|&j| scale[j] > 1e-12 * (1.0 + math::abs(mean[j]))).collect();
    let k = active.len();
    let mut coef = vec![0.0; cols];
    if k == 0 {
        return (y_mean, coef);
    }
    let z = |r: usize, a: usize| (x[r * cols + active[a]] - mean[active[a]]) / scale[active[a]];

    let mut gram = vec![0.0; k * k];
    let mut rhs = vec![0.0; k];
    for r in 0..rows {
        let yr = y[r] - y_mean;
        for a in 0..k {
            let za = z(r, a);
            rhs[a] += za * yr;
            for b in a..k {
                gram[a * k + b] += za * z(r, b);
            }
        }
    }
    for a in 0..k {
        for b in 0..a {
            gram[a * k + b] = gram[b * k + a];
        }
    }
    let (values, vectors) = symmetric_eigen(&gram, k);
    let cutoff = values[0].max(0.0) * 1e-10;
    let mut beta = vec![0.0; k];
    for (lambda, u) in values.iter().zip(&vectors) {
        if *lambda <= cutoff {
            continue;
        }
        let proj: f64 = u.iter().zip(&rhs).map(|(a, b)| a * b).sum::<f64>() / lambda;
        for (bj, uj) in beta.iter_mut().zip(u) {
            *bj += proj * uj;
        }
    }
    let mut intercept = y_mean;
    for (a, &j) in active.iter().enumerate() {
        coef[j] = beta[a] / scale[j];
        intercept -= coef[j] * mean[j];
    }
    (intercept, coef)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_diagonal_is_sorted() {
        let m = [1.0, 0.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 2.0];
        let (vals, vecs) = symmetric_eigen(&m, 3);
        assert_eq!(vals, vec![3.0, 2.0, 1.0]);
        assert_eq!(vecs[0].iter().map(|x| x.abs()).collect::<Vec<_>>(), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn eigen_reconstructs_matrix() {
        let m = [4.0, 1.0, 0.5, 1.0, 3.0, -0.2, 0.5, -0.2, 1.0];
        let (vals, vecs) = symmetric_eigen(&m, 3);
        for i in 0..3 {
            for j in 0..3 {
                let r: f64 = (0..3).map(|k| vals[k] * vecs[k][i] * vecs[k][j]).sum();
                assert!((r - m[i * 3 + j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn least_squares_recovers_exact_line() {
        let x = [1.0, 2.0, 4.0];
        let y = [3.0, 5.0, 9.0];
        let (b0, b) = least_squares(&x, &y, 1);
        assert!((b0 - 1.0).abs() < 1e-12 && (b[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn least_squares_handles_underdetermined_and_constant_columns() {
        // two rows, three columns (one constant): min-norm solution still interpolates
        let x = [1.0, 5.0, 0.3, 2.0, 5.0, 0.9];
        let y = [2.0, 4.0];
        let (b0, b) = least_squares(&x, &y, 3);
        assert_eq!(b[1], 0.0);
        for r in 0..2 {
            let pred = b0 + (0..3).map(|j| b[j] * x[r * 3 + j]).sum::<f64>();
            assert!((pred - y[r]).abs() < 1e-9);
        }
    }
}
