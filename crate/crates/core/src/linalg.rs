//! Dense decompositions small enough to carry in-crate.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::sqrt;

/// Thin result of a one-sided Jacobi SVD of an `m x n` matrix.
///
/// `singular_values[k]` pairs with column `k` of `v` (row-major `n x n`).
/// Values are not sorted.
#[derive(Debug, Clone)]
pub struct Svd {
    pub singular_values: Vec<f64>,
    pub v: Vec<f64>,
    pub n: usize,
}

impl Svd {
    pub fn v_column(&self, k: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.v[i * self.n + k]).collect()
    }

    /// Column indices ordered by ascending singular value.
    pub fn ascending(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.n).collect();
        idx.sort_by(|&a, &b| self.singular_values[a].total_cmp(&self.singular_values[b]));
        idx
    }
}

/// Hestenes one-sided Jacobi SVD. `a` is row-major `m x n`.
///
/// Orthogonal rotations are applied to column pairs until all columns are
/// mutually orthogonal; the rotations accumulate into `V`. Works for any
/// `m`, including `m < n`, where the surplus columns collapse to zero.
pub fn jacobi_svd(a: &[f64], m: usize, n: usize) -> Svd {
    assert_eq!(a.len(), m * n);
    let mut u = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    const EPS: f64 = 1e-15;
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..m {
                    let up = u[i * n + p];
                    let uq = u[i * n + q];
                    alpha += up * up;
                    beta += uq * uq;
                    gamma += up * uq;
                }
                if gamma == 0.0 || gamma.abs() <= EPS * sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + sqrt(1.0 + zeta * zeta));
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / sqrt(1.0 + t * t);
                let s = c * t;
                for i in 0..m {
                    let up = u[i * n + p];
                    let uq = u[i * n + q];
                    u[i * n + p] = c * up - s * uq;
                    u[i * n + q] = s * up + c * uq;
                }
                for i in 0..n {
                    let vp = v[i * n + p];
                    let vq = v[i * n + q];
                    v[i * n + p] = c * vp - s * vq;
                    v[i * n + q] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let singular_values = (0..n)
        .map(|k| sqrt((0..m).map(|i| u[i * n + k] * u[i * n + k]).sum()))
        .collect();
    Svd { singular_values, v, n }
}

/// Eigenvalues `(small, large)` of the symmetric matrix `[[a, b], [b, c]]`.
pub fn sym2_eigenvalues(a: f64, b: f64, c: f64) -> (f64, f64) {
    let mean = 0.5 * (a + c);
    let half = 0.5 * (a - c);
    let r = sqrt(half * half + b * b);
    (mean - r, mean + r)
}

/// Singular values `(small, large)` of an `n x 2` matrix with rows `pts`,
/// after subtracting the column means.
pub fn centered_singular_values_2d(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let (mx, my) = pts
        .iter()
        .fold((0.0, 0.0), |(sx, sy), &(x, y)| (sx + x / n, sy + y / n));
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in pts {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let (lo, hi) = sym2_eigenvalues(sxx, sxy, syy);
    (sqrt(lo.max(0.0)), sqrt(hi.max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_reconstructs_singular_values_of_diagonal() {
        let a = [3.0, 0.0, 0.0, 0.0, 1.0, 0.0];
        let svd = jacobi_svd(&a, 2, 3);
        let mut s = svd.singular_values.clone();
        s.sort_by(|a, b| a.total_cmp(b));
        assert!(s[0].abs() < 1e-15);
        assert!((s[1] - 1.0).abs() < 1e-15);
        assert!((s[2] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn svd_null_vector_annihilates_rank_deficient_matrix() {
        // Rows span a 2D subspace of R^3.
        let a = [1.0, 2.0, 3.0, 2.0, 4.0, 6.5, -1.0, -2.0, -3.5, 3.0, 6.0, 9.5];
        let svd = jacobi_svd(&a, 4, 3);
        let k = svd.ascending()[0];
        let h = svd.v_column(k);
        for row in a.chunks(3) {
            let r: f64 = row.iter().zip(&h).map(|(x, y)| x * y).sum();
            assert!(r.abs() < 1e-12, "residual {r}");
        }
        let n: f64 = h.iter().map(|x| x * x).sum();
        assert!((n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_points_have_zero_small_singular_value() {
        let pts = [(0.0, 0.0), (1.0, 2.0), (2.0, 4.0), (-3.0, -6.0)];
        let (lo, hi) = centered_singular_values_2d(&pts);
        assert!(lo < 1e-9 * hi);
    }
}
