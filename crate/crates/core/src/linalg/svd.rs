//! Thin SVD by one-sided (Hestenes) Jacobi rotations.
//!
//! Columns of a working copy of `A` are rotated pairwise until they are
//! mutually orthogonal; their norms are then the singular values and the
//! accumulated rotations form `V`. The method is slower than
//! Golub-Kahan on large inputs but is deterministic, dependency-free and
//! accurate to working precision for every singular value that is not
//! swamped by rounding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::dense::{dot, norm2, DenseMatrix};

const MAX_SWEEPS: usize = 80;
const ORTHO_TOL: f64 = 1e-15;

/// `A = U diag(σ) Vᵀ` with `K = min(rows, cols)` retained triplets.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SvdResult {
    pub left_vectors: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub right_vectors: DenseMatrix,
}

impl SvdResult {
    pub fn rank_count(&self) -> usize {
        self.singular_values.len()
    }

    /// Rebuilds `U diag(σ) Vᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.left_vectors.clone();
        for (j, &s) in self.singular_values.iter().enumerate() {
            us.col_mut(j).iter_mut().for_each(|v| *v *= s);
        }
        us.matmul(&self.right_vectors.transpose())
    }
}

pub fn thin_svd(a: &DenseMatrix) -> Result<SvdResult> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::InvalidInput("SVD of an empty matrix".into()));
    }
    if !a.is_finite() {
        return Err(Error::InvalidInput("SVD input has non-finite entries".into()));
    }
    let mut res = if a.rows() >= a.cols() {
        jacobi_tall(a)
    } else {
        let t = jacobi_tall(&a.transpose());
        SvdResult {
            left_vectors: t.right_vectors,
            singular_values: t.singular_values,
            right_vectors: t.left_vectors,
        }
    };
    fix_signs(&mut res);
    Ok(res)
}

/// σ_max / σ_min, or +∞ when the smallest singular value is zero.
pub fn condition_number_2norm(a: &DenseMatrix) -> Result<f64> {
    let svd = thin_svd(a)?;
    let smax = svd.singular_values[0];
    let smin = *svd.singular_values.last().unwrap();
    if smin == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(smax / smin)
}

fn jacobi_tall(a: &DenseMatrix) -> SvdResult {
    let (n, p) = a.shape();
    let mut u = a.clone();
    let mut v = DenseMatrix::identity(p);
    let mut norms: Vec<f64> = (0..p).map(|j| dot(u.col(j), u.col(j))).collect();

    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..p {
            for j in (i + 1)..p {
                let alpha = norms[i];
                let beta = norms[j];
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = dot(u.col(i), u.col(j));
                if gamma.abs() <= ORTHO_TOL * (alpha.sqrt() * beta.sqrt()) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut u, i, j, c, s);
                rotate_columns(&mut v, i, j, c, s);
                norms[i] = dot(u.col(i), u.col(i));
                norms[j] = dot(u.col(j), u.col(j));
            }
        }
        if !rotated {
            break;
        }
    }

    let sigma: Vec<f64> = (0..p).map(|j| norm2(u.col(j))).collect();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&x, &y| sigma[y].total_cmp(&sigma[x]).then(x.cmp(&y)));

    let mut left = DenseMatrix::zeros(n, p);
    let mut right = DenseMatrix::zeros(p, p);
    let mut sorted_sigma = Vec::with_capacity(p);
    let mut null_slots = Vec::new();
    for (dst, &src) in order.iter().enumerate() {
        let s = sigma[src];
        sorted_sigma.push(s);
        right.col_mut(dst).copy_from_slice(v.col(src));
        if s > f64::MIN_POSITIVE {
            let col = left.col_mut(dst);
            for (o, x) in col.iter_mut().zip(u.col(src)) {
                *o = x / s;
            }
        } else {
            null_slots.push(dst);
        }
    }
    for &slot in &null_slots {
        sorted_sigma[slot] = 0.0;
        complete_column(&mut left, slot, &null_slots);
    }
    SvdResult {
        left_vectors: left,
        singular_values: sorted_sigma,
        right_vectors: right,
    }
}

fn rotate_columns(m: &mut DenseMatrix, i: usize, j: usize, c: f64, s: f64) {
    let rows = m.rows();
    let data = m.as_mut_slice();
    let (head, tail) = data.split_at_mut(j * rows);
    let ci = &mut head[i * rows..(i + 1) * rows];
    let cj = &mut tail[..rows];
    for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
        let xi = *x;
        let yj = *y;
        *x = c * xi - s * yj;
        *y = s * xi + c * yj;
    }
}

/// Fills a zero-singular-value slot with a unit vector orthogonal to every
/// other filled column, trying canonical vectors in order.
fn complete_column(left: &mut DenseMatrix, slot: usize, pending: &[usize]) {
    let n = left.rows();
    let p = left.cols();
    for k in 0..n {
        let mut cand = vec![0.0; n];
        cand[k] = 1.0;
        for _pass in 0..2 {
            for j in 0..p {
                if j == slot || (pending.contains(&j) && j > slot) {
                    continue;
                }
                let c = left.col(j);
                let d = dot(c, &cand);
                for (x, y) in cand.iter_mut().zip(c) {
                    *x -= d * y;
                }
            }
        }
        let nrm = norm2(&cand);
        if nrm > 0.5 {
            for (o, x) in left.col_mut(slot).iter_mut().zip(&cand) {
                *o = x / nrm;
            }
            return;
        }
    }
}

/// Largest-magnitude entry of each left vector made positive (first wins ties).
fn fix_signs(res: &mut SvdResult) {
    for j in 0..res.singular_values.len() {
        let col = res.left_vectors.col(j);
        let mut best = 0;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            res.left_vectors.col_mut(j).iter_mut().for_each(|v| *v = -*v);
            res.right_vectors.col_mut(j).iter_mut().for_each(|v| *v = -*v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_unit_singular_values() {
        let s = thin_svd(&DenseMatrix::identity(2)).unwrap();
        assert_eq!(s.singular_values, vec![1.0, 1.0]);
        for j in 0..2 {
            for i in 0..2 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((s.left_vectors[(i, j)].abs() - e).abs() < 1e-15);
                assert!((s.right_vectors[(i, j)].abs() - e).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn diagonal_with_zero() {
        let s = thin_svd(&DenseMatrix::diag(&[3.0, 0.0])).unwrap();
        assert_eq!(s.singular_values, vec![3.0, 0.0]);
        // completed null vector is still orthonormal
        let g = s.left_vectors.gram();
        assert!(g.sub(&DenseMatrix::identity(2)).frobenius_norm() < 1e-14);
        assert!(s.reconstruct().sub(&DenseMatrix::diag(&[3.0, 0.0])).max_abs() < 1e-15);
    }

    #[test]
    fn wide_matrix_is_transposed_internally() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]);
        let s = thin_svd(&a).unwrap();
        assert_eq!(s.left_vectors.shape(), (2, 2));
        assert_eq!(s.right_vectors.shape(), (3, 2));
        assert!(s.reconstruct().sub(&a).frobenius_norm() < 1e-13 * a.frobenius_norm());
    }

    #[test]
    fn rejects_non_finite_and_empty() {
        assert!(thin_svd(&DenseMatrix::zeros(0, 3)).is_err());
        let mut a = DenseMatrix::zeros(2, 2);
        a.as_mut_slice()[1] = f64::INFINITY;
        assert!(thin_svd(&a).is_err());
    }

    #[test]
    fn sign_convention_is_deterministic() {
        let a = DenseMatrix::from_rows(&[vec![-2.0, 0.0], vec![0.0, -1.0]]);
        let s = thin_svd(&a).unwrap();
        for j in 0..2 {
            let c = s.left_vectors.col(j);
            let m = c.iter().cloned().fold(0.0_f64, |a, b| if b.abs() > a.abs() { b } else { a });
            assert!(m > 0.0);
        }
    }

    #[test]
    fn condition_numbers() {
        assert_eq!(condition_number_2norm(&DenseMatrix::identity(3)).unwrap(), 1.0);
        let c = condition_number_2norm(&DenseMatrix::diag(&[10.0, 1.0])).unwrap();
        assert!((c - 10.0).abs() < 1e-14);
        let c = condition_number_2norm(&DenseMatrix::diag(&[1.0, 0.0])).unwrap();
        assert!(c.is_infinite());
    }
}
