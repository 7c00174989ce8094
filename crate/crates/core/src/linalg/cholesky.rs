use crate::error::{Error, Result};
use crate::linalg::dense::{norm2, DenseMatrix};

const SYMMETRY_TOL: f64 = 1e-12;

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    l: DenseMatrix,
}

impl Cholesky {
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::dims(format!("{n}x{n}"), format!("{n}x{}", a.cols())));
        }
        if a.asymmetry() > SYMMETRY_TOL {
            return Err(Error::InvalidInput("matrix is not symmetric".into()));
        }
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: j });
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Ok(Self { l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.rows();
        assert_eq!(b.len(), n);
        let l = &self.l;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= l[(i, k)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= l[(k, i)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        y
    }

    pub fn factor_l(&self) -> &DenseMatrix {
        &self.l
    }
}

/// Solves a symmetric positive definite system by Cholesky.
pub fn solve_dense_spd(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.rows() {
        return Err(Error::dims(a.rows(), b.len()));
    }
    Ok(Cholesky::factor(a)?.solve(b))
}

/// Least-squares solution of `min ‖A x − b‖₂` by Householder QR.
///
/// Used to cross-check the normal-equations path; fails when `A` has a
/// numerically zero column after orthogonalisation.
pub fn solve_least_squares_qr(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(Error::dims(m, b.len()));
    }
    if m < n {
        return Err(Error::InvalidInput("least squares needs rows >= cols".into()));
    }
    let mut r = a.clone();
    let mut rhs = b.to_vec();
    let scale = r.max_abs();
    for k in 0..n {
        let col = &r.col(k)[k..];
        let alpha = norm2(col);
        if alpha <= f64::EPSILON * scale * (m as f64) {
            return Err(Error::RankDeficient { sigma_min: alpha });
        }
        let alpha = if col[0] > 0.0 { -alpha } else { alpha };
        let mut v = col.to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for j in k..n {
                let cj = &mut r.col_mut(j)[k..];
                let d: f64 = v.iter().zip(cj.iter()).map(|(x, y)| x * y).sum();
                let f = 2.0 * d / vnorm2;
                for (y, x) in cj.iter_mut().zip(&v) {
                    *y -= f * x;
                }
            }
            let d: f64 = v.iter().zip(&rhs[k..]).map(|(x, y)| x * y).sum();
            let f = 2.0 * d / vnorm2;
            for (y, x) in rhs[k..].iter_mut().zip(&v) {
                *y -= f * x;
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for j in (i + 1)..n {
            s -= r[(i, j)] * x[j];
        }
        x[i] = s / r[(i, i)];
    }
    Ok(x)
}
