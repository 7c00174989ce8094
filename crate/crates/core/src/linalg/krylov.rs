use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::dense::{axpy, dot, norm2};
use crate::linalg::sparse::SparseMatrix;

pub const GMRES_RESTART: usize = 30;
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KrylovMethod {
    Cg,
    Gmres,
}

#[derive(Clone, Debug)]
pub struct KrylovOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub residual_norm: f64,
}

pub fn solve_iterative(
    a: &SparseMatrix,
    b: &[f64],
    method: KrylovMethod,
    tol: f64,
    max_iter: usize,
) -> Result<KrylovOutcome> {
    if !a.is_square() {
        return Err(Error::dims("square matrix", format!("{}x{}", a.rows(), a.cols())));
    }
    if b.len() != a.rows() {
        return Err(Error::dims(a.rows(), b.len()));
    }
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(KrylovOutcome {
            solution: vec![0.0; b.len()],
            iterations: 0,
            converged: true,
            residual_norm: 0.0,
        });
    }
    match method {
        KrylovMethod::Cg => cg(a, b, tol * bnorm, max_iter),
        KrylovMethod::Gmres => gmres(a, b, tol * bnorm, max_iter),
    }
}

fn cg(a: &SparseMatrix, b: &[f64], target: f64, max_iter: usize) -> Result<KrylovOutcome> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut it = 0;
    while it < max_iter {
        let ap = a.matvec(&p);
        let pap = dot(&p, &ap);
        if pap == 0.0 || !pap.is_finite() {
            return Err(Error::Breakdown { iteration: it });
        }
        let alpha = rr / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        it += 1;
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= target {
            return Ok(KrylovOutcome {
                solution: x,
                iterations: it,
                converged: true,
                residual_norm: rr_new.sqrt(),
            });
        }
        let beta = rr_new / rr;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rr = rr_new;
    }
    Ok(KrylovOutcome {
        solution: x,
        iterations: it,
        converged: false,
        residual_norm: rr.sqrt(),
    })
}

/// Restarted GMRES(30) with Givens rotations on the Hessenberg matrix.
fn gmres(a: &SparseMatrix, b: &[f64], target: f64, max_iter: usize) -> Result<KrylovOutcome> {
    let n = b.len();
    let m = GMRES_RESTART;
    let mut x = vec![0.0; n];
    let mut it = 0;
    let mut resid: f64;
    while it < max_iter {
        let ax = a.matvec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm2(&r);
        resid = beta;
        if beta <= target {
            break;
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut used = 0;
        for j in 0..m {
            if it >= max_iter {
                break;
            }
            let mut w = a.matvec(&basis[j]);
            for (i, vi) in basis.iter().enumerate() {
                h[i][j] = dot(&w, vi);
                axpy(-h[i][j], vi, &mut w);
            }
            let wn = norm2(&w);
            h[j + 1][j] = wn;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let denom = h[j][j].hypot(h[j + 1][j]);
            if denom == 0.0 {
                return Err(Error::Breakdown { iteration: it });
            }
            cs[j] = h[j][j] / denom;
            sn[j] = h[j + 1][j] / denom;
            h[j][j] = denom;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            it += 1;
            used = j + 1;
            resid = g[j + 1].abs();
            if resid <= target || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        let mut y = vec![0.0; used];
        for i in (0..used).rev() {
            let mut s = g[i];
            for k in (i + 1)..used {
                s -= h[i][k] * y[k];
            }
            y[i] = s / h[i][i];
        }
        for (k, yk) in y.iter().enumerate() {
            axpy(*yk, &basis[k], &mut x);
        }
        if resid <= target {
            break;
        }
    }
    let ax = a.matvec(&x);
    let true_resid = norm2(&b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect::<Vec<_>>());
    Ok(KrylovOutcome {
        converged: true_resid <= target,
        solution: x,
        iterations: it,
        residual_norm: true_resid,
    })
}
