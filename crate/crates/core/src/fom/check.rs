use crate::error::{Error, Result};
use crate::fom::FomProblem;

/// Largest column-wise relative discrepancy between the analytic Jacobian
/// and central differences of the residual.
///
/// Each column `j` is perturbed by `h = 1e-6 (1 + |w_j|)` and compared in
/// the max norm, scaled by the larger of the two columns.
pub fn jacobian_check<P: FomProblem + ?Sized>(problem: &P, state: &[f64], t: f64) -> Result<f64> {
    let n = problem.layout().total_dofs();
    let all: Vec<usize> = (0..n).collect();
    jacobian_check_block(problem, state, t, &all, &all)
}

/// Same as [`jacobian_check`] restricted to a row/column block, scaled by
/// the block's own magnitude.
pub fn jacobian_check_block<P: FomProblem + ?Sized>(
    problem: &P,
    state: &[f64],
    t: f64,
    rows: &[usize],
    cols: &[usize],
) -> Result<f64> {
    let n = problem.layout().total_dofs();
    if state.len() != n {
        return Err(Error::dims(n, state.len()));
    }
    if rows.iter().chain(cols).any(|&i| i >= n) {
        return Err(Error::InvalidInput("block index out of range".into()));
    }
    let jac = problem.jacobian_full(state, t)?;
    let mut worst = 0.0f64;
    let mut w = state.to_vec();
    for &j in cols {
        let h = 1e-6 * (1.0 + state[j].abs());
        w[j] = state[j] + h;
        let rp = problem.residual(&w, t)?;
        w[j] = state[j] - h;
        let rm = problem.residual(&w, t)?;
        w[j] = state[j];
        let mut diff = 0.0f64;
        let mut scale = 0.0f64;
        for &i in rows {
            let fd = (rp[i] - rm[i]) / (2.0 * h);
            let an = jac.get(i, j);
            diff = diff.max((fd - an).abs());
            scale = scale.max(fd.abs()).max(an.abs());
        }
        if scale > 0.0 {
            worst = worst.max(diff / scale);
        }
    }
    Ok(worst)
}
