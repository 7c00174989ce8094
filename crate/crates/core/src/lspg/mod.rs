//! Gauss-Newton least-squares Petrov-Galerkin solver with an optional
//! preconditioner inside the residual norm.
//!
//! Each iteration minimises `‖M (J Φ y + r)‖₂` over the reduced increment
//! `y` through the normal equations `(MJΦ)ᵀ(MJΦ) y = −(MJΦ)ᵀ M r`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fom::{ContinuationSchedule, FomProblem};
use crate::linalg::{
    condition_number_2norm, norm2, solve_direct, solve_least_squares_qr, thin_svd, Cholesky, DenseMatrix,
    SparseMatrix,
};
use crate::pod::ReducedBasis;
use crate::precond::{build_with, BuiltPreconditioner, PrecondOptions, PreconditionerKind};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalSolver {
    #[default]
    Cholesky,
    Qr,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaussNewtonConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// A step with `‖δŵ‖ ≤ step_tol ‖ŵ‖` marks the iterate stationary.
    pub step_tol: f64,
    /// A stationary iterate counts as converged when its preconditioned
    /// residual is at most this; otherwise the step has stalled.
    pub stall_tol: f64,
    pub max_iter: usize,
    /// Halve the step until the preconditioned residual decreases.
    pub backtracking: bool,
    pub solver: NormalSolver,
    pub record_condition: bool,
    pub precond: PrecondOptions,
}

impl Default for GaussNewtonConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            step_tol: 1e-10,
            stall_tol: 1e-5,
            max_iter: 20,
            backtracking: false,
            solver: NormalSolver::Cholesky,
            record_condition: true,
            precond: PrecondOptions::default(),
        }
    }
}

impl GaussNewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.step_tol > 0.0 && self.stall_tol > 0.0) {
            return Err(Error::Config("Gauss-Newton tolerances must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("Gauss-Newton needs max_iter >= 1".into()));
        }
        Ok(())
    }
}

/// Reduced space `w̃ = w_ref + Φ_M̄ (ŵ, ŵ_DBC)`.
#[derive(Clone, Debug)]
pub struct RomSpace {
    pub phi: DenseMatrix,
    pub reference: Vec<f64>,
    pub m: usize,
    pub m_dbc: usize,
}

impl RomSpace {
    pub fn new(basis: &ReducedBasis) -> Result<Self> {
        Ok(Self {
            phi: basis.augmented()?,
            reference: basis.reference_state.clone(),
            m: basis.dim(),
            m_dbc: basis.dbc_dim(),
        })
    }

    pub fn reconstruct(&self, coords: &[f64]) -> Vec<f64> {
        let mut w = self.phi.matvec(coords);
        for (wi, ri) in w.iter_mut().zip(&self.reference) {
            *wi += ri;
        }
        w
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RomState {
    pub coords: Vec<f64>,
    pub dbc_coords: Vec<f64>,
    pub full: Vec<f64>,
}

impl RomState {
    fn from_all(space: &RomSpace, all: &[f64]) -> Self {
        Self {
            coords: all[..space.m].to_vec(),
            dbc_coords: all[space.m..].to_vec(),
            full: space.reconstruct(all),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `‖M r̄‖₂` at the linearisation point.
    pub residual_norm: f64,
    /// `‖r̄‖₂` at the linearisation point.
    pub raw_residual_norm: f64,
    pub condition_number: Option<f64>,
    pub step_norm: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RomRunReport {
    pub kind: PreconditionerKind,
    pub m: usize,
    pub times: Vec<f64>,
    pub trajectory: Vec<RomState>,
    pub iterations: Vec<Vec<IterationRecord>>,
    pub total_nonlinear_iterations: usize,
    pub wall_seconds: f64,
    pub converged: bool,
    pub failure: Option<String>,
}

impl RomRunReport {
    /// Mean of every recorded reduced-Jacobian condition number.
    pub fn average_condition(&self) -> Option<f64> {
        let vals: Vec<f64> = self
            .iterations
            .iter()
            .flatten()
            .filter_map(|r| r.condition_number)
            .collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }

    pub fn full_states(&self) -> Vec<Vec<f64>> {
        self.trajectory.iter().map(|s| s.full.clone()).collect()
    }
}

/// Linearised least-squares problem at one iterate.
pub struct Linearization {
    pub a: DenseMatrix,
    pub rhs: Vec<f64>,
    pub raw_residual: Vec<f64>,
    pub jacobian: SparseMatrix,
    pub preconditioner: BuiltPreconditioner,
}

impl Linearization {
    pub fn reduced_jacobian(&self) -> DenseMatrix {
        self.a.gram()
    }

    pub fn reduced_residual(&self) -> Vec<f64> {
        self.a.tr_matvec(&self.rhs)
    }
}

/// Forms `A = M J̄ Φ_M̄` and `M r̄` at `w̃`.
pub fn linearize<P: FomProblem + ?Sized>(
    problem: &P,
    space: &RomSpace,
    kind: PreconditionerKind,
    full_state: &[f64],
    t: f64,
    options: &PrecondOptions,
    stamp: usize,
) -> Result<Linearization> {
    let raw_residual = problem.residual(full_state, t)?;
    let jacobian = problem.jacobian(full_state, t)?;
    let preconditioner = build_with(kind, &jacobian, options, stamp)?;
    let a = preconditioner.apply_to_matrix(&jacobian.mul_dense(&space.phi));
    let rhs = preconditioner.apply(&raw_residual);
    Ok(Linearization {
        a,
        rhs,
        raw_residual,
        jacobian,
        preconditioner,
    })
}

/// Solves the linearised problem for `δ(ŵ, ŵ_DBC)`.
pub fn solve_increment(lin: &Linearization, config: &GaussNewtonConfig, iteration: usize) -> Result<(Vec<f64>, IterationRecord)> {
    let jhat = lin.reduced_jacobian();
    let condition_number = if config.record_condition {
        Some(condition_number_2norm(&jhat)?)
    } else {
        None
    };
    let neg_rhs: Vec<f64> = lin.rhs.iter().map(|v| -v).collect();
    let delta = match config.solver {
        NormalSolver::Cholesky => {
            let rhat = lin.a.tr_matvec(&neg_rhs);
            match Cholesky::factor(&jhat) {
                Ok(c) => c.solve(&rhat),
                Err(Error::NotPositiveDefinite { .. }) => {
                    let sigma_min = thin_svd(&jhat)?.singular_values.last().copied().unwrap_or(0.0);
                    return Err(Error::RankDeficient { sigma_min });
                }
                Err(e) => return Err(e),
            }
        }
        NormalSolver::Qr => solve_least_squares_qr(&lin.a, &neg_rhs)?,
    };
    if delta.iter().any(|v| !v.is_finite()) {
        return Err(Error::RankDeficient { sigma_min: 0.0 });
    }
    let record = IterationRecord {
        iteration,
        residual_norm: norm2(&lin.rhs),
        raw_residual_norm: norm2(&lin.raw_residual),
        condition_number,
        step_norm: norm2(&delta),
    };
    Ok((delta, record))
}

/// One Gauss-Newton increment from `state` at time `t`.
pub fn gauss_newton_step<P: FomProblem + ?Sized>(
    problem: &P,
    space: &RomSpace,
    kind: PreconditionerKind,
    state: &RomState,
    t: f64,
    config: &GaussNewtonConfig,
) -> Result<(Vec<f64>, IterationRecord)> {
    let lin = linearize(problem, space, kind, &state.full, t, &config.precond, 0)?;
    solve_increment(&lin, config, 1)
}

/// Runs the reduced model through every continuation step.
///
/// Failures inside a step end the run with `converged = false`; the last
/// iterate of the failing step is kept in the trajectory.
pub fn run_lspg<P: FomProblem + ?Sized>(
    problem: &P,
    basis: &ReducedBasis,
    kind: PreconditionerKind,
    schedule: &ContinuationSchedule,
    config: &GaussNewtonConfig,
) -> Result<RomRunReport> {
    config.validate()?;
    schedule.validate()?;
    let layout = problem.layout();
    if basis.layout.hash() != layout.hash() {
        return Err(Error::LayoutMismatch {
            expected: layout.hash(),
            found: basis.layout.hash(),
        });
    }
    let space = RomSpace::new(basis)?;
    let start = Instant::now();
    let times = schedule.times();
    let dbc_ref = layout.gather_dbc(&space.reference);
    let mut coords = vec![0.0; space.m + space.m_dbc];
    let mut report = RomRunReport {
        kind,
        m: space.m,
        times: Vec::new(),
        trajectory: Vec::new(),
        iterations: Vec::new(),
        total_nonlinear_iterations: 0,
        wall_seconds: 0.0,
        converged: true,
        failure: None,
    };
    let mut stamp = 0;
    for &t in &times {
        if space.m_dbc > 0 {
            let g = problem.dirichlet_values(t);
            let shift: Vec<f64> = g.iter().zip(&dbc_ref).map(|(a, b)| a - b).collect();
            let dbc_coords = basis.dbc_basis.tr_matvec(&shift);
            coords[space.m..].copy_from_slice(&dbc_coords);
        }
        let mut records = Vec::new();
        let mut initial_norm = None;
        let mut stationary = false;
        let outcome = loop {
            let w = space.reconstruct(&coords);
            stamp += 1;
            let lin = match linearize(problem, &space, kind, &w, t, &config.precond, stamp) {
                Ok(l) => l,
                Err(e) => break Err(e),
            };
            let rnorm = norm2(&lin.rhs);
            let target = config.abs_tol.max(config.rel_tol * *initial_norm.get_or_insert(rnorm));
            if rnorm <= target || (stationary && rnorm <= config.stall_tol) {
                break Ok(());
            }
            if stationary || records.len() == config.max_iter {
                break Err(Error::NonConvergence {
                    iterations: records.len(),
                    residual: rnorm,
                });
            }
            let (delta, record) = match solve_increment(&lin, config, records.len() + 1) {
                Ok(v) => v,
                Err(e) => break Err(e),
            };
            let alpha = if config.backtracking {
                match backtrack(problem, &space, &coords, &delta, &lin.preconditioner, rnorm, t) {
                    Some(a) => a,
                    None => {
                        records.push(record);
                        break Err(Error::NonConvergence {
                            iterations: records.len(),
                            residual: rnorm,
                        });
                    }
                }
            } else {
                1.0
            };
            for (c, d) in coords.iter_mut().zip(&delta) {
                *c += alpha * d;
            }
            stationary = alpha * record.step_norm <= config.step_tol * norm2(&coords).max(f64::MIN_POSITIVE);
            records.push(record);
        };
        report.total_nonlinear_iterations += records.len();
        report.iterations.push(records);
        report.times.push(t);
        report.trajectory.push(RomState::from_all(&space, &coords));
        if let Err(e) = outcome {
            log::debug!("{kind} M={} failed at t = {t}: {e}", space.m);
            report.converged = false;
            report.failure = Some(format!("t = {t}: {e}"));
            break;
        }
    }
    report.wall_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Step length halving on the preconditioned residual, with the
/// preconditioner frozen at the linearisation point.
fn backtrack<P: FomProblem + ?Sized>(
    problem: &P,
    space: &RomSpace,
    coords: &[f64],
    delta: &[f64],
    precond: &BuiltPreconditioner,
    rnorm: f64,
    t: f64,
) -> Option<f64> {
    let mut alpha = 1.0;
    while alpha >= 1e-4 {
        let trial: Vec<f64> = coords.iter().zip(delta).map(|(c, d)| c + alpha * d).collect();
        if let Ok(r) = problem.residual(&space.reconstruct(&trial), t) {
            if norm2(&precond.apply(&r)) < rnorm {
                return Some(alpha);
            }
        }
        alpha *= 0.5;
    }
    None
}

/// `Φ (ΦᵀΦ)⁻¹ Φᵀ (−J⁻¹ r)`: the projection of the full-order Newton increment.
pub fn projected_increment(phi: &DenseMatrix, j: &SparseMatrix, r: &[f64]) -> Result<Vec<f64>> {
    if phi.rows() != j.rows() {
        return Err(Error::dims(j.rows(), phi.rows()));
    }
    let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
    let full = solve_direct(j, &neg_r)?;
    let z = Cholesky::factor(&phi.gram())?.solve(&phi.tr_matvec(&full));
    Ok(phi.matvec(&z))
}

/// `√(xᵀ Θ x)` with `Θ = JᵀMᵀMJ`, computed as `‖M J x‖₂`.
pub fn theta_norm(j: &SparseMatrix, p: &BuiltPreconditioner, x: &[f64]) -> f64 {
    norm2(&p.apply(&j.matvec(x)))
}

/// Global relative error `Σ‖wᵢ − w̃ᵢ‖ / Σ‖wᵢ‖`.
pub fn error_metric(fom: &[Vec<f64>], rom: &[Vec<f64>]) -> Result<f64> {
    if fom.len() != rom.len() {
        return Err(Error::dims(fom.len(), rom.len()));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (w, v) in fom.iter().zip(rom) {
        if w.len() != v.len() {
            return Err(Error::dims(w.len(), v.len()));
        }
        let d: Vec<f64> = w.iter().zip(v).map(|(a, b)| a - b).collect();
        num += norm2(&d);
        den += norm2(w);
    }
    if den == 0.0 {
        return Err(Error::InvalidInput("reference trajectory has zero norm".into()));
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_metric_basic_cases() {
        let w = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        assert_eq!(error_metric(&w, &w).unwrap(), 0.0);
        let z = vec![vec![0.0; 2]; 2];
        assert!((error_metric(&w, &z).unwrap() - 1.0).abs() < 1e-15);
        assert!(error_metric(&z, &z).is_err());
        assert!(error_metric(&w, &z[..1]).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(GaussNewtonConfig::default().validate().is_ok());
        let bad = GaussNewtonConfig {
            max_iter: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
