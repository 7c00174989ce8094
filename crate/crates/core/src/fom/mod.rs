//! Full-order models on the extended state, Dirichlet rows included.
//!
//! Constrained rows carry `w_DBC − g(t)` with a unit diagonal, so a Newton
//! step sets them directly and the free rows see them as data.

mod check;
mod continuation;
mod io;
mod layout;
mod linear;
mod material;
mod mesh;
mod newton;
mod solid;

use std::collections::BTreeMap;

use crate::error::Result;
use crate::linalg::SparseMatrix;

pub use check::{jacobian_check, jacobian_check_block};
pub use continuation::{run_continuation, ContinuationSchedule, Trajectory};
pub use io::{read_snapshots, write_snapshots, SnapshotMetadata};
pub use layout::DofLayout;
pub use linear::LinearProblem;
pub use material::{bulk_modulus, shear_modulus, NeoHookean, StressPoint};
pub use mesh::{Edge, MeshSpec, QuadMesh};
pub use newton::{newton_solve, LineSearch, NewtonConfig, NewtonOutcome};
pub use solid::{
    mechanical_problem, thermomechanical_problem, Component, DirichletSpec, LoadSpec, MaterialBlock, Materials,
    Physics, ProblemSpec, Ramp, SolidProblem,
};

/// Nonlinear system `r̄(w̄, t) = 0` over the extended state.
pub trait FomProblem: Send + Sync {
    fn layout(&self) -> &DofLayout;

    /// State at `t_start`; also the default POD reference.
    fn initial_state(&self) -> Vec<f64>;

    /// Prescribed values `g(t)`, ordered like `layout().dbc_dofs()`.
    fn dirichlet_values(&self, t: f64) -> Vec<f64>;

    fn residual(&self, state: &[f64], t: f64) -> Result<Vec<f64>>;

    /// Exact derivative of the residual: Dirichlet rows are unit rows, but
    /// free rows keep their coupling to Dirichlet columns.
    fn jacobian_full(&self, state: &[f64], t: f64) -> Result<SparseMatrix>;

    /// Decoupled Jacobian with the off-diagonal Dirichlet columns removed,
    /// valid whenever the state satisfies the boundary conditions.
    fn jacobian(&self, state: &[f64], t: f64) -> Result<SparseMatrix> {
        Ok(self
            .jacobian_full(state, t)?
            .drop_columns_off_diagonal(self.layout().dbc_dofs()))
    }

    /// Named parameter values, for metadata.
    fn parameters(&self) -> BTreeMap<String, f64> {
        BTreeMap::new()
    }
}

impl<P: FomProblem + ?Sized> FomProblem for &P {
    fn layout(&self) -> &DofLayout {
        (**self).layout()
    }
    fn initial_state(&self) -> Vec<f64> {
        (**self).initial_state()
    }
    fn dirichlet_values(&self, t: f64) -> Vec<f64> {
        (**self).dirichlet_values(t)
    }
    fn residual(&self, state: &[f64], t: f64) -> Result<Vec<f64>> {
        (**self).residual(state, t)
    }
    fn jacobian_full(&self, state: &[f64], t: f64) -> Result<SparseMatrix> {
        (**self).jacobian_full(state, t)
    }
    fn jacobian(&self, state: &[f64], t: f64) -> Result<SparseMatrix> {
        (**self).jacobian(state, t)
    }
    fn parameters(&self) -> BTreeMap<String, f64> {
        (**self).parameters()
    }
}
