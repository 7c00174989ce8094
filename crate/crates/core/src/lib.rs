//! Projection-based model reduction with preconditioned least-squares
//! Petrov-Galerkin (LSPG) reduced-order models.
//!
//! The crate is organised along the offline/online workflow:
//!
//! - [`fom`]: full-order nonlinear finite-element problems with Dirichlet rows
//!   kept in an extended system, a globalised Newton solver and a
//!   quasi-static continuation driver.
//! - [`pod`]: snapshot assembly, thin-SVD POD bases and the blocking-vector
//!   basis for constrained dofs.
//! - [`precond`]: Jacobi, Gauss-Seidel, symmetric Gauss-Seidel, ILU(1) and
//!   ideal (exact inverse) preconditioners rebuilt at every Gauss-Newton
//!   iteration.
//! - [`lspg`]: the (preconditioned) Gauss-Newton LSPG driver and the
//!   projection identities it satisfies.
//! - [`harness`]: Latin-hypercube studies, error/conditioning tables and
//!   Pareto fronts.

pub mod error;
pub mod fom;
pub mod harness;
pub mod linalg;
pub mod lspg;
pub mod pod;
pub mod precond;

pub use error::{Error, Result};
