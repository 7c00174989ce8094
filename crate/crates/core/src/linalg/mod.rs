//! Dense and sparse kernels shared by the full-order and reduced-order solvers.

pub mod cholesky;
pub mod dense;
pub mod ilu;
pub mod io;
pub mod krylov;
pub mod lu;
pub mod sparse;
pub mod svd;

pub use cholesky::{solve_dense_spd, solve_least_squares_qr, Cholesky};
pub use dense::{axpy, dot, norm2, DenseMatrix};
pub use ilu::{ilu1_factor, iluk_factor, IluFactors};
pub use krylov::{solve_iterative, KrylovMethod, KrylovOutcome};
pub use lu::{lu_factor, solve_direct, LuFactors};
pub use sparse::SparseMatrix;
pub use svd::{condition_number_2norm, thin_svd, SvdResult};
