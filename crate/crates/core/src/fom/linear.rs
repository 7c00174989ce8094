use crate::error::{Error, Result};
use crate::fom::{DofLayout, FomProblem};
use crate::linalg::SparseMatrix;

/// Affine test system: free rows `A w − (b₀ + t b₁)`, Dirichlet rows
/// `w − (g₀ + t g₁)`.
#[derive(Clone, Debug)]
pub struct LinearProblem {
    layout: DofLayout,
    matrix: SparseMatrix,
    rhs: [Vec<f64>; 2],
    dirichlet: [Vec<f64>; 2],
    initial: Vec<f64>,
}

impl LinearProblem {
    pub fn new(matrix: SparseMatrix, rhs: [Vec<f64>; 2], layout: DofLayout, dirichlet: [Vec<f64>; 2]) -> Result<Self> {
        let n = layout.total_dofs();
        if !matrix.is_square() || matrix.rows() != n {
            return Err(Error::dims(format!("{n}x{n}"), format!("{}x{}", matrix.rows(), matrix.cols())));
        }
        if rhs.iter().any(|b| b.len() != n) {
            return Err(Error::dims(n, "right-hand side length"));
        }
        if dirichlet.iter().any(|g| g.len() != layout.num_dbc()) {
            return Err(Error::dims(layout.num_dbc(), "Dirichlet data length"));
        }
        let mut initial = vec![0.0; n];
        layout.impose_dbc(&mut initial, &dirichlet[0]);
        let mut jac = Vec::new();
        let dbc = layout.dbc_dofs();
        for r in 0..n {
            if dbc.binary_search(&r).is_ok() {
                jac.push((r, r, 1.0));
            } else {
                jac.extend(matrix.row(r).map(|(c, v)| (r, c, v)));
            }
        }
        Ok(Self {
            matrix: SparseMatrix::from_triplets(n, n, &jac),
            layout,
            rhs,
            dirichlet,
            initial,
        })
    }

    /// Unconstrained system `A w = b₀ + t b₁`.
    pub fn unconstrained(matrix: SparseMatrix, b0: Vec<f64>, b1: Vec<f64>) -> Result<Self> {
        let layout = DofLayout::unconstrained(matrix.rows());
        Self::new(matrix, [b0, b1], layout, [Vec::new(), Vec::new()])
    }

    pub fn with_initial_state(mut self, initial: Vec<f64>) -> Result<Self> {
        if initial.len() != self.layout.total_dofs() {
            return Err(Error::dims(self.layout.total_dofs(), initial.len()));
        }
        self.initial = initial;
        Ok(self)
    }
}

impl FomProblem for LinearProblem {
    fn layout(&self) -> &DofLayout {
        &self.layout
    }

    fn initial_state(&self) -> Vec<f64> {
        self.initial.clone()
    }

    fn dirichlet_values(&self, t: f64) -> Vec<f64> {
        self.dirichlet[0]
            .iter()
            .zip(&self.dirichlet[1])
            .map(|(a, b)| a + t * b)
            .collect()
    }

    fn residual(&self, state: &[f64], t: f64) -> Result<Vec<f64>> {
        if state.len() != self.layout.total_dofs() {
            return Err(Error::dims(self.layout.total_dofs(), state.len()));
        }
        let mut r = self.matrix.matvec(state);
        for (i, ri) in r.iter_mut().enumerate() {
            *ri -= self.rhs[0][i] + t * self.rhs[1][i];
        }
        let g = self.dirichlet_values(t);
        for (&d, gd) in self.layout.dbc_dofs().iter().zip(g) {
            r[d] = state[d] - gd;
        }
        Ok(r)
    }

    fn jacobian_full(&self, _state: &[f64], _t: f64) -> Result<SparseMatrix> {
        Ok(self.matrix.clone())
    }
}
