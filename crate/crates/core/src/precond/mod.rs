//! Approximate inverses `M ≈ J⁻¹` applied inside the LSPG residual norm.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::lu::refine;
use crate::linalg::{ilu1_factor, lu_factor, norm2, DenseMatrix, IluFactors, LuFactors, SparseMatrix};

pub const IDEAL_SIZE_CAP: usize = 5000;
pub const QUALITY_PROBES: usize = 8;
const EXACT_QUALITY_LIMIT: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PreconditionerKind {
    None,
    Jacobi,
    GaussSeidel,
    SymmetricGs,
    Ilu1,
    Ideal,
}

impl PreconditionerKind {
    pub const ALL: [PreconditionerKind; 6] = [
        Self::None,
        Self::Jacobi,
        Self::GaussSeidel,
        Self::SymmetricGs,
        Self::Ilu1,
        Self::Ideal,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Jacobi => "jacobi",
            Self::GaussSeidel => "gs",
            Self::SymmetricGs => "sgs",
            Self::Ilu1 => "ilu1",
            Self::Ideal => "ideal",
        }
    }
}

impl fmt::Display for PreconditionerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PreconditionerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown preconditioner '{s}' (none|jacobi|gs|sgs|ilu1|ideal)")))
    }
}

impl TryFrom<String> for PreconditionerKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PreconditionerKind> for String {
    fn from(k: PreconditionerKind) -> String {
        k.as_str().to_string()
    }
}

/// Sweep direction of the Gauss-Seidel preconditioner.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GsDirection {
    /// `(D + L)⁻¹`
    #[default]
    Forward,
    /// `(D + U)⁻¹`
    Backward,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PrecondOptions {
    pub gs_direction: GsDirection,
    pub ideal_size_cap: usize,
    /// One step of iterative refinement per Ideal application.
    pub ideal_refine: bool,
}

impl Default for PrecondOptions {
    fn default() -> Self {
        Self {
            gs_direction: GsDirection::Forward,
            ideal_size_cap: IDEAL_SIZE_CAP,
            ideal_refine: true,
        }
    }
}

#[derive(Clone, Debug)]
enum Factors {
    None,
    Jacobi(Vec<f64>),
    GaussSeidel(SparseMatrix, GsDirection),
    SymmetricGs(SparseMatrix),
    Ilu(IluFactors),
    Ideal { lu: LuFactors, matrix: Option<SparseMatrix> },
}

/// Preconditioner built from one Jacobian.
#[derive(Clone, Debug)]
pub struct BuiltPreconditioner {
    kind: PreconditionerKind,
    dim: usize,
    stamp: usize,
    factors: Factors,
}

pub fn build(kind: PreconditionerKind, j: &SparseMatrix) -> Result<BuiltPreconditioner> {
    build_with(kind, j, &PrecondOptions::default(), 0)
}

/// Builds `kind` from `j`; `stamp` labels the Gauss-Newton iteration.
pub fn build_with(
    kind: PreconditionerKind,
    j: &SparseMatrix,
    options: &PrecondOptions,
    stamp: usize,
) -> Result<BuiltPreconditioner> {
    if !j.is_square() {
        return Err(Error::dims("square matrix", format!("{}x{}", j.rows(), j.cols())));
    }
    let n = j.rows();
    let checked_diagonal = || -> Result<Vec<f64>> {
        let d = j.diagonal();
        match d.iter().position(|&v| v == 0.0 || !v.is_finite()) {
            Some(row) => Err(Error::ZeroPivot { row }),
            None => Ok(d),
        }
    };
    let factors = match kind {
        PreconditionerKind::None => Factors::None,
        PreconditionerKind::Jacobi => Factors::Jacobi(checked_diagonal()?),
        PreconditionerKind::GaussSeidel => {
            checked_diagonal()?;
            Factors::GaussSeidel(j.clone(), options.gs_direction)
        }
        PreconditionerKind::SymmetricGs => {
            checked_diagonal()?;
            Factors::SymmetricGs(j.clone())
        }
        PreconditionerKind::Ilu1 => Factors::Ilu(ilu1_factor(j)?),
        PreconditionerKind::Ideal => {
            if n > options.ideal_size_cap {
                return Err(Error::Preconditioner(format!(
                    "ideal preconditioner limited to {} dofs, system has {n}",
                    options.ideal_size_cap
                )));
            }
            Factors::Ideal {
                lu: lu_factor(j)?,
                matrix: options.ideal_refine.then(|| j.clone()),
            }
        }
    };
    Ok(BuiltPreconditioner {
        kind,
        dim: n,
        stamp,
        factors,
    })
}

impl BuiltPreconditioner {
    pub fn kind(&self) -> PreconditionerKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn stamp(&self) -> usize {
        self.stamp
    }

    /// `M v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim, "preconditioner applied to a vector of the wrong length");
        const CHECKED: &str = "diagonal checked at build";
        match &self.factors {
            Factors::None => v.to_vec(),
            Factors::Jacobi(diag) => v.iter().zip(diag).map(|(x, d)| x / d).collect(),
            Factors::GaussSeidel(j, GsDirection::Forward) => j.solve_lower(v).expect(CHECKED),
            Factors::GaussSeidel(j, GsDirection::Backward) => j.solve_upper(v).expect(CHECKED),
            Factors::SymmetricGs(j) => {
                let mut y = j.solve_lower(v).expect(CHECKED);
                for (yi, d) in y.iter_mut().zip(j.diagonal()) {
                    *yi *= d;
                }
                j.solve_upper(&y).expect(CHECKED)
            }
            Factors::Ilu(f) => f.solve(v),
            Factors::Ideal { lu, matrix: Some(a) } => refine(a, lu, v),
            Factors::Ideal { lu, matrix: None } => lu.solve(v),
        }
    }

    /// Column-wise `M A`.
    pub fn apply_to_matrix(&self, a: &DenseMatrix) -> DenseMatrix {
        assert_eq!(a.rows(), self.dim);
        let mut out = DenseMatrix::zeros(a.rows(), a.cols());
        for j in 0..a.cols() {
            let col = self.apply(a.col(j));
            out.col_mut(j).copy_from_slice(&col);
        }
        out
    }
}

/// `‖M J − I‖_F / ‖I‖_F`, exact up to 64 dofs and estimated from
/// Rademacher probes beyond.
pub fn quality_metric(p: &BuiltPreconditioner, j: &SparseMatrix) -> Result<f64> {
    if j.rows() <= EXACT_QUALITY_LIMIT {
        quality_metric_exact(p, j)
    } else {
        quality_metric_probed(p, j, QUALITY_PROBES, 0)
    }
}

pub fn quality_metric_exact(p: &BuiltPreconditioner, j: &SparseMatrix) -> Result<f64> {
    check_dims(p, j)?;
    let n = j.rows();
    let mut sum = 0.0;
    let mut e = vec![0.0; n];
    for c in 0..n {
        e[c] = 1.0;
        let mut y = p.apply(&j.matvec(&e));
        y[c] -= 1.0;
        sum += y.iter().map(|v| v * v).sum::<f64>();
        e[c] = 0.0;
    }
    Ok((sum / n as f64).sqrt())
}

/// Unbiased estimate of `‖MJ − I‖_F²` from `E‖(MJ − I) z‖² ` with ±1 probes.
pub fn quality_metric_probed(p: &BuiltPreconditioner, j: &SparseMatrix, probes: usize, seed: u64) -> Result<f64> {
    check_dims(p, j)?;
    if probes == 0 {
        return Err(Error::InvalidInput("need at least one probe".into()));
    }
    let n = j.rows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    for _ in 0..probes {
        let z: Vec<f64> = (0..n).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
        let y = p.apply(&j.matvec(&z));
        let r: Vec<f64> = y.iter().zip(&z).map(|(a, b)| a - b).collect();
        sum += norm2(&r).powi(2);
    }
    Ok((sum / probes as f64 / n as f64).sqrt())
}

fn check_dims(p: &BuiltPreconditioner, j: &SparseMatrix) -> Result<()> {
    if !j.is_square() || j.rows() != p.dim() {
        return Err(Error::dims(p.dim(), format!("{}x{}", j.rows(), j.cols())));
    }
    Ok(())
}
