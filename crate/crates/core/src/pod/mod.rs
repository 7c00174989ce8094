//! Snapshot matrices, POD trial bases and blocking vectors for Dirichlet dofs.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fom::DofLayout;
use crate::linalg::io::{read_matrix, write_matrix};
use crate::linalg::{thin_svd, DenseMatrix, SvdResult};

/// Reference-subtracted snapshots restricted to free dofs.
#[derive(Clone, Debug)]
pub struct SnapshotSet {
    pub free_snapshots: DenseMatrix,
    pub reference_state: Vec<f64>,
    pub layout: DofLayout,
    pub labels: Vec<String>,
}

/// How the POD reference state is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceChoice {
    #[default]
    Initial,
    Zero,
    Mean,
}

impl ReferenceChoice {
    pub fn reference(&self, initial: &[f64], states: &[Vec<f64>]) -> Vec<f64> {
        match self {
            Self::Initial => initial.to_vec(),
            Self::Zero => vec![0.0; initial.len()],
            Self::Mean => {
                let mut m = vec![0.0; initial.len()];
                for s in states {
                    for (mi, si) in m.iter_mut().zip(s) {
                        *mi += si;
                    }
                }
                let n = states.len().max(1) as f64;
                m.iter_mut().for_each(|v| *v /= n);
                m
            }
        }
    }
}

pub fn assemble_snapshots(states: &[Vec<f64>], layout: &DofLayout, reference: &[f64]) -> Result<SnapshotSet> {
    let labels = (0..states.len()).map(|j| format!("s{j}")).collect();
    assemble_labelled_snapshots(states, layout, reference, labels)
}

pub fn assemble_labelled_snapshots(
    states: &[Vec<f64>],
    layout: &DofLayout,
    reference: &[f64],
    labels: Vec<String>,
) -> Result<SnapshotSet> {
    let n = layout.total_dofs();
    if states.is_empty() {
        return Err(Error::InvalidInput("at least one snapshot is required".into()));
    }
    if labels.len() != states.len() {
        return Err(Error::dims(states.len(), format!("{} labels", labels.len())));
    }
    if reference.len() != n {
        return Err(Error::dims(n, reference.len()));
    }
    if let Some(s) = states.iter().find(|s| s.len() != n) {
        return Err(Error::dims(n, s.len()));
    }
    let free = layout.free_dofs();
    let free_snapshots = DenseMatrix::from_fn(free.len(), states.len(), |i, j| states[j][free[i]] - reference[free[i]]);
    Ok(SnapshotSet {
        free_snapshots,
        reference_state: reference.to_vec(),
        layout: layout.clone(),
        labels,
    })
}

impl SnapshotSet {
    pub fn len(&self) -> usize {
        self.free_snapshots.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Concatenates the columns of several sets that share layout and reference.
    pub fn pool(sets: &[SnapshotSet]) -> Result<SnapshotSet> {
        let first = sets
            .first()
            .ok_or_else(|| Error::InvalidInput("nothing to pool".into()))?;
        let mut data = Vec::new();
        let mut labels = Vec::new();
        for s in sets {
            if s.layout != first.layout {
                return Err(Error::LayoutMismatch {
                    expected: first.layout.hash(),
                    found: s.layout.hash(),
                });
            }
            if s.reference_state != first.reference_state {
                return Err(Error::InvalidInput("pooled snapshot sets use different references".into()));
            }
            data.extend_from_slice(s.free_snapshots.as_slice());
            labels.extend(s.labels.iter().cloned());
        }
        Ok(SnapshotSet {
            free_snapshots: DenseMatrix::from_col_major(first.free_snapshots.rows(), labels.len(), data)?,
            reference_state: first.reference_state.clone(),
            layout: first.layout.clone(),
            labels,
        })
    }
}

/// Trial basis over free dofs, blocking vectors over Dirichlet dofs, and
/// the data needed to reconstruct full states.
#[derive(Clone, Debug)]
pub struct ReducedBasis {
    pub trial: DenseMatrix,
    pub dbc_basis: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub reference_state: Vec<f64>,
    pub layout: DofLayout,
}

impl ReducedBasis {
    pub fn dim(&self) -> usize {
        self.trial.cols()
    }

    pub fn dbc_dim(&self) -> usize {
        self.dbc_basis.cols()
    }

    /// `Φ_M̄`, the block-diagonal basis scattered to global dof order.
    pub fn augmented(&self) -> Result<DenseMatrix> {
        augment_basis(&self.trial, &self.dbc_basis, &self.layout)
    }

    /// Keeps the leading `m` trial vectors.
    pub fn truncate(&self, m: usize) -> Result<ReducedBasis> {
        if m == 0 || m > self.dim() {
            return Err(Error::InvalidInput(format!("basis size {m} outside 1..={}", self.dim())));
        }
        Ok(ReducedBasis {
            trial: self.trial.leading_columns(m),
            ..self.clone()
        })
    }

    /// Writes `<stem>.trial.txt`, `<stem>.dbc.txt` and `<stem>.json`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<()> {
        fs::create_dir_all(dir)?;
        write_matrix(&dir.join(format!("{stem}.trial.txt")), &self.trial)?;
        write_matrix(&dir.join(format!("{stem}.dbc.txt")), &self.dbc_basis)?;
        let meta = BasisMetadata {
            m: self.dim(),
            m_dbc: self.dbc_dim(),
            layout_hash: self.layout.hash(),
            singular_values: self.singular_values.clone(),
            reference_state: self.reference_state.clone(),
            layout: self.layout.clone(),
        };
        fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&meta)?)?;
        Ok(())
    }

    /// Reads a basis written by [`ReducedBasis::save`], refusing it when the
    /// stored layout hash differs from `expected`.
    pub fn load(dir: &Path, stem: &str, expected: &DofLayout) -> Result<ReducedBasis> {
        let meta: BasisMetadata = serde_json::from_str(&fs::read_to_string(dir.join(format!("{stem}.json")))?)?;
        let hash = expected.hash();
        if meta.layout_hash != hash || meta.layout.hash() != hash {
            return Err(Error::LayoutMismatch {
                expected: hash,
                found: meta.layout_hash,
            });
        }
        let trial = read_matrix(&dir.join(format!("{stem}.trial.txt")))?;
        let dbc_basis = read_matrix(&dir.join(format!("{stem}.dbc.txt")))?;
        if trial.cols() != meta.m || dbc_basis.cols() != meta.m_dbc {
            return Err(Error::Parse("basis files disagree with metadata".into()));
        }
        Ok(ReducedBasis {
            trial,
            dbc_basis,
            singular_values: meta.singular_values,
            reference_state: meta.reference_state,
            layout: meta.layout,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct BasisMetadata {
    m: usize,
    m_dbc: usize,
    layout_hash: String,
    singular_values: Vec<f64>,
    reference_state: Vec<f64>,
    layout: DofLayout,
}

/// Thin SVD of the snapshot matrix, computed once and truncated per size.
pub fn pod_modes(snapshots: &SnapshotSet) -> Result<SvdResult> {
    thin_svd(&snapshots.free_snapshots)
}

/// Leading `m` left singular vectors plus the blocking basis of the layout.
pub fn compute_pod_basis(snapshots: &SnapshotSet, m: usize) -> Result<ReducedBasis> {
    basis_from_modes(&pod_modes(snapshots)?, snapshots, m)
}

pub fn basis_from_modes(modes: &SvdResult, snapshots: &SnapshotSet, m: usize) -> Result<ReducedBasis> {
    let limit = modes.rank_count();
    if m == 0 || m > limit {
        return Err(Error::InvalidInput(format!("basis size {m} outside 1..={limit}")));
    }
    let dbc_basis = if snapshots.layout.num_dbc() == 0 {
        DenseMatrix::zeros(0, 0)
    } else {
        blocking_basis(&snapshots.layout)?
    };
    Ok(ReducedBasis {
        trial: modes.left_vectors.leading_columns(m),
        dbc_basis,
        singular_values: modes.singular_values.clone(),
        reference_state: snapshots.reference_state.clone(),
        layout: snapshots.layout.clone(),
    })
}

/// One normalized indicator vector per Dirichlet block, rows in
/// `dbc_dofs` order.
pub fn blocking_basis(layout: &DofLayout) -> Result<DenseMatrix> {
    let blocks = layout.block_positions();
    if blocks.is_empty() {
        return Err(Error::InvalidInput("layout has no Dirichlet blocks".into()));
    }
    let mut phi = DenseMatrix::zeros(layout.num_dbc(), blocks.len());
    for (b, rows) in blocks.iter().enumerate() {
        if rows.is_empty() {
            return Err(Error::InvalidInput(format!("Dirichlet block {b} is empty")));
        }
        let v = 1.0 / (rows.len() as f64).sqrt();
        for &r in rows {
            phi[(r, b)] = v;
        }
    }
    Ok(phi)
}

/// Scatters `[Φ_M 0; 0 Φ_DBC]` into global dof order.
pub fn augment_basis(trial: &DenseMatrix, dbc_basis: &DenseMatrix, layout: &DofLayout) -> Result<DenseMatrix> {
    if trial.cols() == 0 {
        return Err(Error::InvalidInput("trial basis has no columns".into()));
    }
    if trial.rows() != layout.num_free() {
        return Err(Error::dims(layout.num_free(), trial.rows()));
    }
    if dbc_basis.cols() > 0 && dbc_basis.rows() != layout.num_dbc() {
        return Err(Error::dims(layout.num_dbc(), dbc_basis.rows()));
    }
    let (m, md) = (trial.cols(), dbc_basis.cols());
    let mut phi = DenseMatrix::zeros(layout.total_dofs(), m + md);
    for j in 0..m {
        for (i, &d) in layout.free_dofs().iter().enumerate() {
            phi[(d, j)] = trial[(i, j)];
        }
    }
    for j in 0..md {
        for (i, &d) in layout.dbc_dofs().iter().enumerate() {
            phi[(d, m + j)] = dbc_basis[(i, j)];
        }
    }
    Ok(phi)
}

/// Smallest `M` capturing `fraction` of the squared singular values.
pub fn energy_truncation(singular_values: &[f64], fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidInput(format!("energy fraction {fraction} outside (0, 1]")));
    }
    if singular_values.iter().any(|&s| !(s >= 0.0)) || singular_values.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidInput("singular values must be non-negative and non-increasing".into()));
    }
    let total: f64 = singular_values.iter().map(|s| s * s).sum();
    if total == 0.0 {
        return Err(Error::InvalidInput("all singular values are zero".into()));
    }
    let mut acc = 0.0;
    for (i, s) in singular_values.iter().enumerate() {
        acc += s * s;
        if acc >= fraction * total {
            return Ok(i + 1);
        }
    }
    Ok(singular_values.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_truncation_examples() {
        assert_eq!(energy_truncation(&[1.0, 0.0, 0.0], 0.99).unwrap(), 1);
        assert_eq!(energy_truncation(&[1.0, 1.0], 0.6).unwrap(), 2);
        assert_eq!(energy_truncation(&[3.0, 2.0, 1.0], 0.9).unwrap(), 2);
        assert!(energy_truncation(&[0.0, 0.0], 0.5).is_err());
        assert!(energy_truncation(&[1.0, 2.0], 0.5).is_err());
    }

    #[test]
    fn blocking_vectors() {
        let l = DofLayout::new(6, vec![vec![0]]).unwrap();
        assert_eq!(blocking_basis(&l).unwrap().as_slice(), &[1.0]);
        let l = DofLayout::new(6, vec![vec![0, 1, 2, 3]]).unwrap();
        assert!(blocking_basis(&l).unwrap().as_slice().iter().all(|&v| v == 0.5));
        assert!(blocking_basis(&DofLayout::unconstrained(3)).is_err());
    }

    #[test]
    fn zero_trial_basis_rejected() {
        let l = DofLayout::unconstrained(3);
        assert!(augment_basis(&DenseMatrix::zeros(3, 0), &DenseMatrix::zeros(0, 0), &l).is_err());
    }
}
