use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Partition of the extended state into free and Dirichlet-constrained dofs.
///
/// Constrained dofs are grouped into blocks; each block becomes one
/// blocking vector of the reduced basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DofLayout {
    total_dofs: usize,
    free_dofs: Vec<usize>,
    dbc_dofs: Vec<usize>,
    dbc_blocks: Vec<Vec<usize>>,
}

impl DofLayout {
    /// Builds a layout from Dirichlet blocks (global dof indices). Free dofs
    /// are everything else, in ascending order.
    pub fn new(total_dofs: usize, dbc_blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut owner = vec![None; total_dofs];
        for (b, block) in dbc_blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidInput(format!("Dirichlet block {b} is empty")));
            }
            for &d in block {
                if d >= total_dofs {
                    return Err(Error::InvalidInput(format!("dof {d} out of range")));
                }
                if owner[d].is_some() {
                    return Err(Error::InvalidInput(format!(
                        "dof {d} belongs to more than one Dirichlet block"
                    )));
                }
                owner[d] = Some(b);
            }
        }
        let free_dofs = (0..total_dofs).filter(|&d| owner[d].is_none()).collect();
        let dbc_dofs = (0..total_dofs).filter(|&d| owner[d].is_some()).collect();
        let dbc_blocks = dbc_blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        Ok(Self {
            total_dofs,
            free_dofs,
            dbc_dofs,
            dbc_blocks,
        })
    }

    /// Layout without constraints.
    pub fn unconstrained(total_dofs: usize) -> Self {
        Self {
            total_dofs,
            free_dofs: (0..total_dofs).collect(),
            dbc_dofs: Vec::new(),
            dbc_blocks: Vec::new(),
        }
    }

    pub fn total_dofs(&self) -> usize {
        self.total_dofs
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free_dofs
    }

    pub fn dbc_dofs(&self) -> &[usize] {
        &self.dbc_dofs
    }

    pub fn dbc_blocks(&self) -> &[Vec<usize>] {
        &self.dbc_blocks
    }

    pub fn num_free(&self) -> usize {
        self.free_dofs.len()
    }

    pub fn num_dbc(&self) -> usize {
        self.dbc_dofs.len()
    }

    /// Position of each constrained dof inside `dbc_dofs`, for every block.
    pub fn block_positions(&self) -> Vec<Vec<usize>> {
        self.dbc_blocks
            .iter()
            .map(|b| {
                b.iter()
                    .map(|d| self.dbc_dofs.binary_search(d).expect("block dof is constrained"))
                    .collect()
            })
            .collect()
    }

    pub fn gather_free(&self, full: &[f64]) -> Vec<f64> {
        self.free_dofs.iter().map(|&d| full[d]).collect()
    }

    pub fn gather_dbc(&self, full: &[f64]) -> Vec<f64> {
        self.dbc_dofs.iter().map(|&d| full[d]).collect()
    }

    /// Writes Dirichlet values (ordered like `dbc_dofs`) into a full state.
    pub fn impose_dbc(&self, full: &mut [f64], values: &[f64]) {
        debug_assert_eq!(values.len(), self.dbc_dofs.len());
        for (&d, &v) in self.dbc_dofs.iter().zip(values) {
            full[d] = v;
        }
    }

    /// Stable fingerprint of the partition, used to pair bases with problems.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.total_dofs as u64).to_le_bytes());
        for list in [&self.free_dofs, &self.dbc_dofs] {
            h.update((list.len() as u64).to_le_bytes());
            for &d in list {
                h.update((d as u64).to_le_bytes());
            }
        }
        for b in &self.dbc_blocks {
            h.update((b.len() as u64).to_le_bytes());
            for &d in b {
                h.update((d as u64).to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_covers_all_dofs() {
        let l = DofLayout::new(6, vec![vec![4, 0], vec![2]]).unwrap();
        assert_eq!(l.free_dofs(), &[1, 3, 5]);
        assert_eq!(l.dbc_dofs(), &[0, 2, 4]);
        assert_eq!(l.dbc_blocks()[0], vec![0, 4]);
        assert_eq!(l.block_positions(), vec![vec![0, 2], vec![1]]);
    }

    #[test]
    fn overlapping_and_empty_blocks_rejected() {
        assert!(DofLayout::new(3, vec![vec![0], vec![0]]).is_err());
        assert!(DofLayout::new(3, vec![vec![]]).is_err());
        assert!(DofLayout::new(3, vec![vec![5]]).is_err());
    }

    #[test]
    fn hash_distinguishes_partitions() {
        let a = DofLayout::new(4, vec![vec![0]]).unwrap();
        let b = DofLayout::new(4, vec![vec![1]]).unwrap();
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash(), a.clone().hash());
    }
}
