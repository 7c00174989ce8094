//! Level-based incomplete LU, ILU(k), without pivoting.
//!
//! Entries of `A` have level 0; a fill entry created through pivot `k` in
//! row `i` gets level `lev(i,k) + lev(k,j) + 1` and is kept only when the
//! level does not exceed the requested fill. The numeric phase is the usual
//! IKJ elimination restricted to the kept pattern.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::sparse::SparseMatrix;

#[derive(Clone, Debug)]
pub struct IluFactors {
    /// Strictly lower part of the unit-lower factor `L`.
    lower: SparseMatrix,
    /// Upper factor `U`, diagonal included.
    upper: SparseMatrix,
    fill: usize,
}

impl IluFactors {
    pub fn lower(&self) -> &SparseMatrix {
        &self.lower
    }

    pub fn upper(&self) -> &SparseMatrix {
        &self.upper
    }

    pub fn fill_level(&self) -> usize {
        self.fill
    }

    pub fn dim(&self) -> usize {
        self.upper.rows()
    }

    /// `U⁻¹ L⁻¹ v`.
    pub fn solve(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(v.len(), n);
        let mut y = v.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for (c, l) in self.lower.row(i) {
                s -= l * y[c];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            let mut d = 0.0;
            for (c, u) in self.upper.row(i) {
                if c == i {
                    d = u;
                } else {
                    s -= u * y[c];
                }
            }
            y[i] = s / d;
        }
        y
    }
}

pub fn ilu1_factor(a: &SparseMatrix) -> Result<IluFactors> {
    iluk_factor(a, 1)
}

pub fn iluk_factor(a: &SparseMatrix, fill: usize) -> Result<IluFactors> {
    if !a.is_square() {
        return Err(Error::dims("square matrix", format!("{}x{}", a.rows(), a.cols())));
    }
    let n = a.rows();
    // per-row factor storage in column order: (col -> (value, level))
    let mut u_rows: Vec<Vec<(usize, f64, usize)>> = Vec::with_capacity(n);
    let mut l_trip: Vec<(usize, usize, f64)> = Vec::new();
    let mut u_trip: Vec<(usize, usize, f64)> = Vec::new();

    for i in 0..n {
        let mut row: BTreeMap<usize, (f64, usize)> =
            a.row(i).map(|(c, v)| (c, (v, 0usize))).collect();
        if !row.contains_key(&i) {
            return Err(Error::ZeroPivot { row: i });
        }
        let mut cursor = 0usize;
        loop {
            let next = row.range(cursor..i).next().map(|(&k, &(v, l))| (k, v, l));
            let Some((k, aik, lev_ik)) = next else { break };
            cursor = k + 1;
            let ukk = u_rows[k][0].1;
            let mult = aik / ukk;
            row.insert(k, (mult, lev_ik));
            for &(j, ukj, lev_kj) in &u_rows[k][1..] {
                let lev = lev_ik + lev_kj + 1;
                match row.get_mut(&j) {
                    Some(entry) => {
                        entry.0 -= mult * ukj;
                        entry.1 = entry.1.min(lev);
                    }
                    None if lev <= fill => {
                        row.insert(j, (-mult * ukj, lev));
                    }
                    None => {}
                }
            }
        }
        let mut urow = Vec::new();
        for (&c, &(v, lev)) in &row {
            if c < i {
                l_trip.push((i, c, v));
            } else {
                if c == i && v == 0.0 {
                    return Err(Error::ZeroPivot { row: i });
                }
                u_trip.push((i, c, v));
                urow.push((c, v, lev));
            }
        }
        u_rows.push(urow);
    }
    Ok(IluFactors {
        lower: SparseMatrix::from_triplets(n, n, &l_trip),
        upper: SparseMatrix::from_triplets(n, n, &u_trip),
        fill,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense::DenseMatrix;

    #[test]
    fn diagonal_is_exact() {
        let a = SparseMatrix::from_dense(&DenseMatrix::diag(&[2.0, 5.0, -1.0]));
        let f = ilu1_factor(&a).unwrap();
        assert_eq!(f.solve(&[2.0, 5.0, -1.0]), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn dense_two_by_two_is_full_lu() {
        let a = SparseMatrix::from_dense(&DenseMatrix::from_rows(&[
            vec![4.0, 3.0],
            vec![6.0, 3.0],
        ]));
        let f = ilu1_factor(&a).unwrap();
        assert_eq!(f.lower().get(1, 0), 1.5);
        assert_eq!(f.upper().get(1, 1), 3.0 - 1.5 * 3.0);
        let x = f.solve(&[7.0, 9.0]);
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn missing_diagonal_is_a_pivot_error() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 1.0)]);
        assert!(matches!(ilu1_factor(&a), Err(Error::ZeroPivot { row: 0 })));
    }

    #[test]
    fn level_one_fill_is_kept_level_two_dropped() {
        // Arrow-free 5-point-like pattern: row 2 couples to 0, row 0 couples to 4.
        // Eliminating (2,0) fills (2,4) at level 1; eliminating through (2,4)... none further.
        let trip = vec![
            (0, 0, 4.0),
            (0, 3, -1.0),
            (1, 1, 4.0),
            (1, 2, -1.0),
            (2, 0, -1.0),
            (2, 2, 4.0),
            (3, 1, -1.0),
            (3, 3, 4.0),
        ];
        let a = SparseMatrix::from_triplets(4, 4, &trip);
        let f1 = ilu1_factor(&a).unwrap();
        let f0 = iluk_factor(&a, 0).unwrap();
        assert!(f1.upper().get(2, 3) != 0.0);
        assert_eq!(f0.upper().get(2, 3), 0.0);
    }
}
