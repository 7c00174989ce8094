mod common;

use common::*;
use lspg_rom::linalg::sparse::tridiagonal;
use lspg_rom::linalg::{
    condition_number_2norm, ilu1_factor, lu_factor, solve_dense_spd, solve_direct,
    solve_iterative, thin_svd, DenseMatrix, KrylovMethod, SparseMatrix,
};
use proptest::prelude::*;

#[test]
fn svd_matches_eigenvalues_of_gram() {
    let a = random_matrix(5, 3, 11);
    let svd = thin_svd(&a).unwrap();
    let ev = symmetric_eigenvalues(&a.transpose().matmul(&a));
    for (s, l) in svd.singular_values.iter().zip(ev) {
        assert!((s - l.sqrt()).abs() < 1e-10, "{s} vs {}", l.sqrt());
    }
}

#[test]
fn spd_solve_multiplies_back() {
    let g = random_matrix(6, 6, 3);
    let mut a = g.transpose().matmul(&g);
    for i in 0..6 {
        a[(i, i)] += 1.0;
    }
    let b = random_vec(6, 4);
    let x = solve_dense_spd(&a, &b).unwrap();
    assert!(rel_err(&a.matvec(&x), &b) < 1e-10);
    assert!(rel_err(&a.matvec(&x), &b) < 1e-12);
}

#[test]
fn laplacian_iterative_matches_dense_direct() {
    let a = tridiagonal(10, -1.0, 2.0, -1.0);
    let b = vec![1.0; 10];
    let oracle = dense_solve(&a.to_dense(), &b);
    for m in [KrylovMethod::Cg, KrylovMethod::Gmres] {
        let out = solve_iterative(&a, &b, m, 1e-12, 200).unwrap();
        assert!(out.converged);
        for (x, y) in out.solution.iter().zip(&oracle) {
            assert!((x - y).abs() < 1e-8);
        }
    }
}

#[test]
fn gmres_restarts_on_nonsymmetric_system() {
    // convection-diffusion stencil, 80 unknowns forces at least two restarts
    let a = tridiagonal(80, -1.3, 2.5, -0.7);
    let b = random_vec(80, 9);
    let out = solve_iterative(&a, &b, KrylovMethod::Gmres, 1e-10, 1000).unwrap();
    assert!(out.converged);
    assert!(rel_err(&a.matvec(&out.solution), &b) <= 1e-10);
}

#[test]
fn lu_random_multiply_back() {
    let a = random_matrix(6, 6, 21);
    let sa = SparseMatrix::from_dense(&a);
    let b = random_vec(6, 22);
    let x = lu_factor(&sa).unwrap().solve(&b);
    assert!(rel_err(&a.matvec(&x), &b) < 1e-10);
}

#[test]
fn condition_number_matches_inverse_norm_oracle() {
    let a = random_matrix(4, 4, 5);
    let oracle = spectral_norm(&a) * spectral_norm(&dense_inverse(&a));
    let c = condition_number_2norm(&a).unwrap();
    assert!((c - oracle).abs() / oracle < 1e-8, "{c} vs {oracle}");
}

/// Doolittle LU without pivoting, dense.
fn doolittle(a: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let n = a.rows();
    let mut l = DenseMatrix::identity(n);
    let mut u = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let s: f64 = (0..i).map(|k| l[(i, k)] * u[(k, j)]).sum();
            u[(i, j)] = a[(i, j)] - s;
        }
        for j in (i + 1)..n {
            let s: f64 = (0..i).map(|k| l[(j, k)] * u[(k, i)]).sum();
            l[(j, i)] = (a[(j, i)] - s) / u[(i, i)];
        }
    }
    (l, u)
}

#[test]
fn ilu1_on_tridiagonal_matches_full_lu() {
    let a = tridiagonal(8, -1.0, 3.0, -1.5);
    let f = ilu1_factor(&a).unwrap();
    let (l, u) = doolittle(&a.to_dense());
    for i in 0..8 {
        for j in 0..8 {
            if i > j {
                assert!((f.lower().get(i, j) - l[(i, j)]).abs() < 1e-14);
            } else {
                assert!((f.upper().get(i, j) - u[(i, j)]).abs() < 1e-14);
            }
        }
    }
    for j in 0..8 {
        let col: Vec<f64> = (0..8).map(|i| a.get(i, j)).collect();
        let e = f.solve(&col);
        for (i, v) in e.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            assert!((v - target).abs() < 1e-13);
        }
    }
}

#[test]
fn ilu1_drops_only_high_level_fill() {
    // 2D 5-point Laplacian on a 4x4 grid: full LU fills the whole band, ILU(1)
    // keeps one extra diagonal layer. Differences vs the exact LU must sit in
    // positions outside the level-1 pattern or be caused by them.
    let n = 4;
    let mut trip = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let r = j * n + i;
            trip.push((r, r, 4.0));
            if i > 0 {
                trip.push((r, r - 1, -1.0));
            }
            if i + 1 < n {
                trip.push((r, r + 1, -1.0));
            }
            if j > 0 {
                trip.push((r, r - n, -1.0));
            }
            if j + 1 < n {
                trip.push((r, r + n, -1.0));
            }
        }
    }
    let a = SparseMatrix::from_triplets(16, 16, &trip);
    let f = ilu1_factor(&a).unwrap();
    let (l, u) = doolittle(&a.to_dense());
    // first row of U has no fill: identical to exact LU
    for j in 0..16 {
        assert!((f.upper().get(0, j) - u[(0, j)]).abs() < 1e-14);
    }
    // pattern of L+U contains A's pattern and is strictly smaller than full LU's
    let ilu_nnz = f.lower().nnz() + f.upper().nnz();
    let full_nnz = (0..16)
        .flat_map(|i| (0..16).map(move |j| (i, j)))
        .filter(|&(i, j)| if i > j { l[(i, j)] != 0.0 } else { u[(i, j)] != 0.0 })
        .count();
    assert!(ilu_nnz >= a.nnz() && ilu_nnz < full_nnz);
    // approximate inverse is reasonable: ‖M A - I‖ small relative to ‖I‖
    let mut worst: f64 = 0.0;
    for j in 0..16 {
        let col: Vec<f64> = (0..16).map(|i| a.get(i, j)).collect();
        let e = f.solve(&col);
        for (i, v) in e.iter().enumerate() {
            let t = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((v - t).abs());
        }
    }
    assert!(worst < 0.2);
}

fn matrix_strategy(max_r: usize, max_c: usize) -> impl Strategy<Value = DenseMatrix> {
    (1..=max_r, 1..=max_c).prop_flat_map(|(r, c)| {
        prop::collection::vec(-10.0f64..10.0, r * c)
            .prop_map(move |d| DenseMatrix::from_col_major(r, c, d).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn svd_reconstructs_and_is_orthonormal(a in matrix_strategy(9, 9)) {
        let s = thin_svd(&a).unwrap();
        let fro = a.frobenius_norm().max(f64::MIN_POSITIVE);
        prop_assert!(s.reconstruct().sub(&a).frobenius_norm() <= 1e-12 * fro);
        let k = s.singular_values.len();
        prop_assert!(s.left_vectors.gram().sub(&DenseMatrix::identity(k)).frobenius_norm() <= 1e-10);
        prop_assert!(s.right_vectors.gram().sub(&DenseMatrix::identity(k)).frobenius_norm() <= 1e-10);
        prop_assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(s.singular_values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn truncation_error_equals_tail_energy(a in matrix_strategy(10, 7)) {
        let s = thin_svd(&a).unwrap();
        let total: f64 = s.singular_values.iter().map(|v| v * v).sum();
        for m in 1..=s.singular_values.len() {
            let u = s.left_vectors.leading_columns(m);
            let proj = u.matmul(&u.tr_matmul(&a));
            let lhs = a.sub(&proj).frobenius_norm().powi(2);
            let rhs: f64 = s.singular_values[m..].iter().map(|v| v * v).sum();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * total.max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn iterative_and_direct_agree(n in 3usize..40, d in 2.1f64..5.0, seed in 0u64..1000) {
        let a = tridiagonal(n, -1.0, d, -1.0);
        let b = random_vec(n, seed);
        let direct = solve_direct(&a, &b).unwrap();
        let tol = 1e-10;
        for m in [KrylovMethod::Cg, KrylovMethod::Gmres] {
            let it = solve_iterative(&a, &b, m, tol, 500).unwrap();
            prop_assert!(it.converged);
            let scale = direct.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let cond_bound = (d + 2.0) / (d - 2.0);
            for (x, y) in it.solution.iter().zip(&direct) {
                prop_assert!((x - y).abs() <= 10.0 * tol * cond_bound * scale.max(1.0));
            }
        }
    }

    #[test]
    fn ilu1_without_extra_fill_is_exact(n in 2usize..30, d in 2.5f64..6.0, c in -1.0f64..1.0) {
        // tridiagonal: exact LU has no fill outside the pattern
        let a = tridiagonal(n, -1.0, d, c);
        let f = ilu1_factor(&a).unwrap();
        let lu = lu_factor(&a).unwrap();
        let b = random_vec(n, n as u64);
        let x1 = f.solve(&b);
        let x2 = lu.solve(&b);
        for (u, v) in x1.iter().zip(&x2) {
            prop_assert!((u - v).abs() <= 1e-12 * (1.0 + v.abs()));
        }
    }
}
