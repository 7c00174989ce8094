mod common;

use common::*;
use lspg_rom::fom::{run_continuation, FomProblem, MeshSpec, ProblemSpec};
use lspg_rom::linalg::sparse::tridiagonal;
use lspg_rom::linalg::{DenseMatrix, SparseMatrix};
use lspg_rom::precond::*;
use lspg_rom::Error;
use proptest::prelude::*;

fn sparse(d: &DenseMatrix) -> SparseMatrix {
    SparseMatrix::from_dense(d)
}

/// Random strictly diagonally dominant matrix with a banded pattern.
fn dominant(n: usize, seed: u64) -> SparseMatrix {
    let r = random_matrix(n, n, seed);
    let d = DenseMatrix::from_fn(n, n, |i, j| {
        if i == j {
            4.0 + r[(i, j)].abs()
        } else if i.abs_diff(j) <= 2 {
            r[(i, j)]
        } else {
            0.0
        }
    });
    sparse(&d)
}

fn dense_split(j: &DenseMatrix) -> (DenseMatrix, DenseMatrix, DenseMatrix) {
    let n = j.rows();
    let d = DenseMatrix::from_fn(n, n, |a, b| if a == b { j[(a, b)] } else { 0.0 });
    let l = DenseMatrix::from_fn(n, n, |a, b| if a > b { j[(a, b)] } else { 0.0 });
    let u = DenseMatrix::from_fn(n, n, |a, b| if a < b { j[(a, b)] } else { 0.0 });
    (d, l, u)
}

fn add(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    DenseMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)] + b[(i, j)])
}

fn frobenius_gap_from_identity(m: &DenseMatrix) -> f64 {
    let n = m.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let e = m[(i, j)] - if i == j { 1.0 } else { 0.0 };
            s += e * e;
        }
    }
    (s / n as f64).sqrt()
}

#[test]
fn none_is_identity_and_jacobi_divides() {
    let j = sparse(&DenseMatrix::diag(&[2.0, 4.0, -5.0]));
    let v = vec![3.0, -1.0, 2.5];
    assert_eq!(build(PreconditionerKind::None, &j).unwrap().apply(&v), v);
    assert_eq!(build(PreconditionerKind::Jacobi, &j).unwrap().apply(&v), vec![1.5, -0.25, -0.5]);
    let p = build(PreconditionerKind::Jacobi, &sparse(&DenseMatrix::diag(&[2.0, 4.0]))).unwrap();
    assert_eq!(p.apply(&[2.0, 4.0]), vec![1.0, 1.0]);
}

#[test]
fn gauss_seidel_exact_on_triangular() {
    let lower = DenseMatrix::from_fn(5, 5, |i, j| if j < i { (i + 2 * j) as f64 * 0.25 } else if i == j { 2.0 } else { 0.0 });
    let p = build(PreconditionerKind::GaussSeidel, &sparse(&lower)).unwrap();
    let mj = p.apply_to_matrix(&lower);
    assert_eq!(mj, DenseMatrix::identity(5));

    let upper = lower.transpose();
    let opts = PrecondOptions {
        gs_direction: GsDirection::Backward,
        ..PrecondOptions::default()
    };
    let p = build_with(PreconditionerKind::GaussSeidel, &sparse(&upper), &opts, 0).unwrap();
    assert_eq!(p.apply_to_matrix(&upper), DenseMatrix::identity(5));
}

#[test]
fn ideal_inverts_random_matrix() {
    let mut a = random_matrix(6, 6, 31);
    for i in 0..6 {
        a[(i, i)] += 3.0;
    }
    let j = sparse(&a);
    let p = build(PreconditionerKind::Ideal, &j).unwrap();
    for seed in 0..5 {
        let x = random_vec(6, 40 + seed);
        assert!(rel_err(&p.apply(&j.matvec(&x)), &x) <= 1e-10);
    }
    assert!(quality_metric(&p, &j).unwrap() <= 1e-10);
}

#[test]
fn symmetric_gs_matches_dense_product() {
    let j = tridiagonal(6, -1.0, 2.5, -1.0);
    let jd = j.to_dense();
    let (d, l, u) = dense_split(&jd);
    let oracle = dense_inverse(&add(&d, &u)).matmul(&d).matmul(&dense_inverse(&add(&d, &l)));
    let p = build(PreconditionerKind::SymmetricGs, &j).unwrap();
    for seed in 0..4 {
        let v = random_vec(6, seed);
        let got = p.apply(&v);
        let want = oracle.matvec(&v);
        assert!(rel_err(&got, &want) <= 1e-12, "{}", rel_err(&got, &want));
    }
}

#[test]
fn forward_gs_matches_dense_lower_inverse() {
    let j = dominant(9, 3);
    let (d, l, _) = dense_split(&j.to_dense());
    let oracle = dense_inverse(&add(&d, &l));
    let p = build(PreconditionerKind::GaussSeidel, &j).unwrap();
    let v = random_vec(9, 2);
    assert!(rel_err(&p.apply(&v), &oracle.matvec(&v)) <= 1e-12);
}

#[test]
fn ilu1_is_exact_on_tridiagonal() {
    let j = tridiagonal(12, -1.0, 3.0, -1.5);
    let p = build(PreconditionerKind::Ilu1, &j).unwrap();
    assert!(quality_metric(&p, &j).unwrap() <= 1e-12);
}

#[test]
fn jacobi_equals_gs_on_diagonal() {
    let j = sparse(&DenseMatrix::diag(&random_vec(7, 8).iter().map(|v| v + 2.0).collect::<Vec<_>>()));
    let a = build(PreconditionerKind::Jacobi, &j).unwrap();
    let b = build(PreconditionerKind::GaussSeidel, &j).unwrap();
    let c = build(PreconditionerKind::SymmetricGs, &j).unwrap();
    let v = random_vec(7, 9);
    assert_eq!(a.apply(&v), b.apply(&v));
    assert!(rel_err(&c.apply(&v), &a.apply(&v)) <= 1e-15);
}

#[test]
fn zero_diagonal_is_rejected() {
    let j = sparse(&DenseMatrix::from_fn(3, 3, |i, k| if (i == k && i != 1) || i.abs_diff(k) == 1 { 1.0 } else { 0.0 }));
    for kind in [PreconditionerKind::Jacobi, PreconditionerKind::GaussSeidel, PreconditionerKind::SymmetricGs] {
        assert!(matches!(build(kind, &j), Err(Error::ZeroPivot { row: 1 })));
    }
    let singular = sparse(&DenseMatrix::from_fn(3, 3, |_, _| 1.0));
    assert!(build(PreconditionerKind::Ideal, &singular).is_err());
}

#[test]
fn ideal_respects_size_cap() {
    let j = tridiagonal(10, -1.0, 2.0, -1.0);
    let opts = PrecondOptions {
        ideal_size_cap: 5,
        ..PrecondOptions::default()
    };
    assert!(matches!(
        build_with(PreconditionerKind::Ideal, &j, &opts, 3),
        Err(Error::Preconditioner(_))
    ));
    let p = build_with(PreconditionerKind::Ideal, &j, &PrecondOptions::default(), 3).unwrap();
    assert_eq!(p.stamp(), 3);
    assert_eq!(p.dim(), 10);
}

#[test]
fn quality_of_none_on_scaled_identity() {
    let j = sparse(&DenseMatrix::diag(&[2.0; 5]));
    let p = build(PreconditionerKind::None, &j).unwrap();
    assert!((quality_metric(&p, &j).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn quality_matches_dense_oracle() {
    let j = dominant(20, 6);
    for kind in PreconditionerKind::ALL {
        let p = build(kind, &j).unwrap();
        let mj = p.apply_to_matrix(&j.to_dense());
        let oracle = frobenius_gap_from_identity(&mj);
        let q = quality_metric_exact(&p, &j).unwrap();
        assert!((q - oracle).abs() <= 1e-12 * oracle.max(1.0), "{kind}");
    }
}

#[test]
fn probed_quality_estimates_exact() {
    let j = dominant(80, 4);
    let p = build(PreconditionerKind::Jacobi, &j).unwrap();
    let exact = quality_metric_exact(&p, &j).unwrap();
    let probed = quality_metric_probed(&p, &j, 64, 1).unwrap();
    assert!((probed / exact - 1.0).abs() < 0.2, "{probed} vs {exact}");
    assert_eq!(quality_metric(&p, &j).unwrap(), quality_metric_probed(&p, &j, 8, 0).unwrap());
}

#[test]
fn quality_ordering_on_dominant_fixtures() {
    for seed in 0..5 {
        let j = dominant(30, 100 + seed);
        let q = |k| quality_metric(&build(k, &j).unwrap(), &j).unwrap();
        let (ideal, ilu, jacobi) = (q(PreconditionerKind::Ideal), q(PreconditionerKind::Ilu1), q(PreconditionerKind::Jacobi));
        assert!(ideal <= ilu && ilu <= jacobi, "seed {seed}: {ideal} {ilu} {jacobi}");
    }
}

#[test]
fn quality_on_thermomechanical_jacobian() {
    let mut spec = ProblemSpec::thermomechanical_beam();
    spec.mesh = MeshSpec {
        nx: 10,
        ny: 4,
        ..MeshSpec::default()
    };
    let p = spec.build().unwrap();
    assert!(p.layout().total_dofs() <= 200);
    let tr = run_continuation(&p, &spec.schedule, &spec.newton).unwrap();
    let t = *tr.times.last().unwrap();
    let j = p.jacobian(tr.states.last().unwrap(), t).unwrap();
    let jd = j.to_dense();
    let q: Vec<f64> = [PreconditionerKind::Jacobi, PreconditionerKind::GaussSeidel, PreconditionerKind::Ilu1]
        .iter()
        .map(|&k| frobenius_gap_from_identity(&build(k, &j).unwrap().apply_to_matrix(&jd)))
        .collect();
    println!("thermo-mechanical ||MJ - I||_F / sqrt(N): jacobi {:.4e}, gs {:.4e}, ilu1 {:.4e}", q[0], q[1], q[2]);
    assert!(q[0] >= q[1] && q[1] >= q[2], "{q:?}");
}

proptest! {
    #[test]
    fn application_is_linear_and_injective(seed in 0u64..200, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let j = dominant(15, seed);
        for kind in PreconditionerKind::ALL {
            let p = build(kind, &j).unwrap();
            let x = random_vec(15, seed + 1000);
            let y = random_vec(15, seed + 2000);
            let combo: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
            let lhs = p.apply(&combo);
            let px = p.apply(&x);
            let py = p.apply(&y);
            let rhs: Vec<f64> = px.iter().zip(&py).map(|(u, v)| a * u + b * v).collect();
            let scale = rhs.iter().chain(&lhs).map(|v| v.abs()).fold(1.0, f64::max);
            for (l, r) in lhs.iter().zip(&rhs) {
                prop_assert!((l - r).abs() <= 1e-12 * scale, "{}", kind);
            }
            let diff: Vec<f64> = x.iter().zip(&y).map(|(u, v)| u - v).collect();
            prop_assert!(p.apply(&diff).iter().any(|v| v.abs() > 1e-12));
        }
    }
}
