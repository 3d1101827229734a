//! GMRES and dense eigenvalue solver checks.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use transbem::formulations::{build, FormulationTag, OperatorBlocks};
use transbem::geometry::{presets, BoundaryMesh};
use transbem::krylov::{gmres, gmres_dense, gmres_with_basis, GmresOptions};
use transbem::linalg::{lu_solve, norm2, DenseComplexMatrix, LuDecomposition};
use transbem::spectra::{backward_error, eigenvalues};

fn random_matrix(n: usize, seed: u64) -> DenseComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DenseComplexMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn random_vector(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

fn circle_system(tag: FormulationTag, omega: f64, n: usize) -> transbem::formulations::BlockSystem {
    let scene = presets::circle(1.0, 2.0, omega, n).unwrap();
    let mesh = BoundaryMesh::from_scene(&scene).unwrap();
    let blocks = OperatorBlocks::assemble(&scene, &mesh).unwrap();
    build(tag.into(), &scene, &mesh, &blocks).unwrap()
}

/// Greedy nearest-neighbour pairing; returns the largest pair distance.
fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst = 0.0_f64;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

#[test]
fn gmres_matches_lu_on_random_system() {
    let a = random_matrix(50, 11);
    let b = random_vector(50, 12);
    let r = gmres_dense(&a, &b, GmresOptions { tol: 1e-12, max_iter: None });
    assert!(r.converged);
    let x = lu_solve(&a, &b).unwrap();
    let diff: Vec<Complex64> = r.solution.iter().zip(&x).map(|(p, q)| p - q).collect();
    assert!(norm2(&diff) / norm2(&x) <= 1e-7);
}

#[test]
fn gmres_matches_lu_on_circle_system() {
    let sys = circle_system(FormulationTag::CalderonBMBetaMinusAlpha, 5.0, 150);
    let r = gmres(&sys, GmresOptions::default());
    let x = lu_solve(&sys.matrix, &sys.rhs).unwrap();
    let diff: Vec<Complex64> = r.solution.iter().zip(&x).map(|(p, q)| p - q).collect();
    assert!(norm2(&diff) / norm2(&x) <= 1e-7);
    assert!((r.true_residual - r.final_residual()).abs() < 1e-9);
}

#[test]
fn unpreconditioned_krylov_space_contains_the_squared_one() {
    let sys = circle_system(FormulationTag::CalderonBMBetaMinusAlpha, 1.0, 100);
    let a2 = sys.matrix.matmul(&sys.matrix);
    for n in 2..=12 {
        let plain = gmres_dense(&sys.matrix, &sys.rhs, GmresOptions { tol: 0.0, max_iter: Some(2 * n - 2) });
        let squared = gmres_dense(&a2, &sys.rhs, GmresOptions { tol: 0.0, max_iter: Some(n - 1) });
        // Right preconditioning by A: x = A z solves A x = b when A² z = b.
        let x = sys.matrix.matvec(&squared.solution);
        let ax = sys.matrix.matvec(&x);
        let res: Vec<Complex64> = sys.rhs.iter().zip(&ax).map(|(b, y)| b - y).collect();
        let squared_res = norm2(&res) / norm2(&sys.rhs);
        assert!(plain.true_residual <= squared_res * (1.0 + 1e-8) + 1e-14, "n={n}: {} vs {squared_res}", plain.true_residual);
    }
}

#[test]
fn arnoldi_basis_is_orthonormal() {
    let sys = circle_system(FormulationTag::ConventionalBM, 5.0, 150);
    let (report, basis) = gmres_with_basis(&sys.matrix, &sys.rhs, GmresOptions { tol: 1e-13, max_iter: Some(300) });
    assert!(basis.len() > 50, "{} vectors", report.iterations);
    let mut worst = 0.0_f64;
    for (i, p) in basis.iter().enumerate() {
        for (j, q) in basis.iter().enumerate().skip(i) {
            let d: Complex64 = p.iter().zip(q).map(|(x, y)| x.conj() * y).sum();
            let expected = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((d - expected).norm());
        }
    }
    assert!(worst <= 1e-10, "{worst:e}");
}

#[test]
fn iterations_are_stable_across_thread_counts() {
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| gmres(&circle_system(FormulationTag::ConventionalBM, 5.0, 200), GmresOptions::default()))
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one.iterations, four.iterations);
    let diff: Vec<Complex64> = one.solution.iter().zip(&four.solution).map(|(p, q)| p - q).collect();
    assert!(norm2(&diff) <= 1e-13 * norm2(&one.solution));
}

#[test]
fn random_eigenvalues_match_trace_and_determinant() {
    let a = random_matrix(100, 3);
    let eig = eigenvalues(&a).unwrap();
    assert_eq!(eig.len(), 100);
    let sum: Complex64 = eig.iter().sum();
    let prod: Complex64 = eig.iter().product();
    let trace = a.trace();
    let det = LuDecomposition::new(&a).determinant();
    assert!((sum - trace).norm() <= 1e-6 * trace.norm().max(1.0), "{sum} vs {trace}");
    assert!((prod - det).norm() <= 1e-6 * det.norm(), "{prod} vs {det}");
}

#[test]
fn eigenpairs_have_small_backward_error() {
    let a = random_matrix(80, 5);
    let eig = eigenvalues(&a).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..20 {
        let lambda = eig[rng.gen_range(0..eig.len())];
        let e = backward_error(&a, lambda);
        assert!(e <= 1e-8, "{lambda}: {e:e}");
    }
}

#[test]
fn spectrum_of_square_is_invariant_under_permutation() {
    let sys = circle_system(FormulationTag::CalderonBMBeta1, 1.0, 50);
    let a2 = sys.matrix.matmul(&sys.matrix);
    let n = a2.rows();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let permuted = DenseComplexMatrix::from_fn(n, n, |i, j| a2[(perm[i], perm[j])]);
    let d = multiset_distance(&eigenvalues(&a2).unwrap(), &eigenvalues(&permuted).unwrap());
    assert!(d <= 1e-8, "{d:e}");
}

#[test]
fn eigenvalues_of_square_are_squared_eigenvalues() {
    let sys = circle_system(FormulationTag::CalderonBMBetaMinusAlpha, 1.0, 100);
    let squared: Vec<Complex64> = eigenvalues(&sys.matrix).unwrap().iter().map(|z| z * z).collect();
    let a2 = sys.matrix.matmul(&sys.matrix);
    let direct = eigenvalues(&a2).unwrap();
    let scale = direct.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let d = multiset_distance(&squared, &direct);
    assert!(d <= 1e-6 * scale, "{d:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn residual_history_is_monotone(seed in 0u64..1000, n in 5usize..40, shift in 0.0f64..4.0) {
        let a = random_matrix(n, seed).add_scaled(&DenseComplexMatrix::identity(n), Complex64::new(shift, 0.0));
        let b = random_vector(n, seed + 1);
        let opts = GmresOptions { tol: 1e-10, max_iter: Some(n / 2) };
        let r = gmres_dense(&a, &b, opts);
        for w in r.residual_history.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        prop_assert_eq!(r.converged, r.final_residual() <= opts.tol);
        prop_assert!(r.iterations <= n / 2);
    }
}
