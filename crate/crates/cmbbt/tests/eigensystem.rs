//! Products of corner-modified problems, singular-shift detection, the
//! eigenvalue search and generalized eigenspaces, verified against the dense
//! solver.

mod common;

use cmbbt::eigensystem::{self, SearchConfig};
use cmbbt::laurent::LaurentSymbol;
use cmbbt::linalg;
use cmbbt::oracle;
use common::{c, random_symmetric_spec, rng};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// The product of two corner-modified problems must equal the dense matrix
/// product.
#[test]
fn multiply_matches_dense_product() {
    let mut r = rng(41);
    for trial in 0..40 {
        let a = random_symmetric_spec(&mut r, 20, 2, 2);
        let b = {
            // Same d and N, independent shape.
            let symbol = common::random_symbol_shape(&mut r, 2, 2);
            let symbol = if symbol.d() == a.symbol().d() {
                symbol
            } else {
                common::random_symbol(&mut r, a.symbol().d(), symbol.p(), symbol.q())
            };
            cmbbt::bulk::ProblemSpec::new(symbol, a.n(), Vec::new()).unwrap()
        };
        let ab = eigensystem::multiply(&a, &b).unwrap();
        let dense_a = oracle::assemble_dense(&a).unwrap();
        let dense_b = oracle::assemble_dense(&b).unwrap();
        let dense_ab = oracle::assemble_dense(&ab).unwrap();
        let expect = &dense_a * &dense_b;
        let scale = linalg::fro_norm(&expect).max(1.0);
        let diff = linalg::fro_norm(&(&dense_ab - &expect)) / scale;
        assert!(diff < 1e-11, "trial {trial}: product deviation {diff}");
    }
}

/// Squaring a shifted problem through `power` matches the dense square.
#[test]
fn power_matches_dense_power() {
    let mut r = rng(42);
    for _ in 0..10 {
        let spec = random_symmetric_spec(&mut r, 24, 2, 1);
        let eps = common::random_complex(&mut r);
        for kappa in 1..=3usize {
            let p = eigensystem::power(&spec, eps, kappa).unwrap();
            let dense = oracle::assemble_dense(&spec.shifted(eps)).unwrap();
            let mut expect = dense.clone();
            for _ in 1..kappa {
                expect = &expect * &dense;
            }
            let got = oracle::assemble_dense(&p).unwrap();
            let scale = linalg::fro_norm(&expect).max(1.0);
            assert!(linalg::fro_norm(&(&got - &expect)) / scale < 1e-11);
        }
    }
}

/// Shifts that make the symbol singular are found exactly.
#[test]
fn singular_shifts_of_a_block_diagonal_symbol() {
    // A = diag(2 + w, 5): det(A - eps) = (2 + w - eps)(5 - eps) vanishes
    // identically only at eps = 5.
    let a0 = DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(5.0, 0.0)]);
    let a1 = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let s = LaurentSymbol::new(2, 0, vec![a0, a1]).unwrap();
    let sing = eigensystem::singular_epsilons(&s);
    assert_eq!(sing.len(), 1);
    assert!((sing[0] - c(5.0, 0.0)).norm() < 1e-8);
}

#[test]
fn regular_symbols_have_no_singular_shifts() {
    let mut r = rng(43);
    for _ in 0..20 {
        let s = common::random_symbol_shape(&mut r, 2, 2);
        assert!(eigensystem::singular_epsilons(&s).is_empty());
    }
}

/// Hermitian search reproduces the full dense spectrum of small chains.
#[test]
fn hermitian_search_matches_dense_spectrum() {
    let mut r = rng(44);
    for trial in 0..5 {
        let spec = common::random_hermitian_spec(&mut r, 10, 2, 1);
        let config = SearchConfig {
            oracle_check: true,
            ..SearchConfig::default()
        };
        let result = eigensystem::eigenvalues(&spec, &config).unwrap();
        assert!(
            result.incomplete.is_none(),
            "trial {trial}: {:?} (trace: {:?})",
            result.incomplete,
            result.trace
        );
        let total: usize = result.eigenvalues.iter().map(|e| e.algebraic).sum();
        assert_eq!(total, spec.n() * spec.symbol().d(), "trial {trial}");
    }
}

/// Eigenvectors returned by the search have small dense residuals.
#[test]
fn search_eigenvectors_have_small_residuals() {
    let mut r = rng(45);
    let spec = common::random_hermitian_spec(&mut r, 12, 2, 1);
    let result = eigensystem::eigenvalues(&spec, &SearchConfig::default()).unwrap();
    let mut checked = 0usize;
    for pair in &result.pairs {
        let Some(basis) = &pair.basis else { continue };
        let dense = oracle::assemble_dense(&spec.shifted(pair.epsilon)).unwrap();
        for v in &pair.vectors {
            let x = cmbbt::boundary::reconstruct(basis, &v.alpha);
            let res = (&dense * &x).norm() / x.norm().max(1e-300);
            assert!(res < 1e-6, "residual {res} at {}", pair.epsilon);
            checked += 1;
        }
    }
    assert!(checked >= 10, "only {checked} eigenvectors checked");
}

/// Generalized eigenspace dimensions per power match dense rank defects for
/// non-Hermitian problems with nontrivial Jordan structure.
#[test]
fn generalized_eigenspace_dims_match_dense_ranks() {
    // A scalar Jordan-like chain: symbol w (shift operator), open ends.
    // (C - 0) is nilpotent with a single Jordan block of size N.
    let s = LaurentSymbol::new(
        1,
        1,
        vec![DMatrix::from_row_slice(1, 1, &[c(1.0, 0.0)])],
    )
    .unwrap();
    let spec = cmbbt::bulk::ProblemSpec::new(s, 6, Vec::new()).unwrap();
    let space = eigensystem::generalized_eigenspace(&spec, Complex64::ZERO).unwrap();
    assert_eq!(space.kappa_max, 6);
    assert_eq!(space.dims, vec![1, 2, 3, 4, 5, 6]);
}

/// Random non-Hermitian problems: per-power kernel dimensions from the
/// escalation match the dense rank defects of the matrix powers.
#[test]
fn escalation_dims_match_dense_rank_defects() {
    let mut r = rng(46);
    let mut exercised = 0usize;
    for trial in 0..8 {
        let spec = random_symmetric_spec(&mut r, 12, 2, 1);
        let dense = oracle::assemble_dense(&spec).unwrap();
        let eig = oracle::dense_eigen(&dense).unwrap();
        let Some(raw) = eig.values.first().copied() else {
            continue;
        };
        // Dense eigenvalues of non-normal matrices can be off by far more
        // than the kernel tolerance; polish against the boundary matrix.
        let eps = eigensystem::refine_epsilon(&spec, raw);
        let space = match eigensystem::generalized_eigenspace(&spec, eps) {
            Ok(s) => s,
            Err(cmbbt::Error::SingularSymbol(_)) => continue,
            Err(e) => panic!("trial {trial}: {e}"),
        };
        let shifted = oracle::assemble_dense(&spec.shifted(eps)).unwrap();
        let mut power = DMatrix::<Complex64>::identity(shifted.nrows(), shifted.ncols());
        for (k, dim) in space.dims.iter().enumerate() {
            power = &power * &shifted;
            // Open tolerance: eps carries dense rounding error.
            let dense_dim = linalg::nullspace_with_factor(&power, 1e8).len();
            assert_eq!(
                *dim, dense_dim,
                "trial {trial}: power {} kernel dim {} vs dense {}",
                k + 1,
                dim,
                dense_dim
            );
        }
        exercised += 1;
    }
    assert!(exercised >= 4, "only {exercised} trials exercised");
}
