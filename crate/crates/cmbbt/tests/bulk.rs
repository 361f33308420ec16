//! Bulk solution space: extended solutions, finite-support solutions and the
//! completeness of the combined basis, checked against dense nullspaces of
//! the bulk-row matrix.

mod common;

use cmbbt::bulk::{self, falling_factorial, ProblemSpec, Side};
use cmbbt::laurent::LaurentSymbol;
use cmbbt::linalg;
use cmbbt::oracle;
use common::{c, random_symbol_shape, rng};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

#[test]
fn falling_factorial_values() {
    assert_eq!(falling_factorial(5, 0), 1.0);
    assert_eq!(falling_factorial(5, 1), 5.0);
    assert_eq!(falling_factorial(5, 2), 20.0);
    assert_eq!(falling_factorial(3, 3), 6.0);
    assert_eq!(falling_factorial(2, 3), 0.0);
}

/// Scalar shift symbol A(w) = w - z0: the unique extended solution is the
/// geometric sequence z0^j.
#[test]
fn scalar_shift_has_geometric_extended_solution() {
    let z0 = c(0.5, 0.25);
    let s = LaurentSymbol::new(
        1,
        0,
        vec![
            DMatrix::from_row_slice(1, 1, &[-z0]),
            DMatrix::from_row_slice(1, 1, &[c(1.0, 0.0)]),
        ],
    )
    .unwrap();
    let sols = bulk::extended_solutions(&s).unwrap();
    assert_eq!(sols.len(), 1);
    assert!((sols[0].z - z0).norm() < 1e-12);
    let b3 = sols[0].block(3)[0];
    let b4 = sols[0].block(4)[0];
    assert!((b4 / b3 - z0).norm() < 1e-10);
}

/// A double root gives one geometric and one linearly modulated solution;
/// both must annihilate the bulk rows.
#[test]
fn double_root_gives_polynomially_modulated_solutions() {
    // (w - z0)^2 = w^2 - 2 z0 w + z0^2, scalar.
    let z0 = c(0.6, 0.0);
    let s = LaurentSymbol::new(
        1,
        0,
        vec![
            DMatrix::from_row_slice(1, 1, &[z0 * z0]),
            DMatrix::from_row_slice(1, 1, &[-2.0 * z0]),
            DMatrix::from_row_slice(1, 1, &[c(1.0, 0.0)]),
        ],
    )
    .unwrap();
    let sols = bulk::extended_solutions(&s).unwrap();
    assert_eq!(sols.len(), 2);
    let n = 12;
    let spec = ProblemSpec::new(s, n, Vec::new()).unwrap();
    let bulk_rows = oracle::assemble_bulk_rows(&spec).unwrap();
    for sol in &sols {
        let mut x = DVector::<Complex64>::zeros(n);
        for j in 1..=n {
            x[j - 1] = sol.block(j)[0];
        }
        let res = (&bulk_rows * &x).norm() / x.norm();
        assert!(res < 1e-10, "bulk residual {res}");
    }
}

#[test]
fn edge_matrix_shapes_and_band_structure() {
    let mut r = rng(21);
    let s = random_symbol_shape(&mut r, 2, 2);
    let sigma = 3;
    let d = s.d();
    let km = bulk::build_k(&s, Side::Left, sigma);
    let kp = bulk::build_k(&s, Side::Right, sigma);
    assert_eq!(km.nrows(), d * sigma);
    assert_eq!(kp.ncols(), d * sigma);
    // K- is block upper triangular with the lower principal coefficient on
    // the diagonal; K+ lower triangular with the upper one.
    for j in 0..sigma {
        assert!(
            common::max_abs_diff(
                &km.view((j * d, j * d), (d, d)).into_owned(),
                &s.principal_lower()
            ) < 1e-15
        );
        assert!(
            common::max_abs_diff(
                &kp.view((j * d, j * d), (d, d)).into_owned(),
                &s.principal_upper()
            ) < 1e-15
        );
    }
    for j in 0..sigma {
        for jp in (j + 1)..sigma {
            assert!(km.view((jp * d, j * d), (d, d)).iter().all(|z| z.norm() == 0.0));
            assert!(kp.view((j * d, jp * d), (d, d)).iter().all(|z| z.norm() == 0.0));
        }
    }
}

/// Random regular symbols: the bulk basis always has exactly d*tau elements
/// and every element annihilates the bulk rows of the dense matrix.
#[test]
fn bulk_basis_is_complete_and_annihilates_bulk_rows() {
    let mut r = rng(22);
    for trial in 0..40 {
        let symbol = random_symbol_shape(&mut r, 2, 2);
        let d = symbol.d();
        let tau = symbol.tau() as usize;
        let n = 2 * d * tau + tau + 3;
        let spec = ProblemSpec::new(symbol, n, Vec::new()).unwrap();
        let basis = match bulk::bulk_basis(&spec, Complex64::ZERO) {
            Ok(b) => b,
            Err(e) => panic!("trial {trial}: {e}"),
        };
        assert_eq!(basis.len(), d * tau, "trial {trial}");
        let bulk_rows = oracle::assemble_bulk_rows(&spec).unwrap();
        for s_idx in 0..basis.len() {
            let x = basis.expand(s_idx);
            let res = (&bulk_rows * &x).norm() / x.norm().max(1e-300);
            assert!(res < 1e-7, "trial {trial} element {s_idx}: residual {res}");
        }
    }
}

/// The span of the computed basis matches the dense nullspace of the
/// bulk-row matrix (principal angle check).
#[test]
fn bulk_basis_spans_the_dense_bulk_kernel() {
    let mut r = rng(23);
    for trial in 0..15 {
        let symbol = random_symbol_shape(&mut r, 2, 2);
        let d = symbol.d();
        let tau = symbol.tau() as usize;
        let n = 2 * d * tau + tau + 3;
        let spec = ProblemSpec::new(symbol, n, Vec::new()).unwrap();
        let basis = bulk::bulk_basis(&spec, Complex64::ZERO).unwrap();
        let computed: Vec<DVector<Complex64>> =
            (0..basis.len()).map(|s| basis.expand(s)).collect();
        let bulk_rows = oracle::assemble_bulk_rows(&spec).unwrap();
        let dense = linalg::nullspace(&bulk_rows);
        let gap = linalg::subspace_gap(&computed, &dense);
        match gap {
            Some(g) => assert!(g < 1e-6, "trial {trial}: gap {g}"),
            None => panic!(
                "trial {trial}: dimension mismatch {} vs {}",
                computed.len(),
                dense.len()
            ),
        }
    }
}

/// A symbol with a singular principal coefficient has finite-support
/// solutions; they must genuinely annihilate the bulk rows, and the combined
/// basis must still be complete.
#[test]
fn finite_support_solutions_annihilate_bulk_rows() {
    // Band (0, 1) with a_0 singular: det = w (1 + w) up to scale, so one
    // root is at the origin and sigma = 1.
    let a0 = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    let a1 = DMatrix::<Complex64>::identity(2, 2);
    let s = LaurentSymbol::new(2, 0, vec![a0, a1]).unwrap();
    let sigma = bulk::emergent_support(&s).unwrap();
    assert_eq!(sigma, 1);
    let n = 10;
    let (left, right) = bulk::finite_support_solutions(&s, n).unwrap();
    let spec = ProblemSpec::new(s, n, Vec::new()).unwrap();
    let bulk_rows = oracle::assemble_bulk_rows(&spec).unwrap();
    assert_eq!(left.len() + right.len(), 1);
    for sol in left.iter().chain(right.iter()) {
        let mut x = DVector::<Complex64>::zeros(2 * n);
        for j in 1..=n {
            x.rows_mut((j - 1) * 2, 2).copy_from(&sol.block(j, n));
        }
        let res = (&bulk_rows * &x).norm() / x.norm();
        assert!(res < 1e-12, "finite-support residual {res}");
    }
    // Full basis: 1 extended + 1 finite-support = d * tau.
    let basis = bulk::bulk_basis(&spec, Complex64::ZERO).unwrap();
    assert_eq!(basis.len(), 2);
    let dense = linalg::nullspace(&bulk_rows);
    let computed: Vec<DVector<Complex64>> = (0..basis.len()).map(|s| basis.expand(s)).collect();
    assert!(linalg::subspace_gap(&computed, &dense).unwrap() < 1e-8);
}

/// Shrinking N below 2 sigma + tau must be rejected rather than produce an
/// interfering finite-support basis.
#[test]
fn too_small_n_is_rejected_when_finite_support_exists() {
    // Upper-triangular single-band symbol: a_1 is nilpotent, so det has
    // fewer roots than d*tau and sigma > 0.
    let a1 = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let a0 = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    let am1 = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]);
    let s = LaurentSymbol::new(2, -1, vec![am1, a0, a1]).unwrap();
    let sigma = bulk::emergent_support(&s).unwrap();
    assert!(sigma > 0);
    let small = 2 * sigma + s.tau() as usize - 1;
    assert!(bulk::finite_support_solutions(&s, small).is_err());
    assert!(bulk::finite_support_solutions(&s, small + 1).is_ok());
}

/// A singular shift must be reported as such instead of yielding a basis.
#[test]
fn singular_shift_is_detected() {
    // Diagonal symbol diag(w, w): det = w^2 but A - 0 is regular; instead
    // take A = diag(w + 1, 1): shifting by 1 kills the second channel's
    // determinant factor identically? No: det(A - 1) = w * 0 = 0.
    let a0 = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    let a1 = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let s = LaurentSymbol::new(2, 0, vec![a0, a1]).unwrap();
    let spec = ProblemSpec::new(s, 8, Vec::new()).unwrap();
    let err = bulk::bulk_basis(&spec, c(1.0, 0.0)).unwrap_err();
    assert!(matches!(err, cmbbt::Error::SingularSymbol(_)));
}

/// Corner entries outside the boundary rows are invalid.
#[test]
fn corner_rows_are_validated() {
    let mut r = rng(24);
    let symbol = random_symbol_shape(&mut r, 2, 1);
    let d = symbol.d();
    let bad = bulk::CornerEntry {
        row: 5,
        col: 1,
        block: DMatrix::zeros(d, d),
    };
    // Row 5 of a 12-site problem with bandwidth 1 is deep in the bulk.
    let res = ProblemSpec::new(symbol, 12, vec![bad]);
    assert!(res.is_err());
}
