//! Shared numerical linear-algebra helpers: rank-revealing SVD with a single
//! tolerance policy, nullspaces, and subspace comparison.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Default multiplier applied on top of the machine-epsilon rank threshold.
pub const DEFAULT_RANK_FACTOR: f64 = 1e3;

/// Rank-decision factor, overridable through the `CMBBT_TOL` environment
/// variable. The effective singular-value cutoff for an m x n matrix is
/// `max(m, n) * eps * sigma_max * factor`.
pub fn rank_factor() -> f64 {
    std::env::var("CMBBT_TOL")
        .ok()
        .and_then(|s| s.parse::<f64>().ok())
        .filter(|v| v.is_finite() && *v > 0.0)
        .unwrap_or(DEFAULT_RANK_FACTOR)
}

/// Singular-value cutoff below which directions count as numerically null.
pub fn rank_tolerance(nrows: usize, ncols: usize, sigma_max: f64) -> f64 {
    let dim = nrows.max(ncols).max(1) as f64;
    dim * f64::EPSILON * sigma_max * rank_factor()
}

fn svd_of(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    // A thin SVD of a wide matrix does not expose the full right singular
    // basis, so pad with zero rows up to square before factorizing.
    let padded = if m.nrows() < m.ncols() {
        let mut p = DMatrix::<Complex64>::zeros(m.ncols(), m.ncols());
        p.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("SVD with v_t requested");
    (svd.singular_values.iter().copied().collect(), v_t)
}

/// Numerical rank at the shared tolerance policy.
pub fn rank(m: &DMatrix<Complex64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let (sv, _) = svd_of(m);
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    if smax == 0.0 {
        return 0;
    }
    let tol = rank_tolerance(m.nrows(), m.ncols(), smax);
    sv.iter().filter(|s| **s > tol).count()
}

/// Orthonormal basis of the right nullspace at the shared tolerance policy.
pub fn nullspace(m: &DMatrix<Complex64>) -> Vec<DVector<Complex64>> {
    nullspace_with_factor(m, rank_factor())
}

/// Nullspace with an explicit tolerance factor (see [`rank_tolerance`]).
pub fn nullspace_with_factor(
    m: &DMatrix<Complex64>,
    factor: f64,
) -> Vec<DVector<Complex64>> {
    let n = m.ncols();
    if n == 0 {
        return Vec::new();
    }
    if m.nrows() == 0 {
        return (0..n)
            .map(|k| DVector::from_fn(n, |i, _| if i == k { Complex64::ONE } else { Complex64::ZERO }))
            .collect();
    }
    let (sv, v_t) = svd_of(m);
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    let dim = m.nrows().max(n) as f64;
    let tol = dim * f64::EPSILON * smax * factor;
    let mut basis = Vec::new();
    for (i, s) in sv.iter().enumerate() {
        if *s <= tol {
            basis.push(v_t.row(i).adjoint());
        }
    }
    // Rows of v_t beyond the singular-value count (possible after padding)
    // also span null directions.
    for i in sv.len()..v_t.nrows() {
        basis.push(v_t.row(i).adjoint());
    }
    basis
}

/// Nullspace with an absolute singular-value cutoff instead of the relative
/// policy (used by the eigenvalue search, where the acceptance threshold on
/// the normalized boundary matrix is an absolute quantity).
pub fn nullspace_with_cutoff(
    m: &DMatrix<Complex64>,
    cutoff: f64,
) -> Vec<DVector<Complex64>> {
    let n = m.ncols();
    if n == 0 {
        return Vec::new();
    }
    let (sv, v_t) = svd_of(m);
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    let tol = cutoff.max(rank_tolerance(m.nrows(), n, smax));
    let mut basis = Vec::new();
    for (i, s) in sv.iter().enumerate() {
        if *s <= tol {
            basis.push(v_t.row(i).adjoint());
        }
    }
    for i in sv.len()..v_t.nrows() {
        basis.push(v_t.row(i).adjoint());
    }
    basis
}

/// Smallest singular value, or 0 for an empty matrix.
pub fn smallest_singular_value(m: &DMatrix<Complex64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let (sv, _) = svd_of(m);
    // Padding adds spurious exact zeros only when the matrix is wide; a wide
    // matrix genuinely has a vanishing smallest singular value in the
    // right-nullspace sense, so taking the minimum is correct either way.
    sv.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Orthonormalize the columns spanned by `vectors` (modified Gram-Schmidt
/// with re-orthogonalization; drops numerically dependent directions).
pub fn orthonormalize(vectors: &[DVector<Complex64>]) -> Vec<DVector<Complex64>> {
    let mut basis: Vec<DVector<Complex64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = b.dotc(&w);
                w -= b * c;
            }
        }
        let norm = w.norm();
        if norm > 1e-12 * v.norm().max(1.0) {
            basis.push(w / Complex64::from(norm));
        }
    }
    basis
}

/// Sine of the largest principal angle between the spans of two sets of
/// vectors of equal dimension. Returns `None` if the spans have different
/// dimensions (they cannot be equal subspaces).
pub fn subspace_gap(
    a: &[DVector<Complex64>],
    b: &[DVector<Complex64>],
) -> Option<f64> {
    let qa = orthonormalize(a);
    let qb = orthonormalize(b);
    if qa.len() != qb.len() {
        return None;
    }
    if qa.is_empty() {
        return Some(0.0);
    }
    let k = qa.len();
    let mut overlap = DMatrix::<Complex64>::zeros(k, k);
    for (i, u) in qa.iter().enumerate() {
        for (j, v) in qb.iter().enumerate() {
            overlap[(i, j)] = u.dotc(v);
        }
    }
    let svd = overlap.svd(false, false);
    let smin = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
        .min(1.0);
    Some((1.0 - smin * smin).max(0.0).sqrt())
}

/// Frobenius norm of a complex matrix.
pub fn fro_norm(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn nullspace_of_rank_one_matrix() {
        // rows proportional: rank 1, nullspace dim 1 in C^2
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]);
        let ns = nullspace(&m);
        assert_eq!(ns.len(), 1);
        assert!((&m * &ns[0]).norm() < 1e-12);
    }

    #[test]
    fn nullspace_of_wide_matrix_found_despite_thin_svd() {
        let m = DMatrix::from_row_slice(1, 3, &[c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.5)]);
        let ns = nullspace(&m);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!((&m * v).norm() < 1e-12);
        }
    }

    #[test]
    fn subspace_gap_detects_equality_and_difference() {
        let e1 = DVector::from_column_slice(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let e2 = DVector::from_column_slice(&[c(0.0, 0.0), c(1.0, 0.0)]);
        let mix = DVector::from_column_slice(&[c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(subspace_gap(&[e1.clone()], &[e1.clone()]).unwrap() < 1e-14);
        let gap = subspace_gap(&[e1.clone()], &[mix]).unwrap();
        assert!((gap - (0.5f64).sqrt()).abs() < 1e-12);
        assert!(subspace_gap(&[e1.clone()], &[e1, e2]).is_none());
    }
}
