//! Dense brute-force reference routines for verification at desk scale:
//! full assembly of a problem, nullspaces, ranks, determinants and
//! eigendecompositions.

use crate::bulk::ProblemSpec;
use crate::error::{Error, Result};
use crate::linalg;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Default cap on the dense dimension N*d.
pub const DEFAULT_CAP: usize = 4096;

fn check_cap(dim: usize, cap: usize) -> Result<()> {
    if dim > cap {
        Err(Error::OracleCapExceeded { actual: dim, cap })
    } else {
        Ok(())
    }
}

/// Assemble the full Nd x Nd matrix: Toeplitz fill from the symbol plus the
/// corner entries.
pub fn assemble_dense(spec: &ProblemSpec) -> Result<DMatrix<Complex64>> {
    assemble_dense_capped(spec, DEFAULT_CAP)
}

pub fn assemble_dense_capped(spec: &ProblemSpec, cap: usize) -> Result<DMatrix<Complex64>> {
    let d = spec.symbol().d();
    let n = spec.n();
    check_cap(n * d, cap)?;
    let mut m = DMatrix::<Complex64>::zeros(n * d, n * d);
    for i in 1..=n as i64 {
        for r in spec.symbol().p()..=spec.symbol().q() {
            let j = i + r;
            if j >= 1 && j <= n as i64 {
                m.view_mut(((i - 1) as usize * d, (j - 1) as usize * d), (d, d))
                    .copy_from(&spec.symbol().coeff(r));
            }
        }
    }
    for e in spec.corner() {
        let mut view = m.view_mut(((e.row - 1) * d, (e.col - 1) * d), (d, d));
        view += &e.block;
    }
    Ok(m)
}

/// Dense matrix of the bulk rows only: rows `1-p' .. N-q'` of `A_N` (no
/// corner, which by definition vanishes there).
pub fn assemble_bulk_rows(spec: &ProblemSpec) -> Result<DMatrix<Complex64>> {
    let d = spec.symbol().d();
    let n = spec.n();
    check_cap(n * d, DEFAULT_CAP)?;
    let full = assemble_dense(&ProblemSpec::new(
        spec.symbol().clone(),
        n,
        Vec::new(),
    )?)?;
    let lo = (1 - spec.symbol().p_prime()) as usize;
    let hi = n - spec.symbol().q_prime() as usize;
    if hi < lo {
        return Ok(DMatrix::zeros(0, n * d));
    }
    let nrows = (hi - lo + 1) * d;
    Ok(full.view(((lo - 1) * d, 0), (nrows, n * d)).into_owned())
}

/// Orthonormal nullspace basis at the shared rank tolerance.
pub fn dense_nullspace(m: &DMatrix<Complex64>) -> Vec<DVector<Complex64>> {
    linalg::nullspace(m)
}

/// Numerical rank at the shared tolerance.
pub fn dense_rank(m: &DMatrix<Complex64>) -> usize {
    linalg::rank(m)
}

/// LU determinant.
pub fn dense_det(m: &DMatrix<Complex64>) -> Complex64 {
    m.clone().determinant()
}

/// Eigenvalues (always) and eigenvectors (per distinct eigenvalue cluster,
/// via nullspace extraction) of a dense matrix.
pub struct DenseEigen {
    pub values: Vec<Complex64>,
    /// One (value, vectors) entry per distinct eigenvalue.
    pub spaces: Vec<(Complex64, Vec<DVector<Complex64>>)>,
}

/// Dense eigendecomposition. Hermitian inputs use the symmetric
/// eigensolver; general inputs use a Schur factorization for the values and
/// shifted nullspaces for the vectors.
pub fn dense_eigen(m: &DMatrix<Complex64>) -> Result<DenseEigen> {
    check_cap(m.nrows(), DEFAULT_CAP)?;
    let hermitian = linalg::fro_norm(&(m - m.adjoint())) <= 1e-12 * linalg::fro_norm(m).max(1e-300);
    if hermitian {
        let se = m.clone().symmetric_eigen();
        let values: Vec<Complex64> = se
            .eigenvalues
            .iter()
            .map(|v| Complex64::from(*v))
            .collect();
        let mut spaces: Vec<(Complex64, Vec<DVector<Complex64>>)> = Vec::new();
        let scale = values.iter().map(|v| v.norm()).fold(1e-300, f64::max);
        for (i, v) in values.iter().enumerate() {
            let vec = se.eigenvectors.column(i).into_owned();
            match spaces
                .iter_mut()
                .find(|(w, _)| (*w - *v).norm() <= 1e-10 * scale)
            {
                Some((_, list)) => list.push(vec),
                None => spaces.push((*v, vec![vec])),
            }
        }
        return Ok(DenseEigen { values, spaces });
    }
    // The Schur form of a complex matrix is upper triangular, so its
    // diagonal carries the eigenvalues.
    let (_, t) = m.clone().schur().unpack();
    let values: Vec<Complex64> = t.diagonal().iter().copied().collect();
    let scale = values.iter().map(|v| v.norm()).fold(1e-300, f64::max);
    let mut distinct: Vec<(Complex64, usize)> = Vec::new();
    for v in &values {
        match distinct
            .iter_mut()
            .find(|(w, _)| (*w - *v).norm() <= 1e-8 * scale)
        {
            Some((_, count)) => *count += 1,
            None => distinct.push((*v, 1)),
        }
    }
    let mut spaces = Vec::new();
    for (v, _) in &distinct {
        let shifted = m - DMatrix::from_diagonal_element(m.nrows(), m.ncols(), *v);
        // Eigenvalues from the Schur form carry O(eps * ||M||) error, so the
        // shifted matrix is only nearly singular; open up the tolerance.
        let vecs = linalg::nullspace_with_factor(&shifted, 1e8);
        spaces.push((*v, vecs));
    }
    Ok(DenseEigen { values, spaces })
}

/// Apply `spec` to a dense vector without materializing the full matrix:
/// `y_i = sum_r a_r x_{i+r} + corner terms`. O(N) time.
pub fn apply_spec(spec: &ProblemSpec, x: &DVector<Complex64>) -> DVector<Complex64> {
    let d = spec.symbol().d();
    let n = spec.n();
    let mut y = DVector::<Complex64>::zeros(n * d);
    for i in 1..=n as i64 {
        let mut acc = DVector::<Complex64>::zeros(d);
        for r in spec.symbol().p()..=spec.symbol().q() {
            let j = i + r;
            if j >= 1 && j <= n as i64 {
                let xj = x.rows((j - 1) as usize * d, d);
                acc += spec.symbol().coeff(r) * xj;
            }
        }
        y.rows_mut((i - 1) as usize * d, d).copy_from(&acc);
    }
    for e in spec.corner() {
        let xj = x.rows((e.col - 1) * d, d).into_owned();
        let mut view = y.rows_mut((e.row - 1) * d, d);
        view += &e.block * xj;
    }
    y
}
