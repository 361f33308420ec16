//! Assembly of the boundary matrix from a bulk basis and a corner
//! modification, kernel extraction, and reconstruction of dense kernel
//! vectors from ansatz coefficients.

use crate::bulk::{boundary_rows, BulkBasis, ProblemSpec};
use crate::error::Result;
use crate::linalg;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// The boundary matrix `[B]_{bs}` of a corner-modified problem restricted to
/// the bulk solution space, with per-column normalization factors recorded so
/// kernel coefficients can be mapped back to the original basis.
#[derive(Debug, Clone)]
pub struct BoundaryMatrix {
    /// Column-normalized matrix (each column's largest entry has unit
    /// modulus, unless the column vanishes identically).
    pub mat: DMatrix<Complex64>,
    /// `c_s` such that the stored column equals `original column / c_s`.
    pub col_scales: Vec<f64>,
    /// Boundary site index `b` for each block row, ascending.
    pub row_blocks: Vec<usize>,
    /// Block size d.
    pub d: usize,
}

/// Work counter for the assembly loop: number of d x d block-times-vector
/// products performed. Independent of N for symmetrical corner
/// modifications.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AssembleStats {
    pub block_products: u64,
}

/// A compact eigenvector or generalized eigenvector: coefficients over a
/// bulk basis, already mapped back to unnormalized basis coordinates.
#[derive(Debug, Clone)]
pub struct AnsatzVector {
    pub epsilon: Complex64,
    pub kappa: usize,
    pub alpha: DVector<Complex64>,
}

/// Assemble the boundary matrix of `spec - epsilon` over `basis` (which must
/// have been built for the same shift).
pub fn assemble(spec: &ProblemSpec, basis: &BulkBasis, epsilon: Complex64) -> BoundaryMatrix {
    assemble_with_stats(spec, basis, epsilon).0
}

/// As [`assemble`], also reporting the block-product work count.
pub fn assemble_with_stats(
    spec: &ProblemSpec,
    basis: &BulkBasis,
    epsilon: Complex64,
) -> (BoundaryMatrix, AssembleStats) {
    let shifted = spec.symbol().shift(epsilon);
    let d = shifted.d();
    let n = spec.n();
    let rows = boundary_rows(n, shifted.p_prime(), shifted.q_prime());
    let n_b = basis.len();
    let mut mat = DMatrix::<Complex64>::zeros(rows.len() * d, n_b);
    let mut stats = AssembleStats::default();

    // Columns are scaled by the basis element's magnitude on the boundary
    // window (not by the column's own largest entry: a basis element that
    // already solves the boundary equation produces a near-zero column, and
    // that information must survive normalization).
    let mut col_scales = vec![0.0_f64; n_b];
    for s_idx in 0..n_b {
        for (bi, &b) in rows.iter().enumerate() {
            let mut acc = DVector::<Complex64>::zeros(d);
            let r_lo = shifted.p().max(-(b as i64) + 1);
            let r_hi = shifted.q().min(n as i64 - b as i64);
            for r in r_lo..=r_hi {
                let j = (b as i64 + r) as usize;
                let psi = basis.element_block(s_idx, j);
                col_scales[s_idx] = col_scales[s_idx].max(psi.norm());
                acc += shifted.coeff(r) * psi;
                stats.block_products += 1;
            }
            for e in spec.corner() {
                if e.row == b {
                    let psi = basis.element_block(s_idx, e.col);
                    col_scales[s_idx] = col_scales[s_idx].max(psi.norm());
                    acc += &e.block * psi;
                    stats.block_products += 1;
                }
            }
            mat.view_mut((bi * d, s_idx), (d, 1)).copy_from(&acc);
        }
    }

    for s in 0..n_b {
        // Clamp to the element's intrinsic magnitude: an element localized
        // away from the boundary window (an anchored extended solution or a
        // far-edge finite-support solution) has a near-zero window magnitude,
        // and dividing by it would blow a genuinely tiny column up to O(1).
        col_scales[s] = col_scales[s].max(basis.element_magnitude(s));
        if col_scales[s] <= 0.0 {
            col_scales[s] = 1.0;
        }
        let inv = Complex64::from(1.0 / col_scales[s]);
        for v in mat.column_mut(s).iter_mut() {
            *v *= inv;
        }
    }

    (
        BoundaryMatrix {
            mat,
            col_scales,
            row_blocks: rows,
            d,
        },
        stats,
    )
}

impl BoundaryMatrix {
    pub fn n_rows_blocks(&self) -> usize {
        self.row_blocks.len()
    }

    pub fn n_cols(&self) -> usize {
        self.mat.ncols()
    }

    /// Determinant of the normalized matrix (square case only).
    pub fn det(&self) -> Option<Complex64> {
        if self.mat.nrows() == self.mat.ncols() && self.mat.nrows() > 0 {
            Some(self.mat.clone().determinant())
        } else {
            None
        }
    }

    /// Smallest singular value of the normalized matrix.
    pub fn smallest_singular_value(&self) -> f64 {
        linalg::smallest_singular_value(&self.mat)
    }

    /// Kernel of the boundary matrix in original (unnormalized) basis
    /// coordinates: each returned alpha satisfies `B alpha = 0`.
    pub fn kernel(&self) -> Vec<DVector<Complex64>> {
        self.kernel_with_factor(linalg::rank_factor())
    }

    /// As [`BoundaryMatrix::kernel`] with an explicit tolerance factor.
    ///
    /// The columns are normalized against O(1) basis-element magnitudes, so
    /// the matrix's natural scale is the symbol norm regardless of how small
    /// its entries are; the cutoff is therefore floored at an absolute value
    /// rather than taken purely relative to the largest singular value
    /// (which collapses when every column is a near-kernel residual).
    pub fn kernel_with_factor(&self, factor: f64) -> Vec<DVector<Complex64>> {
        let dim = self.mat.nrows().max(self.mat.ncols()).max(1) as f64;
        let cutoff = dim * f64::EPSILON * factor;
        linalg::nullspace_with_cutoff(&self.mat, cutoff)
            .into_iter()
            .map(|beta| self.unnormalize(&beta))
            .collect()
    }

    /// Map normalized-column coefficients back to basis coordinates.
    pub fn unnormalize(&self, beta: &DVector<Complex64>) -> DVector<Complex64> {
        DVector::from_iterator(
            beta.nrows(),
            beta
                .iter()
                .enumerate()
                .map(|(s, c)| c / Complex64::from(self.col_scales[s])),
        )
    }

    /// Kernel dimension at the shared tolerance.
    pub fn kernel_dim(&self) -> usize {
        self.n_cols() - linalg::rank(&self.mat)
    }
}

/// Site block `j` of the ansatz vector `sum_s alpha_s psi_s`.
pub fn ansatz_block(basis: &BulkBasis, alpha: &DVector<Complex64>, j: usize) -> DVector<Complex64> {
    let d = basis.d();
    let mut acc = DVector::<Complex64>::zeros(d);
    for s in 0..basis.len() {
        if alpha[s] != Complex64::ZERO {
            acc += basis.element_block(s, j) * alpha[s];
        }
    }
    acc
}

/// Dense length-Nd expansion of the ansatz vector `sum_s alpha_s psi_s`.
/// O(N) time and memory; use [`ansatz_block`] to stream site blocks instead.
pub fn reconstruct(basis: &BulkBasis, alpha: &DVector<Complex64>) -> DVector<Complex64> {
    let d = basis.d();
    let n = basis.n();
    let mut out = DVector::<Complex64>::zeros(n * d);
    for j in 1..=n {
        let b = ansatz_block(basis, alpha, j);
        out.rows_mut((j - 1) * d, d).copy_from(&b);
    }
    out
}

/// Kernel of `spec - epsilon` through the bulk/boundary pipeline, returned
/// as ansatz coefficient vectors over the basis (also returned).
pub fn kernel_pipeline(
    spec: &ProblemSpec,
    epsilon: Complex64,
) -> Result<(BulkBasis, BoundaryMatrix, Vec<AnsatzVector>)> {
    let basis = crate::bulk::bulk_basis(spec, epsilon)?;
    let bmat = assemble(spec, &basis, epsilon);
    let vectors = bmat
        .kernel()
        .into_iter()
        .map(|alpha| AnsatzVector {
            epsilon,
            kappa: 1,
            alpha,
        })
        .collect();
    Ok((basis, bmat, vectors))
}
