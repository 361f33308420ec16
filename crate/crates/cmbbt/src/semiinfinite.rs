//! Bound states of semi-infinite problems: square-summable kernel vectors
//! built from decaying extended solutions and left-edge finite-support
//! solutions, constrained by the left boundary rows only.

use crate::bulk::{self, CornerEntry, ExtendedSolution, FiniteSupportSolution, Side};
use crate::error::{Error, Result};
use crate::laurent::LaurentSymbol;
use crate::linalg;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Roots this close to the unit circle are neither decaying nor growing;
/// they are excluded from the bound-state basis and reported separately.
pub const MARGINAL_BAND: f64 = 1e-8;

/// A semi-infinite corner-modified problem: sites `1, 2, 3, ...` with a
/// banded block-Toeplitz action and a finitely supported modification
/// confined to the left boundary rows `1..-p'`.
#[derive(Debug, Clone)]
pub struct SemiInfiniteSpec {
    symbol: LaurentSymbol,
    corner: Vec<CornerEntry>,
}

impl SemiInfiniteSpec {
    pub fn new(symbol: LaurentSymbol, corner: Vec<CornerEntry>) -> Result<Self> {
        if symbol.is_zero() {
            return Err(Error::ZeroSymbol);
        }
        let d = symbol.d();
        let edge = (-symbol.p_prime()) as usize;
        for e in &corner {
            if e.block.nrows() != d || e.block.ncols() != d {
                return Err(Error::InvalidSpec(format!(
                    "corner block at ({}, {}) is {}x{}, expected {d}x{d}",
                    e.row,
                    e.col,
                    e.block.nrows(),
                    e.block.ncols()
                )));
            }
            if e.row == 0 || e.row > edge {
                return Err(Error::InvalidSpec(format!(
                    "corner row {} outside the left boundary rows 1..={edge}",
                    e.row
                )));
            }
            if e.col == 0 {
                return Err(Error::InvalidSpec("corner column must be >= 1".into()));
            }
        }
        Ok(Self { symbol, corner })
    }

    pub fn symbol(&self) -> &LaurentSymbol {
        &self.symbol
    }

    pub fn corner(&self) -> &[CornerEntry] {
        &self.corner
    }

    pub fn shifted(&self, epsilon: Complex64) -> Self {
        Self {
            symbol: self.symbol.shift(epsilon),
            corner: self.corner.clone(),
        }
    }
}

/// Square-summable bulk solutions of a (shifted) semi-infinite problem:
/// extended solutions at strictly decaying roots plus the left finite-support
/// solutions.
#[derive(Debug, Clone)]
pub struct DecayingBasis {
    pub extended: Vec<ExtendedSolution>,
    pub left: Vec<FiniteSupportSolution>,
    /// Roots within [`MARGINAL_BAND`] of the unit circle, excluded from the
    /// basis because the corresponding solutions neither decay nor grow.
    pub marginal: Vec<Complex64>,
    d: usize,
}

impl DecayingBasis {
    pub fn len(&self) -> usize {
        self.extended.len() + self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Block component of basis element `s_idx` at 1-based site `j`.
    /// Ordering: extended solutions first, then finite-support.
    pub fn element_block(&self, s_idx: usize, j: usize) -> DVector<Complex64> {
        let ne = self.extended.len();
        if s_idx < ne {
            self.extended[s_idx].block(j)
        } else {
            let sol = &self.left[s_idx - ne];
            let sigma = sol.u.len();
            if j >= 1 && j <= sigma {
                sol.u[j - 1].clone()
            } else {
                DVector::zeros(self.d)
            }
        }
    }
}

/// The decaying bulk basis of a regular symbol.
pub fn decaying_basis(symbol: &LaurentSymbol) -> Result<DecayingBasis> {
    let all = bulk::extended_solutions(symbol)?;
    let mut extended = Vec::new();
    let mut marginal = Vec::new();
    for sol in all {
        let r = sol.z.norm();
        if (r - 1.0).abs() <= MARGINAL_BAND {
            if !marginal
                .iter()
                .any(|m: &Complex64| (*m - sol.z).norm() <= 1e-12)
            {
                marginal.push(sol.z);
            }
        } else if r < 1.0 {
            extended.push(sol);
        }
    }
    let sigma = bulk::emergent_support(symbol)?;
    let left = if sigma == 0 {
        Vec::new()
    } else {
        let k = bulk::build_k(symbol, Side::Left, sigma);
        linalg::nullspace(&k)
            .into_iter()
            .map(|vec| FiniteSupportSolution {
                side: Side::Left,
                u: (0..sigma)
                    .map(|j| {
                        DVector::from_iterator(
                            symbol.d(),
                            (0..symbol.d()).map(|m| vec[j * symbol.d() + m]),
                        )
                    })
                    .collect(),
            })
            .collect()
    };
    Ok(DecayingBasis {
        extended,
        left,
        marginal,
        d: symbol.d(),
    })
}

/// A bound state: coefficients over a decaying basis at a fixed shift.
#[derive(Debug, Clone)]
pub struct BoundState {
    pub epsilon: Complex64,
    pub alpha: DVector<Complex64>,
    /// Largest decay-root modulus among the contributing extended solutions
    /// (0 if the state is purely finite-support).
    pub dominant_decay: f64,
}

/// The left boundary matrix of `spec - epsilon` over a decaying basis:
/// rows `b = 1..-p'`, one column per basis element. Rectangular in general.
pub fn assemble_left(
    spec: &SemiInfiniteSpec,
    basis: &DecayingBasis,
    epsilon: Complex64,
) -> DMatrix<Complex64> {
    let shifted = spec.symbol.shift(epsilon);
    let d = shifted.d();
    let edge = (-shifted.p_prime()) as usize;
    let n_b = basis.len();
    let mut mat = DMatrix::<Complex64>::zeros(edge * d, n_b);
    for s_idx in 0..n_b {
        for b in 1..=edge {
            let mut acc = DVector::<Complex64>::zeros(d);
            let r_lo = shifted.p().max(-(b as i64) + 1);
            for r in r_lo..=shifted.q() {
                let j = (b as i64 + r) as usize;
                acc += shifted.coeff(r) * basis.element_block(s_idx, j);
            }
            for e in &spec.corner {
                if e.row == b {
                    acc += &e.block * basis.element_block(s_idx, e.col);
                }
            }
            mat.view_mut(((b - 1) * d, s_idx), (d, 1)).copy_from(&acc);
        }
    }
    mat
}

/// Bound states of `spec - epsilon`: the kernel of the left boundary matrix
/// over the decaying basis, together with the basis itself.
pub fn bound_states(
    spec: &SemiInfiniteSpec,
    epsilon: Complex64,
) -> Result<(DecayingBasis, Vec<BoundState>)> {
    let shifted = spec.symbol.shift(epsilon);
    let (poly, _) = shifted.determinant();
    if poly.is_zero() {
        return Err(Error::SingularSymbol(epsilon));
    }
    let basis = decaying_basis(&shifted)?;
    if basis.is_empty() {
        return Ok((basis, Vec::new()));
    }
    let mut mat = assemble_left(spec, &basis, epsilon);

    // Normalize columns by the basis element's magnitude on the sites the
    // boundary rows touch, so a column that is small because the element
    // already solves the boundary equation stays small, while the kernel
    // cutoff below remains meaningful in absolute terms.
    let edge = (-shifted.p_prime()) as usize;
    let mut window = edge + shifted.q().max(0) as usize;
    for e in &spec.corner {
        window = window.max(e.col);
    }
    let mut col_scales = vec![0.0_f64; basis.len()];
    for (s_idx, scale) in col_scales.iter_mut().enumerate() {
        for j in 1..=window {
            *scale = scale.max(basis.element_block(s_idx, j).norm());
        }
        if *scale <= 0.0 {
            *scale = 1.0;
        }
        let inv = Complex64::from(1.0 / *scale);
        for v in mat.column_mut(s_idx).iter_mut() {
            *v *= inv;
        }
    }

    let states = linalg::nullspace_with_cutoff(&mat, 1e-8)
        .into_iter()
        .map(|beta| {
            let alpha = DVector::from_iterator(
                beta.nrows(),
                beta
                    .iter()
                    .enumerate()
                    .map(|(s, c)| c / Complex64::from(col_scales[s])),
            );
            let mut dominant = 0.0_f64;
            for (i, sol) in basis.extended.iter().enumerate() {
                if alpha[i].norm() > 1e-12 {
                    dominant = dominant.max(sol.z.norm());
                }
            }
            BoundState {
                epsilon,
                alpha,
                dominant_decay: dominant,
            }
        })
        .collect();
    Ok((basis, states))
}

/// Block component of a bound state at 1-based site `j`.
pub fn state_block(basis: &DecayingBasis, state: &BoundState, j: usize) -> DVector<Complex64> {
    let mut acc = DVector::<Complex64>::zeros(basis.d());
    for s in 0..basis.len() {
        if state.alpha[s] != Complex64::ZERO {
            acc += basis.element_block(s, j) * state.alpha[s];
        }
    }
    acc
}

/// Dense truncation of a bound state to sites `1..=n`.
pub fn state_truncation(
    basis: &DecayingBasis,
    state: &BoundState,
    n: usize,
) -> DVector<Complex64> {
    let d = basis.d();
    let mut out = DVector::<Complex64>::zeros(n * d);
    for j in 1..=n {
        let b = state_block(basis, state, j);
        out.rows_mut((j - 1) * d, d).copy_from(&b);
    }
    out
}
