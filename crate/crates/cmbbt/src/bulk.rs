//! Solution of the bulk equation `P_B A_N psi = 0`: extended solutions from
//! the kernel of the associated block-Laurent operator, and finite-support
//! solutions from the kernels of the edge matrices K- and K+.

use crate::error::{Error, Result};
use crate::laurent::LaurentSymbol;
use crate::linalg;
use crate::rootfind;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// One block entry of a corner modification, addressed by 1-based block row
/// and column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerEntry {
    pub row: usize,
    pub col: usize,
    pub block: DMatrix<Complex64>,
}

/// A finite corner-modified banded block-Toeplitz problem: symbol, size N,
/// and a sparse corner modification confined to boundary rows.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    symbol: LaurentSymbol,
    n: usize,
    corner: Vec<CornerEntry>,
}

/// 1-based boundary row blocks `{1..-p'} U {N-q'+1..N}` for the given
/// bandwidth, in ascending order.
pub fn boundary_rows(n: usize, p_prime: i64, q_prime: i64) -> Vec<usize> {
    let mut rows: Vec<usize> = (1..=(-p_prime) as usize).collect();
    rows.extend((n - q_prime as usize + 1)..=n);
    rows
}

/// 1-based boundary column blocks `{1..q'} U {N+p'+1..N}` (the support of the
/// left boundary projector for the same bandwidth).
pub fn boundary_cols(n: usize, p_prime: i64, q_prime: i64) -> Vec<usize> {
    let mut cols: Vec<usize> = (1..=q_prime as usize).collect();
    cols.extend(((n as i64 + p_prime + 1) as usize)..=n);
    cols
}

impl ProblemSpec {
    pub fn new(symbol: LaurentSymbol, n: usize, corner: Vec<CornerEntry>) -> Result<Self> {
        if symbol.is_zero() {
            return Err(Error::ZeroSymbol);
        }
        let tau = symbol.tau();
        if (n as i64) <= tau {
            return Err(Error::NTooSmall {
                required: (tau + 1) as usize,
                actual: n,
            });
        }
        let d = symbol.d();
        let rows = boundary_rows(n, symbol.p_prime(), symbol.q_prime());
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
            if e.block.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite);
            }
            if e.row == 0 || e.row > n || e.col == 0 || e.col > n {
                return Err(Error::InvalidSpec(format!(
                    "corner index ({}, {}) outside 1..={n}",
                    e.row, e.col
                )));
            }
            if !rows.contains(&e.row) {
                return Err(Error::InvalidSpec(format!(
                    "corner row {} is not a boundary row",
                    e.row
                )));
            }
        }
        Ok(Self { symbol, n, corner })
    }

    pub fn symbol(&self) -> &LaurentSymbol {
        &self.symbol
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn corner(&self) -> &[CornerEntry] {
        &self.corner
    }

    /// Whether the corner modification is symmetrical: every column index
    /// lies in the support of the left boundary projector.
    pub fn is_symmetric(&self) -> bool {
        let cols = boundary_cols(self.n, self.symbol.p_prime(), self.symbol.q_prime());
        self.corner.iter().all(|e| cols.contains(&e.col))
    }

    /// Spec for `C - epsilon`: shifts the symbol, keeps the corner.
    pub fn shifted(&self, epsilon: Complex64) -> Self {
        Self {
            symbol: self.symbol.shift(epsilon),
            n: self.n,
            corner: self.corner.clone(),
        }
    }

    /// Whether the problem is Hermitian as a dense matrix: Hermitian symbol
    /// and a corner modification that equals its own conjugate transpose.
    pub fn is_hermitian(&self) -> bool {
        if !self.symbol.is_hermitian() {
            return false;
        }
        let scale = self
            .corner
            .iter()
            .map(|e| linalg::fro_norm(&e.block))
            .fold(1e-300, f64::max);
        for e in &self.corner {
            let mirror: DMatrix<Complex64> = self
                .corner
                .iter()
                .filter(|f| f.row == e.col && f.col == e.row)
                .fold(DMatrix::zeros(e.block.nrows(), e.block.ncols()), |acc, f| {
                    acc + f.block.adjoint()
                });
            if linalg::fro_norm(&(&e.block - mirror)) > 1e-12 * scale {
                return false;
            }
        }
        true
    }
}

/// Which edge a finite-support solution is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// One kernel vector of the generalized evaluation map at a root `z` of the
/// characteristic equation: block components `u_1..u_s` of a sequence
/// `psi_j = sum_v j^(v-1) z^(j-v+1) u_v`.
#[derive(Debug, Clone)]
pub struct ExtendedSolution {
    pub z: Complex64,
    /// Root multiplicity; also the number of block components.
    pub s: usize,
    /// Blocks `u_v`, each of dimension d.
    pub u: Vec<DVector<Complex64>>,
    /// Site exponent offset used when expanding: amplitudes carry
    /// `z^(j - v + 1 - anchor)`. Zero for `|z| <= 1`, `N` for `|z| > 1`,
    /// which keeps every stored amplitude bounded.
    pub anchor: i64,
}

impl ExtendedSolution {
    /// Block component at 1-based site `j` (of an N-site expansion).
    pub fn block(&self, j: usize) -> DVector<Complex64> {
        let d = self.u[0].nrows();
        let mut acc = DVector::<Complex64>::zeros(d);
        for (vi, uv) in self.u.iter().enumerate() {
            let v = (vi + 1) as i64;
            let jf = falling_factorial(j as i64, v - 1);
            let exponent = j as i64 - v + 1 - self.anchor;
            let amp = self.z.powi(exponent as i32) * Complex64::from(jf);
            acc += uv * amp;
        }
        acc
    }
}

/// A finite-support solution: sigma block components adjacent to one edge.
#[derive(Debug, Clone)]
pub struct FiniteSupportSolution {
    pub side: Side,
    /// Blocks over sites `1..sigma` (left) or `N-sigma+1..N` (right).
    pub u: Vec<DVector<Complex64>>,
}

impl FiniteSupportSolution {
    /// Block component at 1-based site `j` of an N-site expansion.
    pub fn block(&self, j: usize, n: usize) -> DVector<Complex64> {
        let sigma = self.u.len();
        let d = if sigma > 0 { self.u[0].nrows() } else { 0 };
        let idx = match self.side {
            Side::Left => {
                if j >= 1 && j <= sigma {
                    Some(j - 1)
                } else {
                    None
                }
            }
            Side::Right => {
                if j > n - sigma && j <= n {
                    Some(j - (n - sigma) - 1)
                } else {
                    None
                }
            }
        };
        match idx {
            Some(i) => self.u[i].clone(),
            None => DVector::zeros(d),
        }
    }
}

/// The complete basis of the bulk solution space for a given (shifted)
/// symbol and size N.
#[derive(Debug, Clone)]
pub struct BulkBasis {
    pub extended: Vec<ExtendedSolution>,
    pub left: Vec<FiniteSupportSolution>,
    pub right: Vec<FiniteSupportSolution>,
    pub tau: i64,
    pub sigma: usize,
    pub regular: bool,
    d: usize,
    n: usize,
}

impl BulkBasis {
    pub fn len(&self) -> usize {
        self.extended.len() + self.left.len() + self.right.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Block component of basis element `s_idx` at 1-based site `j`.
    /// Ordering: extended solutions first, then left, then right.
    pub fn element_block(&self, s_idx: usize, j: usize) -> DVector<Complex64> {
        let ne = self.extended.len();
        let nl = self.left.len();
        if s_idx < ne {
            self.extended[s_idx].block(j)
        } else if s_idx < ne + nl {
            self.left[s_idx - ne].block(j, self.n)
        } else {
            self.right[s_idx - ne - nl].block(j, self.n)
        }
    }

    /// Intrinsic magnitude of basis element `s_idx`: the largest stored
    /// amplitude norm. O(1) by construction (amplitudes come from unit
    /// kernel vectors), independent of where the element is localized.
    pub fn element_magnitude(&self, s_idx: usize) -> f64 {
        let ne = self.extended.len();
        let nl = self.left.len();
        let blocks = if s_idx < ne {
            &self.extended[s_idx].u
        } else if s_idx < ne + nl {
            &self.left[s_idx - ne].u
        } else {
            &self.right[s_idx - ne - nl].u
        };
        blocks.iter().map(|u| u.norm()).fold(0.0_f64, f64::max)
    }

    /// Dense length-Nd expansion of basis element `s_idx`.
    pub fn expand(&self, s_idx: usize) -> DVector<Complex64> {
        let mut out = DVector::<Complex64>::zeros(self.n * self.d);
        for j in 1..=self.n {
            let b = self.element_block(s_idx, j);
            out.rows_mut((j - 1) * self.d, self.d).copy_from(&b);
        }
        out
    }
}

/// Falling factorial `j^(v) = (j-v+1)(j-v+2)...j`, with `j^(0) = 1`.
pub fn falling_factorial(j: i64, v: i64) -> f64 {
    let mut acc = 1.0;
    for k in 0..v {
        acc *= (j - k) as f64;
    }
    acc
}

/// Extended solutions of the bulk equation for a regular symbol: for each
/// nonzero root cluster `(z_l, s_l)` of the characteristic equation, the
/// `s_l` kernel vectors of the generalized evaluation map `A_{s_l}(z_l)`.
pub fn extended_solutions(symbol: &LaurentSymbol) -> Result<Vec<ExtendedSolution>> {
    let (clusters, _) = characteristic_roots(symbol)?;
    let mut out = Vec::new();
    for cl in &clusters {
        let a_s = symbol.eval_map(cl.z, cl.multiplicity)?;
        let kernel = kernel_of_dimension(&a_s, cl.multiplicity);
        let d = symbol.d();
        for vec in kernel {
            let u = (0..cl.multiplicity)
                .map(|v| DVector::from_iterator(d, (0..d).map(|m| vec[v * d + m])))
                .collect();
            out.push(ExtendedSolution {
                z: cl.z,
                s: cl.multiplicity,
                u,
                anchor: 0,
            });
        }
    }
    Ok(out)
}

/// Nonzero root clusters of `det A(w, w^-1) = 0` plus the zero multiplicity;
/// errors out on a singular symbol.
pub fn characteristic_roots(
    symbol: &LaurentSymbol,
) -> Result<(Vec<rootfind::RootCluster>, usize)> {
    let (poly, _shift) = symbol.determinant();
    if poly.is_zero() {
        return Err(Error::SingularSymbol(Complex64::ZERO));
    }
    rootfind::roots(&poly)
}

/// The kernel dimension of the generalized evaluation map at a root equals
/// the root's multiplicity, so take exactly that many right singular
/// directions (the smallest ones).
fn kernel_of_dimension(m: &DMatrix<Complex64>, dim: usize) -> Vec<DVector<Complex64>> {
    let n = m.ncols();
    let padded = if m.nrows() < n {
        let mut p = DMatrix::<Complex64>::zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|a, b| {
        svd.singular_values[*a]
            .partial_cmp(&svd.singular_values[*b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    order
        .into_iter()
        .take(dim)
        .map(|i| v_t.row(i).adjoint())
        .collect()
}

/// The edge matrix K- (block-upper-banded, diagonal a_{p'}) or K+
/// (block-lower-banded, diagonal a_{q'}) of size `d*sigma`: the bulk rows
/// restricted to sequences supported on sigma sites at the left (resp.
/// right) edge, in the row convention `[A]_{i,j} = a_{j-i}`.
pub fn build_k(symbol: &LaurentSymbol, side: Side, sigma: usize) -> DMatrix<Complex64> {
    let d = symbol.d();
    let tau = symbol.tau();
    let mut k = DMatrix::<Complex64>::zeros(d * sigma, d * sigma);
    for j in 1..=sigma as i64 {
        for jp in 1..=sigma as i64 {
            let block = match side {
                Side::Left => {
                    if j <= jp && jp <= j + tau {
                        symbol.coeff(jp - j + symbol.p_prime())
                    } else {
                        continue;
                    }
                }
                Side::Right => {
                    if j - tau <= jp && jp <= j {
                        symbol.coeff(jp - j + symbol.q_prime())
                    } else {
                        continue;
                    }
                }
            };
            k.view_mut(
                ((j - 1) as usize * d, (jp - 1) as usize * d),
                (d, d),
            )
            .copy_from(&block);
        }
    }
    k
}

fn k_kernel(symbol: &LaurentSymbol, side: Side, sigma: usize) -> Vec<FiniteSupportSolution> {
    if sigma == 0 {
        return Vec::new();
    }
    let d = symbol.d();
    let k = build_k(symbol, side, sigma);
    linalg::nullspace(&k)
        .into_iter()
        .map(|vec| FiniteSupportSolution {
            side,
            u: (0..sigma)
                .map(|j| DVector::from_iterator(d, (0..d).map(|m| vec[j * d + m])))
                .collect(),
        })
        .collect()
}

/// Finite-support solutions at both edges. Requires `N >= 2 sigma + tau`
/// for the supports not to interfere.
pub fn finite_support_solutions(
    symbol: &LaurentSymbol,
    n: usize,
) -> Result<(Vec<FiniteSupportSolution>, Vec<FiniteSupportSolution>)> {
    let sigma = emergent_support(symbol)?;
    if sigma == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let required = 2 * sigma + symbol.tau() as usize;
    if n < required {
        return Err(Error::NTooSmall {
            required,
            actual: n,
        });
    }
    Ok((
        k_kernel(symbol, Side::Left, sigma),
        k_kernel(symbol, Side::Right, sigma),
    ))
}

/// Support bound `sigma = d tau - sum_l s_l` for the emergent finite-support
/// solutions of a regular symbol.
pub fn emergent_support(symbol: &LaurentSymbol) -> Result<usize> {
    let (clusters, _) = characteristic_roots(symbol)?;
    let total: usize = clusters.iter().map(|c| c.multiplicity).sum();
    let dtau = symbol.d() * symbol.tau() as usize;
    if total > dtau {
        return Err(Error::InvalidSpec(format!(
            "root multiplicities ({total}) exceed d*tau ({dtau})"
        )));
    }
    Ok(dtau - total)
}

/// The complete bulk basis for `spec.symbol - epsilon`: extended solutions
/// plus finite-support solutions, with anchoring chosen per root so every
/// stored amplitude stays bounded for large N.
pub fn bulk_basis(spec: &ProblemSpec, epsilon: Complex64) -> Result<BulkBasis> {
    bulk_basis_of_symbol(&spec.symbol().shift(epsilon), spec.n(), epsilon)
}

/// As [`bulk_basis`], for an already-shifted symbol.
pub fn bulk_basis_of_symbol(
    shifted: &LaurentSymbol,
    n: usize,
    epsilon: Complex64,
) -> Result<BulkBasis> {
    if shifted.is_zero() {
        return Err(Error::SingularSymbol(epsilon));
    }
    let (poly, _) = shifted.determinant();
    if poly.is_zero() {
        return Err(Error::SingularSymbol(epsilon));
    }
    let mut extended = extended_solutions(shifted)?;
    for sol in &mut extended {
        sol.anchor = if sol.z.norm() > 1.0 { n as i64 } else { 0 };
    }
    let (left, right) = finite_support_solutions(shifted, n)?;
    let tau = shifted.tau();
    let sigma = emergent_support(shifted)?;
    let basis = BulkBasis {
        extended,
        left,
        right,
        tau,
        sigma,
        regular: true,
        d: shifted.d(),
        n,
    };
    let dtau = shifted.d() * tau as usize;
    if basis.len() != dtau {
        return Err(Error::InvalidSpec(format!(
            "bulk basis has {} elements, expected d*tau = {dtau} \
             (rank tolerance may need adjustment)",
            basis.len()
        )));
    }
    Ok(basis)
}
