//! Shared helpers for the integration tests: deterministic random symbols,
//! problems and vectors.

#![allow(dead_code)]

use cmbbt::bulk::{boundary_cols, boundary_rows, CornerEntry, ProblemSpec};
use cmbbt::laurent::LaurentSymbol;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_complex(rng: &mut StdRng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_block(rng: &mut StdRng, d: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(d, d, |_, _| random_complex(rng))
}

pub fn random_vector(rng: &mut StdRng, n: usize) -> DVector<Complex64> {
    DVector::from_fn(n, |_, _| random_complex(rng))
}

/// A random symbol with the given shape. Random dense coefficients are
/// regular with probability 1.
pub fn random_symbol(rng: &mut StdRng, d: usize, p: i64, q: i64) -> LaurentSymbol {
    let coeffs = (p..=q).map(|_| random_block(rng, d)).collect();
    LaurentSymbol::new(d, p, coeffs).unwrap()
}

/// A random symbol with randomly drawn shape: d in 1..=dmax, band p..q with
/// p <= 0 <= q (not both zero) and width at most wmax.
pub fn random_symbol_shape(rng: &mut StdRng, dmax: usize, wmax: i64) -> LaurentSymbol {
    let d = rng.random_range(1..=dmax);
    loop {
        let p = -rng.random_range(0..=wmax);
        let q = rng.random_range(0..=wmax);
        if q - p >= 1 {
            return random_symbol(rng, d, p, q);
        }
    }
}

/// A random problem with a symmetrical corner modification (columns confined
/// to the left boundary projector's support).
pub fn random_symmetric_spec(rng: &mut StdRng, n: usize, dmax: usize, wmax: i64) -> ProblemSpec {
    let symbol = random_symbol_shape(rng, dmax, wmax);
    let d = symbol.d();
    let rows = boundary_rows(n, symbol.p_prime(), symbol.q_prime());
    let cols = boundary_cols(n, symbol.p_prime(), symbol.q_prime());
    let mut corner = Vec::new();
    if !rows.is_empty() && !cols.is_empty() {
        let count = rng.random_range(0..=3);
        for _ in 0..count {
            corner.push(CornerEntry {
                row: rows[rng.random_range(0..rows.len())],
                col: cols[rng.random_range(0..cols.len())],
                block: random_block(rng, d),
            });
        }
    }
    ProblemSpec::new(symbol, n, corner).unwrap()
}

/// A random Hermitian problem: Hermitian symbol, empty corner.
pub fn random_hermitian_spec(rng: &mut StdRng, n: usize, d: usize, q: i64) -> ProblemSpec {
    let mut h0 = random_block(rng, d);
    h0 = (&h0 + h0.adjoint()) * Complex64::from(0.5);
    let mut coeffs: Vec<DMatrix<Complex64>> = Vec::new();
    let uppers: Vec<DMatrix<Complex64>> = (1..=q).map(|_| random_block(rng, d)).collect();
    for r in (1..=q).rev() {
        coeffs.push(uppers[(r - 1) as usize].adjoint());
    }
    coeffs.push(h0);
    for u in &uppers {
        coeffs.push(u.clone());
    }
    let symbol = LaurentSymbol::new(d, -q, coeffs).unwrap();
    ProblemSpec::new(symbol, n, Vec::new()).unwrap()
}

pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0_f64, f64::max)
}
