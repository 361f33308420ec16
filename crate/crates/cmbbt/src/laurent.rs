//! Matrix Laurent polynomials ("symbols") of banded block-Toeplitz matrices:
//! arithmetic, evaluation, the generalized evaluation map, and determinant
//! extraction.

use crate::error::{Error, Result};
use crate::linalg;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Relative threshold below which a coefficient block is trimmed to zero when
/// normalizing the bandwidth.
const TRIM_REL_TOL: f64 = 1e-14;

/// A d x d matrix Laurent polynomial `A(w, w^-1) = sum_{r=p}^{q} w^r a_r`.
///
/// The coefficient list is stored from `p` upwards. After construction the
/// outermost coefficients are nonzero, except for the zero symbol, which is
/// represented with `p = q = 0`, a single zero block, and `is_zero() = true`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentSymbol {
    d: usize,
    p: i64,
    coeffs: Vec<DMatrix<Complex64>>,
}

impl LaurentSymbol {
    /// Build a symbol from coefficients `a_p, a_{p+1}, ..., a_q`.
    /// Leading/trailing blocks of negligible norm are trimmed.
    pub fn new(d: usize, p: i64, coeffs: Vec<DMatrix<Complex64>>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidSpec("block size must be positive".into()));
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidSpec("empty coefficient list".into()));
        }
        for c in &coeffs {
            if c.nrows() != d || c.ncols() != d {
                return Err(Error::InvalidSpec(format!(
                    "coefficient block is {}x{}, expected {d}x{d}",
                    c.nrows(),
                    c.ncols()
                )));
            }
            if c.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        let max_norm = coeffs
            .iter()
            .map(linalg::fro_norm)
            .fold(0.0_f64, f64::max);
        if max_norm == 0.0 {
            return Ok(Self::zero(d));
        }
        let tol = TRIM_REL_TOL * max_norm;
        let mut lo = 0;
        let mut hi = coeffs.len();
        while lo < hi && linalg::fro_norm(&coeffs[lo]) <= tol {
            lo += 1;
        }
        while hi > lo && linalg::fro_norm(&coeffs[hi - 1]) <= tol {
            hi -= 1;
        }
        if lo == hi {
            return Ok(Self::zero(d));
        }
        let mut kept: Vec<DMatrix<Complex64>> = coeffs[lo..hi].to_vec();
        for c in &mut kept {
            for z in c.iter_mut() {
                if z.norm() <= tol {
                    *z = Complex64::ZERO;
                }
            }
        }
        Ok(Self {
            d,
            p: p + lo as i64,
            coeffs: kept,
        })
    }

    /// The zero symbol (flagged; rejected by solver entry points).
    pub fn zero(d: usize) -> Self {
        Self {
            d,
            p: 0,
            coeffs: vec![DMatrix::zeros(d, d)],
        }
    }

    /// The constant symbol `c * identity`.
    pub fn scalar_identity(d: usize, c: Complex64) -> Self {
        Self::new(d, 0, vec![DMatrix::from_diagonal_element(d, d, c)])
            .expect("constant symbol")
    }

    /// The identity symbol.
    pub fn identity(d: usize) -> Self {
        Self::scalar_identity(d, Complex64::ONE)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && linalg::fro_norm(&self.coeffs[0]) == 0.0
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.p + self.coeffs.len() as i64 - 1
    }

    /// `p' = min(p, 0)`.
    pub fn p_prime(&self) -> i64 {
        self.p().min(0)
    }

    /// `q' = max(q, 0)`.
    pub fn q_prime(&self) -> i64 {
        self.q().max(0)
    }

    /// Boundary thickness `tau = q' - p'`.
    pub fn tau(&self) -> i64 {
        self.q_prime() - self.p_prime()
    }

    /// Coefficient `a_r` (zero block outside the band).
    pub fn coeff(&self, r: i64) -> DMatrix<Complex64> {
        if r < self.p || r > self.q() {
            DMatrix::zeros(self.d, self.d)
        } else {
            self.coeffs[(r - self.p) as usize].clone()
        }
    }

    /// Principal coefficient `a_{p'}` (zero when p > 0).
    pub fn principal_lower(&self) -> DMatrix<Complex64> {
        if self.p() > 0 {
            DMatrix::zeros(self.d, self.d)
        } else {
            self.coeff(self.p())
        }
    }

    /// Principal coefficient `a_{q'}` (zero when q < 0).
    pub fn principal_upper(&self) -> DMatrix<Complex64> {
        if self.q() < 0 {
            DMatrix::zeros(self.d, self.d)
        } else {
            self.coeff(self.q())
        }
    }

    /// Coefficientwise sum; bandwidth is the union, re-trimmed.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::BlockSizeMismatch(self.d, other.d));
        }
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        let p = self.p().min(other.p());
        let q = self.q().max(other.q());
        let mut coeffs = Vec::with_capacity((q - p + 1) as usize);
        for r in p..=q {
            coeffs.push(self.coeff(r) + other.coeff(r));
        }
        Self::new(self.d, p, coeffs)
    }

    /// Scale every coefficient by `c`.
    pub fn scale(&self, c: Complex64) -> Self {
        let coeffs = self.coeffs.iter().map(|a| a * c).collect();
        Self::new(self.d, self.p, coeffs).expect("scaling preserves validity")
    }

    pub fn neg(&self) -> Self {
        self.scale(-Complex64::ONE)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// `A - epsilon * identity`.
    pub fn shift(&self, epsilon: Complex64) -> Self {
        self.sub(&Self::scalar_identity(self.d, epsilon))
            .expect("same block size")
    }

    /// Cauchy product of coefficients; bandwidth `(p_A + p_B, q_A + q_B)`
    /// before trimming.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::BlockSizeMismatch(self.d, other.d));
        }
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.d));
        }
        let p = self.p() + other.p();
        let q = self.q() + other.q();
        let mut coeffs = vec![DMatrix::<Complex64>::zeros(self.d, self.d); (q - p + 1) as usize];
        for r1 in self.p()..=self.q() {
            let a1 = self.coeff(r1);
            for r2 in other.p()..=other.q() {
                coeffs[(r1 + r2 - p) as usize] += &a1 * other.coeff(r2);
            }
        }
        Self::new(self.d, p, coeffs)
    }

    /// Conjugate transpose symbol: coefficients `a_{-r}^H`, bandwidth (-q,-p).
    pub fn adjoint(&self) -> Self {
        if self.is_zero() {
            return Self::zero(self.d);
        }
        let coeffs = self.coeffs.iter().rev().map(|a| a.adjoint()).collect();
        Self::new(self.d, -self.q(), coeffs).expect("adjoint preserves validity")
    }

    /// Whether the symbol equals its adjoint (Hermitian as a BBL operator).
    pub fn is_hermitian(&self) -> bool {
        let diff = self.sub(&self.adjoint()).expect("same block size");
        let scale = self
            .coeffs
            .iter()
            .map(linalg::fro_norm)
            .fold(0.0_f64, f64::max)
            .max(1e-300);
        diff.is_zero()
            || diff
                .coeffs
                .iter()
                .map(linalg::fro_norm)
                .fold(0.0_f64, f64::max)
                <= 1e-12 * scale
    }

    /// Formal derivative of order `order` of `z -> A(z, z^-1)`, returned as
    /// coefficient data (another symbol) evaluable at any `z != 0`.
    pub fn derivative(&self, order: u32) -> Self {
        let mut cur = self.clone();
        for _ in 0..order {
            if cur.is_zero() {
                return cur;
            }
            let p = cur.p();
            let coeffs = (p..=cur.q())
                .map(|r| cur.coeff(r) * Complex64::from(r as f64))
                .collect();
            cur = Self::new(cur.d, p - 1, coeffs).expect("derivative coefficients");
        }
        cur
    }

    /// Evaluate `A(z, z^-1) = sum_r z^r a_r` at `z != 0`.
    pub fn evaluate(&self, z: Complex64) -> Result<DMatrix<Complex64>> {
        if z == Complex64::ZERO {
            return Err(Error::InvalidArgument("z = 0".into()));
        }
        let mut acc = DMatrix::<Complex64>::zeros(self.d, self.d);
        if self.is_zero() {
            return Ok(acc);
        }
        // Horner evaluation of w^{-p} A as a plain polynomial, then undo the
        // prefactor; this avoids computing large negative powers separately.
        for r in (self.p()..=self.q()).rev() {
            acc *= z;
            acc += self.coeff(r);
        }
        let pref = z.powi(self.p() as i32);
        Ok(acc * pref)
    }

    /// Generalized evaluation map `A_s(z)`: the `ds x ds` block-upper-
    /// triangular matrix with block `(x, v)` equal to
    /// `binom(v-1, x-1) * A^{(v-x)}(z, z^-1)` for `x <= v`, zero below.
    pub fn eval_map(&self, z: Complex64, s: usize) -> Result<DMatrix<Complex64>> {
        if s == 0 {
            return Err(Error::InvalidArgument("s must be >= 1".into()));
        }
        if z == Complex64::ZERO {
            return Err(Error::InvalidArgument("z = 0".into()));
        }
        let d = self.d;
        let mut derivs = Vec::with_capacity(s);
        for k in 0..s {
            derivs.push(self.derivative(k as u32).evaluate(z)?);
        }
        let mut out = DMatrix::<Complex64>::zeros(d * s, d * s);
        for v in 1..=s {
            for x in 1..=v {
                let b = binomial(v - 1, x - 1);
                let block = &derivs[v - x] * Complex64::from(b as f64);
                out.view_mut(((x - 1) * d, (v - 1) * d), (d, d)).copy_from(&block);
            }
        }
        Ok(out)
    }

    /// Determinant `det A(w, w^-1) = w^shift * P(w)` with `P(0) != 0`, or the
    /// zero polynomial when the symbol is singular.
    ///
    /// Computed by evaluation-interpolation: `det(w^{-p} A)` is a polynomial
    /// of degree at most `d(q-p)`, sampled at roots of unity scaled to a
    /// circle radius that balances the outermost coefficient norms.
    pub fn determinant(&self) -> (ScalarPoly, i64) {
        if self.is_zero() {
            return (ScalarPoly::zero(), 0);
        }
        let d = self.d as i64;
        let span = (self.q() - self.p()) as usize;
        let deg_bound = self.d * span;
        let m = deg_bound + 1;
        let radius = self.interpolation_radius();
        let tau_pi = 2.0 * std::f64::consts::PI;
        let mut samples = Vec::with_capacity(m);
        let mut scale = 0.0_f64;
        for k in 0..m {
            let theta = tau_pi * k as f64 / m as f64;
            let w = Complex64::from_polar(radius, theta);
            // det of w^{-p} A(w, w^-1) = w^{-dp} det A
            let g = self
                .evaluate(w)
                .expect("nonzero sample point")
                * w.powi(-(self.p() as i32));
            let det = g.determinant();
            scale = scale.max(det.norm());
            samples.push(det);
        }
        // Inverse DFT on the scaled circle recovers the coefficients.
        let mut coeffs = Vec::with_capacity(m);
        for j in 0..m {
            let mut c = Complex64::ZERO;
            for (k, det) in samples.iter().enumerate() {
                let theta = -tau_pi * (j * k) as f64 / m as f64;
                c += det * Complex64::from_polar(1.0, theta);
            }
            c /= Complex64::from(m as f64);
            c /= Complex64::from(radius.powi(j as i32));
            coeffs.push(c);
        }
        // Zero-polynomial detection: compare against the sampled magnitude
        // scale (coefficients of a genuinely nonzero determinant cannot all
        // be tiny relative to the largest sample unless cancellation is
        // catastrophic, which the relative threshold absorbs).
        let coeff_scale = coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c.norm() * radius.powi(j as i32))
            .fold(0.0_f64, f64::max);
        // An identically-zero determinant still produces rounding-noise
        // samples, so also compare against an a-priori magnitude bound
        // (product of row-sum bounds on the sampled circle).
        let row_bound: f64 = (self.p()..=self.q())
            .map(|r| linalg::fro_norm(&self.coeff(r)) * radius.powi((r - self.p()) as i32))
            .sum();
        let noise_floor = 1e-12 * row_bound.powi(self.d as i32);
        let abs_tol = (1e-10 * scale.max(coeff_scale)).max(noise_floor);
        if scale <= noise_floor
            || coeffs
                .iter()
                .enumerate()
                .all(|(j, c)| c.norm() * radius.powi(j as i32) <= abs_tol)
        {
            return (ScalarPoly::zero(), 0);
        }
        for (j, c) in coeffs.iter_mut().enumerate() {
            if c.norm() * radius.powi(j as i32) <= abs_tol {
                *c = Complex64::ZERO;
            }
        }
        // Strip the lowest-order zero coefficients into the w-power shift.
        let low = coeffs
            .iter()
            .position(|c| c.norm() > 0.0)
            .expect("nonzero polynomial");
        let poly = ScalarPoly::new(coeffs[low..].to_vec());
        (poly, d * self.p() + low as i64)
    }

    fn interpolation_radius(&self) -> f64 {
        let np = linalg::fro_norm(&self.coeff(self.p()));
        let nq = linalg::fro_norm(&self.coeff(self.q()));
        if np > 0.0 && nq > 0.0 && self.q() > self.p() {
            let r = (np / nq).powf(1.0 / (self.q() - self.p()) as f64);
            if r.is_finite() && r > 1e-6 && r < 1e6 {
                return r;
            }
        }
        1.0
    }

    /// Whether `det A(w, w^-1)` is not identically zero. Shortcut: a symbol
    /// with an invertible leading coefficient is always regular.
    pub fn is_regular(&self) -> bool {
        if self.is_zero() {
            return false;
        }
        if matrix_is_invertible(&self.coeff(self.p())) || matrix_is_invertible(&self.coeff(self.q())) {
            return true;
        }
        let (poly, _) = self.determinant();
        !poly.is_zero()
    }
}

fn matrix_is_invertible(m: &DMatrix<Complex64>) -> bool {
    let n = m.nrows();
    if n == 0 {
        return false;
    }
    linalg::rank(m) == n
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// A scalar polynomial `c_0 + c_1 w + ... + c_m w^m` with nonzero leading
/// coefficient unless it is the zero polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarPoly {
    coeffs: Vec<Complex64>,
}

impl ScalarPoly {
    /// Build from low-to-high coefficients, trimming a negligible tail.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let max = coeffs.iter().map(|c| c.norm()).fold(0.0_f64, f64::max);
        if max == 0.0 {
            return Self::zero();
        }
        let tol = TRIM_REL_TOL * max;
        let mut hi = coeffs.len();
        while hi > 0 && coeffs[hi - 1].norm() <= tol {
            hi -= 1;
        }
        if hi == 0 {
            return Self::zero();
        }
        Self {
            coeffs: coeffs[..hi].to_vec(),
        }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![] }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * Complex64::from(i as f64))
            .collect();
        Self::new(coeffs)
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0_f64, f64::max)
    }
}
