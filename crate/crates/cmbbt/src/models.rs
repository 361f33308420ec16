//! The Kitaev Majorana chain in Bogoliubov-de Gennes form, as a block-size-2
//! nearest-neighbor problem, together with closed-form spectral checks
//! available at the solvable point `t = delta`.

use crate::bulk::ProblemSpec;
use crate::error::Result;
use crate::laurent::LaurentSymbol;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Chemical potential, hopping and pairing amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KitaevParams {
    pub mu: f64,
    pub t: f64,
    pub delta: f64,
}

impl KitaevParams {
    /// The solvable line where hopping and pairing coincide.
    pub fn solvable(mu: f64, t: f64) -> Self {
        Self { mu, t, delta: t }
    }
}

fn re(x: f64) -> Complex64 {
    Complex64::from(x)
}

/// On-site block `-mu sigma_z`.
pub fn kitaev_onsite(params: &KitaevParams) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(2, 2, &[re(-params.mu), re(0.0), re(0.0), re(params.mu)])
}

/// Hopping block (the coefficient of `w`).
pub fn kitaev_hopping(params: &KitaevParams) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(
        2,
        2,
        &[
            re(-params.t),
            re(params.delta),
            re(-params.delta),
            re(params.t),
        ],
    )
}

/// Symbol `h1^dag w^-1 + h0 + h1 w` of the open Kitaev chain.
pub fn kitaev_symbol(params: &KitaevParams) -> Result<LaurentSymbol> {
    let h1 = kitaev_hopping(params);
    LaurentSymbol::new(2, -1, vec![h1.adjoint(), kitaev_onsite(params), h1])
}

/// Open N-site Kitaev chain as a corner-modified problem (empty corner:
/// open boundary conditions are the plain truncation).
pub fn kitaev_spec(params: &KitaevParams, n: usize) -> Result<ProblemSpec> {
    Ok(ProblemSpec::new(kitaev_symbol(params)?, n, Vec::new())?)
}

/// The four energies at which the characteristic equation degenerates on the
/// solvable line: `{+-(mu + 2t), +-(mu - 2t)}`.
pub fn special_energies(params: &KitaevParams) -> [f64; 4] {
    let (mu, t) = (params.mu, params.t);
    [mu + 2.0 * t, -(mu + 2.0 * t), mu - 2.0 * t, -(mu - 2.0 * t)]
}

/// The decay root pair `(zeta, 1/zeta)` of the characteristic equation
/// `2 mu t (z + 1/z) + (mu^2 + 4t^2 - eps^2) = 0` on the solvable line,
/// ordered so `|zeta| <= 1`. `None` when `mu = 0` (the equation degenerates)
/// or at the special energies where the two roots collide.
pub fn characteristic_pair(params: &KitaevParams, eps: Complex64) -> Option<(Complex64, Complex64)> {
    let (mu, t) = (params.mu, params.t);
    if mu == 0.0 || t == 0.0 {
        return None;
    }
    let b = re(mu * mu + 4.0 * t * t) - eps * eps;
    let a = re(2.0 * mu * t);
    let disc = (b * b - 4.0 * a * a).sqrt();
    // Stable quadratic roots: z^2 (2 mu t) + z b + (2 mu t) = 0.
    let q = if (b + disc).norm() >= (b - disc).norm() {
        -(b + disc) / 2.0
    } else {
        -(b - disc) / 2.0
    };
    if q.norm() == 0.0 {
        return None;
    }
    let z1 = q / a;
    let z2 = a / q;
    if (z1 - z2).norm() <= 1e-10 * z1.norm().max(1.0) {
        return None;
    }
    if z1.norm() <= z2.norm() {
        Some((z1, z2))
    } else {
        Some((z2, z1))
    }
}

/// Residual of the open-chain quantization condition
/// `2 t zeta + eps + mu = +- zeta^(N+1) (2 t / zeta + eps + mu)`
/// on the solvable line, minimized over the sign. Small residual means `eps`
/// is an eigenvalue of the open N-site chain.
pub fn quantization_residual(params: &KitaevParams, n: usize, eps: Complex64) -> Option<f64> {
    let (zeta, _) = characteristic_pair(params, eps)?;
    let (mu, t) = (params.mu, params.t);
    let lhs = re(2.0 * t) * zeta + eps + re(mu);
    let rhs = zeta.powi(n as i32 + 1) * (re(2.0 * t) / zeta + eps + re(mu));
    let scale = lhs.norm().max(rhs.norm()).max(1e-300);
    Some(((lhs - rhs).norm().min((lhs + rhs).norm())) / scale)
}

/// Whether `eps = mu + 2t` (a special energy) is an eigenvalue of the open
/// N-site chain: this happens exactly on the parameter line
/// `2 N t + (N + 1) mu = 0`. Returns the defect of that condition.
pub fn special_energy_defect(params: &KitaevParams, n: usize) -> f64 {
    2.0 * n as f64 * params.t + (n as f64 + 1.0) * params.mu
}

/// The chemical potential putting `mu + 2t` in the spectrum of the open
/// N-site chain at hopping `t`.
pub fn special_energy_mu(t: f64, n: usize) -> f64 {
    -2.0 * n as f64 * t / (n as f64 + 1.0)
}
