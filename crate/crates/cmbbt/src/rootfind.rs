//! Polynomial root finding with multiplicity clustering: simultaneous
//! Aberth-Ehrlich iteration followed by single-linkage merging of nearby
//! roots and Newton polishing of cluster representatives.

use crate::error::{Error, Result};
use crate::laurent::ScalarPoly;
use num_complex::Complex64;

/// Iteration cap for the simultaneous root iteration.
const MAX_ITERATIONS: usize = 200;
/// Relative step size at which the iteration is considered converged.
const STEP_TOL: f64 = 1e-13;
/// Base clustering radius; the effective radius is `max(RADIUS, RADIUS*|z|)`.
pub const DEFAULT_CLUSTER_RADIUS: f64 = 1e-7;

/// A group of numerically coincident roots treated as one root with
/// multiplicity.
#[derive(Debug, Clone)]
pub struct RootCluster {
    /// Polished cluster representative (nonzero).
    pub z: Complex64,
    /// Multiplicity = number of raw roots merged into this cluster.
    pub multiplicity: usize,
    /// The raw roots that were merged.
    pub members: Vec<Complex64>,
    /// Largest residual `|P(z_i)|` over the members.
    pub residual: f64,
}

/// All roots of `p`, as clusters of nonzero roots plus the multiplicity of
/// the root at zero. Cluster order is deterministic: sorted by `(|z|, arg z)`.
pub fn roots(p: &ScalarPoly) -> Result<(Vec<RootCluster>, usize)> {
    roots_with_radius(p, DEFAULT_CLUSTER_RADIUS)
}

/// Same as [`roots`] with an explicit clustering radius knob.
pub fn roots_with_radius(
    p: &ScalarPoly,
    cluster_radius: f64,
) -> Result<(Vec<RootCluster>, usize)> {
    if p.is_zero() {
        return Err(Error::InvalidArgument(
            "root finding on the zero polynomial".into(),
        ));
    }
    let coeffs = p.coeffs();
    let max_norm = p.max_coeff_norm();
    // Roots at the origin appear as negligible low-order coefficients.
    let zero_tol = 1e-14 * max_norm;
    let mut lo = 0;
    while lo + 1 < coeffs.len() && coeffs[lo].norm() <= zero_tol {
        lo += 1;
    }
    let zero_multiplicity = lo;
    let reduced: Vec<Complex64> = coeffs[lo..].to_vec();
    if reduced.len() <= 1 {
        return Ok((Vec::new(), zero_multiplicity));
    }
    let raw = aberth(&reduced);
    let mut clusters = cluster(&raw, cluster_radius);
    // Roots of multiplicity m are only located to O(eps^(1/m)) by the
    // simultaneous iteration, which can exceed the clustering radius and
    // split one multiple root into several simple clusters. Polishing pulls
    // each representative onto the true root, so alternate polishing with
    // re-clustering of the representatives until the partition is stable.
    loop {
        for c in &mut clusters {
            polish(c, p);
        }
        let reps: Vec<Complex64> = clusters.iter().map(|c| c.z).collect();
        let groups = cluster(&reps, cluster_radius);
        if groups.len() == clusters.len() {
            break;
        }
        let mut merged: Vec<RootCluster> = Vec::with_capacity(groups.len());
        for g in &groups {
            let mut members = Vec::new();
            for rep in &g.members {
                let idx = clusters
                    .iter()
                    .position(|c| c.z == *rep)
                    .expect("representative belongs to a cluster");
                members.extend(clusters[idx].members.clone());
                clusters[idx].z = Complex64::new(f64::NAN, f64::NAN);
            }
            let mean = members.iter().sum::<Complex64>() / Complex64::from(members.len() as f64);
            merged.push(RootCluster {
                z: mean,
                multiplicity: members.len(),
                members,
                residual: 0.0,
            });
        }
        clusters = merged;
    }
    // Second stage: clusters that are suspiciously close may still be one
    // multiple root whose members the iteration could not resolve (the
    // attainable accuracy for multiplicity m is only O(eps^(1/m))). Merge a
    // close pair when the combined candidate passes a derivative test: all
    // derivatives below the combined multiplicity vanish at the polished
    // candidate, relative to the evaluation scale.
    let mut changed = true;
    while changed {
        changed = false;
        'pairs: for i in 0..clusters.len() {
            for j in (i + 1)..clusters.len() {
                let (zi, zj) = (clusters[i].z, clusters[j].z);
                if (zi - zj).norm() > 1e-3 * zi.norm().max(zj.norm()).max(1.0) {
                    continue;
                }
                let (mi, mj) = (clusters[i].multiplicity, clusters[j].multiplicity);
                let m = mi + mj;
                let mut members = clusters[i].members.clone();
                members.extend(clusters[j].members.iter().copied());
                let mut cand = RootCluster {
                    z: (zi * mi as f64 + zj * mj as f64) / Complex64::from(m as f64),
                    multiplicity: m,
                    members,
                    residual: 0.0,
                };
                polish(&mut cand, p);
                if is_multiple_root(p, cand.z, m) {
                    clusters.swap_remove(j);
                    clusters[i] = cand;
                    changed = true;
                    break 'pairs;
                }
            }
        }
    }
    for c in &mut clusters {
        c.residual = c.members.iter().map(|z| p.eval(*z).norm()).fold(0.0, f64::max);
    }
    clusters.sort_by(|a, b| {
        (a.z.norm(), a.z.arg())
            .partial_cmp(&(b.z.norm(), b.z.arg()))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok((clusters, zero_multiplicity))
}

/// Simultaneous Aberth-Ehrlich iteration on a polynomial with nonzero
/// constant and leading coefficients.
fn aberth(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let deriv: Vec<Complex64> = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * Complex64::from(i as f64))
        .collect();
    let eval = |cs: &[Complex64], z: Complex64| -> Complex64 {
        let mut acc = Complex64::ZERO;
        for c in cs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };

    // Initial guesses on a slightly perturbed circle inside the Cauchy bound.
    let lead = coeffs[n];
    let cauchy = 1.0
        + coeffs[..n]
            .iter()
            .map(|c| (c / lead).norm())
            .fold(0.0_f64, f64::max);
    let radius = 0.5 * cauchy.max(1e-12);
    let mut zs: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.42;
            Complex64::from_polar(radius, theta)
        })
        .collect();

    for _ in 0..MAX_ITERATIONS {
        let mut max_step = 0.0_f64;
        let snapshot = zs.clone();
        for i in 0..n {
            let z = snapshot[i];
            let pv = eval(coeffs, z);
            let dv = eval(&deriv, z);
            if pv == Complex64::ZERO {
                continue;
            }
            let newton = if dv == Complex64::ZERO {
                // Nudge off a critical point.
                Complex64::new(1e-12, 1e-12)
            } else {
                pv / dv
            };
            let mut repulsion = Complex64::ZERO;
            for (j, other) in snapshot.iter().enumerate() {
                if j != i {
                    let dz = z - other;
                    if dz != Complex64::ZERO {
                        repulsion += Complex64::ONE / dz;
                    }
                }
            }
            let denom = Complex64::ONE - newton * repulsion;
            let step = if denom == Complex64::ZERO {
                newton
            } else {
                newton / denom
            };
            zs[i] = z - step;
            let rel = step.norm() / zs[i].norm().max(1e-300);
            max_step = max_step.max(rel);
        }
        if max_step < STEP_TOL {
            break;
        }
    }
    zs
}

/// Single-linkage clustering with radius `max(r, r * |z|)`.
fn cluster(raw: &[Complex64], r: f64) -> Vec<RootCluster> {
    let n = raw.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let scale = raw[i].norm().max(raw[j].norm());
            let radius = r.max(r * scale);
            if (raw[i] - raw[j]).norm() <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: std::collections::HashMap<usize, Vec<Complex64>> =
        std::collections::HashMap::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(raw[i]);
    }
    groups
        .into_values()
        .map(|members| {
            let mean = members.iter().sum::<Complex64>() / Complex64::from(members.len() as f64);
            RootCluster {
                z: mean,
                multiplicity: members.len(),
                members,
                residual: 0.0,
            }
        })
        .collect()
}

/// Whether `z` behaves like a root of multiplicity at least `m`: the first
/// `m` derivative orders all evaluate to numerical noise relative to the
/// coefficient magnitude at `|z|`.
fn is_multiple_root(p: &ScalarPoly, z: Complex64, m: usize) -> bool {
    let mut q = p.clone();
    for _ in 0..m {
        if q.is_zero() {
            return true;
        }
        let scale: f64 = q
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, c)| c.norm() * z.norm().powi(i as i32))
            .sum();
        if q.eval(z).norm() > 1e-10 * scale.max(f64::MIN_POSITIVE) {
            return false;
        }
        q = q.derivative();
    }
    true
}

/// Refine a multiplicity-s representative by Newton iteration on the
/// (s-1)-th derivative, where the root is simple.
fn polish(c: &mut RootCluster, p: &ScalarPoly) {
    let mut target = p.clone();
    for _ in 1..c.multiplicity {
        target = target.derivative();
    }
    let dtarget = target.derivative();
    if target.is_zero() || dtarget.is_zero() {
        return;
    }
    let mut z = c.z;
    for _ in 0..50 {
        let f = target.eval(z);
        let df = dtarget.eval(z);
        if df == Complex64::ZERO {
            break;
        }
        let step = f / df;
        z -= step;
        if step.norm() <= 1e-15 * z.norm().max(1e-300) {
            break;
        }
    }
    // Accept the polish only if it stays within the cluster's neighborhood
    // and does not worsen the residual of the original polynomial.
    let scale = c.z.norm().max(1.0);
    if (z - c.z).norm() <= 1e-3 * scale && p.eval(z).norm() <= p.eval(c.z).norm() * 10.0 {
        c.z = z;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn poly(coeffs: &[(f64, f64)]) -> ScalarPoly {
        ScalarPoly::new(coeffs.iter().map(|(r, i)| c(*r, *i)).collect())
    }

    #[test]
    fn linear_root() {
        // w - 2
        let (cl, z0) = roots(&poly(&[(-2.0, 0.0), (1.0, 0.0)])).unwrap();
        assert_eq!(z0, 0);
        assert_eq!(cl.len(), 1);
        assert_eq!(cl[0].multiplicity, 1);
        assert!((cl[0].z - c(2.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn double_root_clusters() {
        // (w - 1)^2 = 1 - 2w + w^2
        let (cl, z0) = roots(&poly(&[(1.0, 0.0), (-2.0, 0.0), (1.0, 0.0)])).unwrap();
        assert_eq!(z0, 0);
        assert_eq!(cl.len(), 1);
        assert_eq!(cl[0].multiplicity, 2);
        assert!((cl[0].z - c(1.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn root_at_origin_tracked_separately() {
        // w^2 (w - 3)
        let (cl, z0) = roots(&poly(&[(0.0, 0.0), (0.0, 0.0), (-3.0, 0.0), (1.0, 0.0)])).unwrap();
        assert_eq!(z0, 2);
        assert_eq!(cl.len(), 1);
        assert!((cl[0].z - c(3.0, 0.0)).norm() < 1e-10);
    }
}
