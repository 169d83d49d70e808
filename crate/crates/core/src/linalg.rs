//! Dense linear-algebra helpers: nearest points on ellipsoids, Hermitian
//! square roots and orthonormal completions.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::point::{CMatrix, CPoint};

/// Nearest point on the ellipsoid {s : sᵀ M s = 1} to an interior point `p`.
///
/// Solves the secular equation for the Lagrange multiplier ν ∈ [0, 1/m_max).
/// Returns `None` when `p` is not interior or when `p` has no weight on the
/// top eigenspace of `M`, in which case the nearest point is not unique.
pub fn nearest_on_ellipsoid(m: &DMatrix<f64>, p: &DVector<f64>) -> Option<DVector<f64>> {
    let level = p.dot(&(m * p));
    if !(level < 1.0) {
        return None;
    }
    let eig = SymmetricEigen::new(m.clone());
    let vals = &eig.eigenvalues;
    let pt = eig.eigenvectors.transpose() * p;
    let m_max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(m_max > 0.0) {
        return None;
    }
    let scale = p.norm().max(1.0 / m_max.sqrt());
    let top_weight: f64 = vals
        .iter()
        .zip(pt.iter())
        .filter(|(v, _)| **v >= m_max * (1.0 - 1e-10))
        .map(|(_, c)| c * c)
        .sum();
    if top_weight.sqrt() <= 1e-13 * scale {
        return None;
    }

    // g(ν) = Σ m_i p_i² / (1 − ν m_i)² − 1 increases from g(0) < 0 to +∞.
    let g = |nu: f64| -> (f64, f64) {
        let mut val = -1.0;
        let mut der = 0.0;
        for (mi, ci) in vals.iter().zip(pt.iter()) {
            let d = 1.0 - nu * mi;
            val += mi * ci * ci / (d * d);
            der += 2.0 * mi * mi * ci * ci / (d * d * d);
        }
        (val, der)
    };
    let mut lo = 0.0;
    let mut hi = 1.0 / m_max;
    let mut nu = 0.0;
    for _ in 0..400 {
        let (val, der) = g(nu);
        if val.abs() < 1e-15 {
            break;
        }
        if val < 0.0 {
            lo = nu;
        } else {
            hi = nu;
        }
        let newton = nu - val / der;
        nu = if newton > lo && newton < hi && der.is_finite() {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 1e-17 * hi.max(1e-300) {
            break;
        }
    }
    let s_tilde = DVector::from_iterator(
        vals.len(),
        vals.iter().zip(pt.iter()).map(|(mi, ci)| ci / (1.0 - nu * mi)),
    );
    let mut s = &eig.eigenvectors * s_tilde;
    let q = s.dot(&(m * &s));
    if !(q > 0.0) {
        return None;
    }
    s /= q.sqrt();
    Some(s)
}

/// Eigen-decomposition of a Hermitian matrix: (ascending eigenvalues, unitary
/// eigenvector matrix with matching column order).
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Principal square root of a positive semidefinite Hermitian matrix.
pub fn hermitian_sqrt(h: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(h);
    let n = vals.len();
    let d = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(vals[i].max(0.0).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    &vecs * d * vecs.adjoint()
}

pub fn singular_condition(m: &CMatrix) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Orthonormal basis of the complex orthogonal complement of `vectors`
/// (assumed orthonormal) in ℂⁿ.
///
/// Pivoted Gram–Schmidt on the canonical basis: at each step the canonical
/// vector with the largest residual is taken (lowest index on ties), and each
/// new vector is phased so that its pivot coordinate is real and positive.
pub fn orthonormal_complement(vectors: &[CPoint], n: usize) -> Vec<CPoint> {
    let mut basis: Vec<CPoint> = vectors.to_vec();
    let mut out = Vec::new();
    let mut used = vec![false; n];
    while basis.len() < n {
        let mut best: Option<(usize, CPoint, f64)> = None;
        for k in (0..n).filter(|&k| !used[k]) {
            let mut r = CPoint::basis(n, k);
            for _ in 0..2 {
                for b in &basis {
                    let c = r.inner(b);
                    r = &r - &b.scale_c(c);
                }
            }
            let nr = r.norm();
            if best.as_ref().map_or(true, |(_, _, bn)| nr > *bn + 1e-12) {
                best = Some((k, r, nr));
            }
        }
        let Some((k, r, nr)) = best else { break };
        used[k] = true;
        if nr < 1e-10 {
            continue;
        }
        let mut v = r.scale(1.0 / nr);
        let lead = v[k];
        if lead.norm() > 0.0 {
            v = v.scale_c(lead.conj() / lead.norm());
        }
        basis.push(v.clone());
        out.push(v);
    }
    out
}
