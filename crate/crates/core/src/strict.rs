//! Bound certificates near spherically-extreme boundary points.
//!
//! At q close to ∂Ω with nearest boundary point b, the chain
//! G = L ∘ κ ∘ Λ_λ ∘ A_q recenters b at 0 with inward normal ê¹, stretches
//! by λ = ‖q − b‖, sends the Siegel model to the ball and normalizes the
//! Hermitian curvature form. As q → ∂Ω the image of Ω approaches the ball.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certificate::{BoundCertificate, Pipeline};
use crate::domain::{ConvexDomainSpec, HermitianForm, BOUNDARY_TOL};
use crate::error::{Result, SqueezeError};
use crate::image::{inner_radius, outer_radius, RadiusOptions};
use crate::linalg::{hermitian_sqrt, nearest_on_ellipsoid, orthonormal_complement};
use crate::maps::{AffineMap, MapAtom, MapChain};
use crate::point::{realify, CMatrix, CPoint};
use crate::sampling::complex_directions;

/// Smallest admissible distance from q to the boundary.
pub const LAMBDA_FLOOR: f64 = 1e-12;
/// Number of ray directions used to detect a competing nearest point.
pub const UNIQUENESS_PROBES: usize = 1000;
pub const UNIQUENESS_SLACK: f64 = 1e-6;
pub const ENVELOPE_INFLATION: f64 = 1e-6;
/// Smallest admissible eigenvalue of the Hermitian curvature form.
pub const MIN_C0: f64 = 1e-10;
/// ‖G(q)‖ above which the chain is recentered by a ball automorphism.
pub const RECENTER_TOL: f64 = 1e-9;

/// Nearest-point data at q and the enclosing sphere 𝔹(c, R) tangent at b.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContactData {
    pub q: CPoint,
    pub b: CPoint,
    /// Outward unit normal at b.
    pub nu: CPoint,
    pub lambda: f64,
    pub radius: f64,
    /// c = b − R·ν.
    pub center: CPoint,
}

impl ContactData {
    pub fn invariant_violations(&self, domain: &ConvexDomainSpec, samples: usize, seed: u64) -> Vec<String> {
        let mut out = Vec::new();
        if (self.q.distance(&self.b) - self.lambda).abs() > 1e-10 {
            out.push("‖q − b‖ differs from λ_q".to_string());
        }
        if domain.level(&self.b).abs() > BOUNDARY_TOL {
            out.push("b is not on the boundary".to_string());
        }
        if (self.center.distance(&self.b) - self.radius).abs() > 1e-9 {
            out.push("‖c − b‖ differs from R".to_string());
        }
        match domain.boundary_samples(samples, seed) {
            Ok(pts) => {
                let worst = pts
                    .iter()
                    .map(|z| z.distance(&self.center))
                    .fold(0.0, f64::max);
                if worst > self.radius + 1e-7 {
                    out.push(format!("boundary leaves the envelope sphere by {:e}", worst - self.radius));
                }
            }
            Err(e) => out.push(format!("boundary sampling failed: {e}")),
        }
        out
    }
}

/// Unique nearest boundary point b to q and the outward normal there.
pub fn nearest_boundary(domain: &ConvexDomainSpec, q: &CPoint) -> Result<(CPoint, CPoint)> {
    let quadric = domain.shape.quadric().ok_or(SqueezeError::NonSmoothKind)?;
    q.check_dim(domain.dim())?;
    if !domain.contains(q) {
        return Err(SqueezeError::invalid("base point must lie inside the domain"));
    }
    let p = q.to_dvector() - &quadric.center;
    let s = nearest_on_ellipsoid(&quadric.matrix, &p).ok_or(SqueezeError::NonUniqueNearestPoint)?;
    let b = CPoint::from_real((&quadric.center + s).as_slice());
    let support = domain.supporting_hyperplane_at(&b)?;
    let nu = support.hyperplane.normal.clone();
    let lambda = q.distance(&b);

    // second-order condition: 1 − λ·κ_max > 0 on the tangent space
    let g = quadric.gradient(&b);
    let (_, kappa_max) = tangential_curvatures(&(&quadric.matrix * 2.0), &g);
    if !(1.0 - lambda * kappa_max > 1e-9) {
        return Err(SqueezeError::NonUniqueNearestPoint);
    }

    // a far boundary point at nearly the same distance signals a tie
    let separation = 0.1 * lambda;
    let rival = complex_directions(domain.dim(), UNIQUENESS_PROBES, 0x5eed)
        .par_iter()
        .any(|d| match domain.shape.ray_exit(q, d) {
            Ok(t) => t <= lambda + UNIQUENESS_SLACK && q.along(d, t).distance(&b) > separation,
            Err(_) => false,
        });
    if rival {
        return Err(SqueezeError::NonUniqueNearestPoint);
    }
    Ok((b, nu))
}

/// Extreme normal curvatures (min, max) of {ρ = 0} at a point with real
/// gradient `g` and real Hessian `hess` of ρ.
fn tangential_curvatures(hess: &DMatrix<f64>, g: &nalgebra::DVector<f64>) -> (f64, f64) {
    let m = g.len();
    let gn = g.norm();
    let unit = g / gn;
    let proj = DMatrix::<f64>::identity(m, m) - &unit * unit.transpose();
    let eig = SymmetricEigen::new(&proj * hess * &proj / gn);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (k, v) in eig.eigenvalues.iter().enumerate() {
        if eig.eigenvectors.column(k).dot(&unit).abs() < 0.5 {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
    }
    (lo, hi)
}

/// ‖z − b‖² / (2 Re⟨b − z, ν⟩), the radius of the sphere tangent at b that
/// passes through z. `None` when z lies on or beyond the tangent plane.
fn tangent_sphere_radius(z: &CPoint, b: &CPoint, nu: &CPoint) -> Option<f64> {
    let d = b - z;
    let den = 2.0 * d.re_inner(nu);
    if den > 0.0 {
        Some(d.norm_sqr() / den)
    } else {
        None
    }
}

/// Radius R of the smallest sphere tangent to ∂Ω at b (outward normal ν)
/// that encloses Ω, inflated by a relative `ENVELOPE_INFLATION`.
pub fn envelope_radius(domain: &ConvexDomainSpec, b: &CPoint, nu: &CPoint, samples: usize, seed: u64) -> Result<f64> {
    let pts = domain.boundary_samples(samples, seed)?;
    let diameter = pts.iter().map(|z| z.distance(b)).fold(0.0, f64::max);
    // beyond this the sup is treated as divergent (flat boundary)
    let cap = 1e6 * diameter.max(1e-12);
    let near = 1e-7 * diameter.max(1e-12);

    let ratio = |z: &CPoint| -> Result<Option<f64>> {
        if z.distance(b) <= near {
            return Ok(None);
        }
        match tangent_sphere_radius(z, b, nu) {
            Some(r) if r <= cap => Ok(Some(r)),
            _ => Err(SqueezeError::NotSphericallyExtreme),
        }
    };
    let values: Vec<Option<f64>> = pts.par_iter().map(ratio).collect::<Result<_>>()?;
    let (best_idx, mut best) = values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|r| (i, r)))
        .fold((usize::MAX, 0.0), |acc, (i, r)| if r > acc.1 { (i, r) } else { acc });

    if best_idx != usize::MAX {
        let objective = |d: &CPoint| -> f64 {
            domain
                .boundary_point(d)
                .ok()
                .and_then(|z| ratio(&z).ok().flatten())
                .unwrap_or(0.0)
        };
        let start = (&pts[best_idx] - &domain.witness).normalized().expect("boundary differs from witness");
        best = best.max(maximize_on_sphere(start, best, objective));
    }

    // ratio limit as z → b along the boundary
    if let Some(quadric) = domain.shape.quadric() {
        let (kappa_min, _) = tangential_curvatures(&(&quadric.matrix * 2.0), &quadric.gradient(b));
        if !(kappa_min > 0.0) || 1.0 / kappa_min > cap {
            return Err(SqueezeError::NotSphericallyExtreme);
        }
        best = best.max(1.0 / kappa_min);
    }
    if !(best > 0.0) {
        return Err(SqueezeError::NotSphericallyExtreme);
    }
    Ok(best * (1.0 + ENVELOPE_INFLATION))
}

/// Compass search over unit directions in ℝ²ⁿ.
fn maximize_on_sphere(mut d: CPoint, mut value: f64, f: impl Fn(&CPoint) -> f64) -> f64 {
    let m = 2 * d.dim();
    let mut step = 0.05;
    while step > 1e-7 {
        let mut improved = false;
        for axis in 0..m {
            for sign in [1.0, -1.0] {
                let mut v = d.to_real();
                v[axis] += sign * step;
                let Some(cand) = CPoint::from_real(&v).normalized() else { continue };
                let val = f(&cand);
                if val > value {
                    value = val;
                    d = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    value
}

/// Nearest point, normal, λ_q and the sphere envelope at q.
pub fn contact_data(domain: &ConvexDomainSpec, q: &CPoint, samples: usize, seed: u64) -> Result<ContactData> {
    let (b, nu) = nearest_boundary(domain, q)?;
    let lambda = q.distance(&b);
    let radius = envelope_radius(domain, &b, &nu, samples, seed)?;
    let center = &b - &nu.scale(radius);
    Ok(ContactData {
        q: q.clone(),
        b,
        nu,
        lambda,
        radius,
        center,
    })
}

/// A_q(z) = U(z − b) with U unitary and U(q − b) = (λ_q, 0, …, 0).
///
/// The first row of U is (q − b)*/λ_q; the others come from pivoted
/// Gram–Schmidt on the canonical basis with real positive pivots.
pub fn centering_map(contact: &ContactData) -> Result<AffineMap> {
    let n = contact.q.dim();
    let e = (&contact.q - &contact.b)
        .normalized()
        .ok_or_else(|| SqueezeError::invalid("base point coincides with its nearest boundary point"))?;
    let mut rows = vec![e.clone()];
    rows.extend(orthonormal_complement(&[e], n));
    let u = CMatrix::from_fn(n, n, |i, j| rows[i][j].conj());
    let shift = crate::point::mat_vec(&u, &contact.b);
    AffineMap::new(u, -&shift)
}

/// Hermitian part H(z′) of the quadratic term of the boundary graph
/// 2 Re w₁ = Q(w) + o(‖w‖²) in the coordinates w = A_q(z).
///
/// Only the z′-block of Q enters; terms in Im w₁ and the pluriharmonic
/// part Re Σ a_jk z_j z_k are discarded.
pub fn hermitian_form_at(domain: &ConvexDomainSpec, contact: &ContactData, a: &AffineMap) -> Result<HermitianForm> {
    let hb = domain.boundary_hessian(&contact.b)?;
    let n = contact.q.dim();
    let back = realify(a.inverse_matrix());
    let grad = back.transpose() * &hb.gradient;
    let hess = back.transpose() * &hb.hessian * &back;
    let scale = grad.norm();
    let m = n - 1;
    let q = |r: usize, c: usize| hess[(2 + r, 2 + c)] / scale;
    let h = CMatrix::from_fn(m, m, |j, k| {
        let (xj, yj, xk, yk) = (2 * j, 2 * j + 1, 2 * k, 2 * k + 1);
        Complex64::new(
            0.5 * (q(xj, xk) + q(yj, yk)),
            0.5 * (q(yj, xk) - q(xj, yk)),
        )
    });
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let form = HermitianForm::new(h)?;
    let c0 = form.min_eigenvalue();
    if m > 0 && !(c0 > MIN_C0) {
        return Err(SqueezeError::NotStronglyConvex { c0 });
    }
    Ok(form)
}

/// L(z) = (z₁, S z′) with S the principal square root of H, so that
/// |L(z)₁|² + ‖L(z)′‖² = |z₁|² + H(z′).
pub fn siegel_linear(form: &HermitianForm) -> Result<AffineMap> {
    let m = form.dim();
    let c0 = form.min_eigenvalue();
    if m > 0 && !(c0 > MIN_C0) {
        return Err(SqueezeError::NotStronglyConvex { c0 });
    }
    let s = hermitian_sqrt(&form.matrix);
    let l = CMatrix::from_fn(m + 1, m + 1, |i, j| match (i, j) {
        (0, 0) => Complex64::new(1.0, 0.0),
        (0, _) | (_, 0) => Complex64::new(0.0, 0.0),
        _ => s[(i - 1, j - 1)],
    });
    AffineMap::linear(l)
}

/// The ingredients of G = L ∘ κ ∘ Λ_λ ∘ A_q at one base point.
#[derive(Clone, Debug)]
pub struct StrictChain {
    pub contact: ContactData,
    pub form: HermitianForm,
    /// Atoms [A_q, Λ_λ, κ, L].
    pub chain: MapChain,
    /// ‖G(q)‖, zero up to rounding.
    pub base_norm: f64,
}

pub fn build_strict_chain(domain: &ConvexDomainSpec, q: &CPoint, opts: &RadiusOptions) -> Result<StrictChain> {
    let contact = contact_data(domain, q, opts.boundary_samples, opts.seed)?;
    if !(contact.lambda >= LAMBDA_FLOOR) {
        return Err(SqueezeError::invalid(format!(
            "distance to the boundary {:e} is below the floor {LAMBDA_FLOOR:e}",
            contact.lambda
        )));
    }
    let a = centering_map(&contact)?;
    let form = hermitian_form_at(domain, &contact, &a)?;
    let l = siegel_linear(&form)?;
    let n = q.dim();
    let chain = MapChain::new(
        n,
        vec![
            MapAtom::Affine(a),
            MapAtom::Stretch { lambda: contact.lambda },
            MapAtom::Cayley { dim: n },
            MapAtom::Affine(l),
        ],
    )?;
    let base_norm = chain.apply(q)?.norm();
    Ok(StrictChain {
        contact,
        form,
        chain,
        base_norm,
    })
}

/// Certificate for the normalized chain (1/r_out)·G, recentered by a ball
/// automorphism when rounding leaves ‖G(q)‖ above `RECENTER_TOL`.
pub fn strict_bound(domain: &ConvexDomainSpec, q: &CPoint, opts: &RadiusOptions) -> Result<BoundCertificate> {
    let sc = build_strict_chain(domain, q, opts)?;
    let outer = outer_radius(&sc.chain, domain, opts)?;
    let r_out = outer.value;
    let mut chain = sc.chain.clone().then(MapAtom::Scale { factor: 1.0 / r_out })?;
    let drift = chain.apply(q)?;
    let recentered = drift.norm() > RECENTER_TOL;
    if recentered {
        chain = chain.then(MapAtom::BallAutomorphism { center: drift })?;
    }
    let inner = inner_radius(&chain, domain, opts)?;
    let bound = inner.value;
    let c0 = sc.form.min_eigenvalue();

    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("lambda_q".to_string(), sc.contact.lambda);
    diagnostics.insert("envelope_radius".to_string(), sc.contact.radius);
    diagnostics.insert("c0".to_string(), if c0.is_finite() { c0 } else { 0.0 });
    diagnostics.insert("base_norm".to_string(), sc.base_norm);
    diagnostics.insert("recentered".to_string(), if recentered { 1.0 } else { 0.0 });
    diagnostics.insert("direction_count".to_string(), inner.direction_count as f64);
    diagnostics.insert("angular_gap".to_string(), inner.angular_gap);
    diagnostics.insert("refinement_tolerance".to_string(), inner.refinement_tolerance);
    diagnostics.insert("outer_angular_gap".to_string(), outer.angular_gap);

    Ok(BoundCertificate {
        pipeline: Pipeline::Strict,
        domain: domain.clone(),
        point: q.clone(),
        chain,
        r_in: bound * r_out,
        r_out,
        bound,
        diagnostics,
    })
}

/// How q(t) approaches the boundary point p.
#[derive(Clone, Debug, PartialEq)]
pub enum Approach {
    /// q(t) = p − t·ν.
    Normal,
    /// q(t) = p − t·ν + t^α·τ with α ∈ (1/2, 1) and τ a real unit tangent.
    Tangential { alpha: f64, tangent: CPoint },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub t: f64,
    pub lambda_q: f64,
    pub r_in: f64,
    pub r_out: f64,
    pub bound: f64,
}

/// Base points q(t) for `t_grid` sorted by decreasing t.
pub fn approach_points(domain: &ConvexDomainSpec, p: &CPoint, approach: &Approach, t_grid: &[f64]) -> Result<Vec<(f64, CPoint)>> {
    if t_grid.is_empty() {
        return Err(SqueezeError::invalid("t grid is empty"));
    }
    if t_grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(SqueezeError::invalid("t grid entries must be positive"));
    }
    if !domain.shape.is_smooth() {
        return Err(SqueezeError::NonSmoothKind);
    }
    let nu = domain.supporting_hyperplane_at(p)?.hyperplane.normal;
    if let Approach::Tangential { alpha, tangent } = approach {
        if !(*alpha > 0.5 && *alpha < 1.0) {
            return Err(SqueezeError::invalid("tangential exponent must lie in (1/2, 1)"));
        }
        tangent.check_dim(domain.dim())?;
        if (tangent.norm() - 1.0).abs() > 1e-9 || tangent.re_inner(&nu).abs() > 1e-9 {
            return Err(SqueezeError::invalid("tangent must be a unit vector orthogonal to the normal"));
        }
    }
    let mut grid = t_grid.to_vec();
    grid.sort_by(|a, b| b.total_cmp(a));
    grid.into_iter()
        .map(|t| {
            let mut q = p.along(&nu, -t);
            if let Approach::Tangential { alpha, tangent } = approach {
                q = q.along(tangent, t.powf(*alpha));
            }
            if domain.contains(&q) {
                Ok((t, q))
            } else {
                Err(SqueezeError::PointExited { t })
            }
        })
        .collect()
}

fn scan_certificates(
    domain: &ConvexDomainSpec,
    p: &CPoint,
    approach: &Approach,
    t_grid: &[f64],
    opts: &RadiusOptions,
) -> Result<Vec<(f64, BoundCertificate)>> {
    let points = approach_points(domain, p, approach, t_grid)?;
    points
        .par_iter()
        .map(|(t, q)| strict_bound(domain, q, opts).map(|c| (*t, c)))
        .collect()
}

/// Strict bounds along q(t) → p, rows ordered by decreasing t.
pub fn limit_scan(
    domain: &ConvexDomainSpec,
    p: &CPoint,
    approach: &Approach,
    t_grid: &[f64],
    opts: &RadiusOptions,
) -> Result<Vec<ScanRow>> {
    Ok(scan_certificates(domain, p, approach, t_grid, opts)?
        .into_iter()
        .map(|(t, c)| ScanRow {
            t,
            lambda_q: c.diagnostics["lambda_q"],
            r_in: c.r_in,
            r_out: c.r_out,
            bound: c.bound,
        })
        .collect())
}

/// Normalized chains (1/r_out)·G_t along the normal approach to p, each
/// replayed to confirm that it maps Ω into the unit ball.
pub fn exhaustion_maps(
    domain: &ConvexDomainSpec,
    p: &CPoint,
    t_grid: &[f64],
    opts: &RadiusOptions,
) -> Result<Vec<BoundCertificate>> {
    let certs = scan_certificates(domain, p, &Approach::Normal, t_grid, opts)?;
    let replay_opts = crate::certificate::ReplayOptions {
        seed: opts.seed,
        ..Default::default()
    };
    certs
        .into_iter()
        .map(|(_, c)| {
            let report = crate::certificate::replay(&c, &replay_opts);
            match report.checks.iter().find(|k| !k.passed) {
                None => Ok(c),
                Some(k) => Err(SqueezeError::InclusionViolated {
                    which: k.name.clone(),
                    witness: c.point.clone(),
                }),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast() -> RadiusOptions {
        RadiusOptions {
            boundary_samples: 10_000,
            ..RadiusOptions::default()
        }
    }

    fn ellipsoid_1_2() -> ConvexDomainSpec {
        ConvexDomainSpec::axis_ellipsoid(CPoint::zeros(2), &[1.0, 2.0]).unwrap()
    }

    fn pt(a: f64, b: f64) -> CPoint {
        CPoint::from_pairs(&[(a, 0.0), (b, 0.0)])
    }

    #[test]
    fn nearest_boundary_examples() {
        let ball = ConvexDomainSpec::unit_ball(2);
        let (b, nu) = nearest_boundary(&ball, &pt(0.7, 0.0)).unwrap();
        assert!(b.max_abs_diff(&pt(1.0, 0.0)) < 1e-12);
        assert!(nu.max_abs_diff(&pt(1.0, 0.0)) < 1e-12);
        assert!(matches!(
            nearest_boundary(&ball, &CPoint::zeros(2)),
            Err(SqueezeError::NonUniqueNearestPoint)
        ));
        let cube = ConvexDomainSpec::unit_cube(2);
        assert!(matches!(nearest_boundary(&cube, &CPoint::zeros(2)), Err(SqueezeError::NonSmoothKind)));

        let e = ellipsoid_1_2();
        let q = CPoint::from_pairs(&[(0.9, 0.0), (0.1, 0.0)]);
        let (b, nu) = nearest_boundary(&e, &q).unwrap();
        assert!(e.level(&b).abs() < 1e-11);
        let d = (&q - &b).normalized().unwrap();
        assert!((d.re_inner(&nu) + 1.0).abs() < 1e-10);
    }

    #[test]
    fn envelope_radius_examples() {
        let ball = ConvexDomainSpec::unit_ball(2);
        let r = envelope_radius(&ball, &pt(1.0, 0.0), &pt(1.0, 0.0), 10_000, 0).unwrap();
        assert!((r - 1.0).abs() < 1e-5, "{r}");
        let e = ellipsoid_1_2();
        let r = envelope_radius(&e, &pt(1.0, 0.0), &pt(1.0, 0.0), 10_000, 0).unwrap();
        assert!((r - 4.0).abs() < 1e-4, "{r}");
        let cube = ConvexDomainSpec::unit_cube(2);
        assert!(matches!(
            envelope_radius(&cube, &pt(1.0, 0.0), &pt(1.0, 0.0), 10_000, 0),
            Err(SqueezeError::NotSphericallyExtreme)
        ));
    }

    #[test]
    fn contact_invariants_hold() {
        let e = ellipsoid_1_2();
        let c = contact_data(&e, &CPoint::from_pairs(&[(0.5, 0.2), (0.7, -0.4)]), 10_000, 0).unwrap();
        assert!(c.invariant_violations(&e, 10_000, 3).is_empty());
    }

    #[test]
    fn centering_examples() {
        let ball = ConvexDomainSpec::unit_ball(2);
        let c = contact_data(&ball, &pt(0.9, 0.0), 1000, 0).unwrap();
        let a = centering_map(&c).unwrap();
        let u = a.matrix();
        assert!((u[(0, 0)] + Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((u[(1, 1)] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(a.apply(&pt(0.9, 0.0)).max_abs_diff(&pt(0.1, 0.0)) < 1e-12);
        assert!(a.apply(&CPoint::zeros(2)).max_abs_diff(&pt(1.0, 0.0)) < 1e-12);

        let e = ellipsoid_1_2();
        let c = contact_data(&e, &pt(0.99, 0.0), 1000, 0).unwrap();
        assert!((c.lambda - 0.01).abs() < 1e-12);
        let a = centering_map(&c).unwrap();
        assert!(a.apply(&pt(0.99, 0.0)).max_abs_diff(&pt(0.01, 0.0)) < 1e-12);
        // A_q(Ω) ⊂ 𝔹((R, 0), R)
        let shifted = pt(c.radius, 0.0);
        for z in e.boundary_samples(10_000, 1).unwrap() {
            assert!(a.apply(&z).distance(&shifted) <= c.radius + 1e-7);
        }
    }

    fn form_for(d: &ConvexDomainSpec, q: &CPoint) -> HermitianForm {
        let c = contact_data(d, q, 1000, 0).unwrap();
        hermitian_form_at(d, &c, &centering_map(&c).unwrap()).unwrap()
    }

    #[test]
    fn hermitian_form_examples() {
        let h = form_for(&ConvexDomainSpec::unit_ball(2), &pt(0.9, 0.0));
        assert!((h.matrix[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let h = form_for(&ellipsoid_1_2(), &pt(0.99, 0.0));
        assert!((h.matrix[(0, 0)] - Complex64::new(0.25, 0.0)).norm() < 1e-12);
        assert!((h.min_eigenvalue() - 0.25).abs() < 1e-12);

        // distinct real and imaginary curvature in z₂ averages
        let d = ConvexDomainSpec::diagonal_real_ellipsoid(CPoint::zeros(2), vec![1.0, 1.0], vec![1.0, 2.0]).unwrap();
        let h = form_for(&d, &pt(0.95, 0.0));
        let want = 0.5 * (1.0 + 0.25);
        assert!((h.matrix[(0, 0)].re - want).abs() < 1e-12, "{}", h.matrix[(0, 0)]);
    }

    #[test]
    fn hermitian_form_is_phase_average_of_graph_quadratic() {
        // generic tilted ellipsoid, n = 3: compare H with the circle average
        // of the real quadratic term, computed from second differences of
        // the defining function in centered coordinates
        let m = CMatrix::from_fn(3, 3, |i, j| match (i, j) {
            (0, 0) => Complex64::new(1.0, 0.0),
            (1, 1) => Complex64::new(0.6, 0.0),
            (2, 2) => Complex64::new(0.3, 0.0),
            (0, 1) => Complex64::new(0.1, 0.2),
            (1, 0) => Complex64::new(0.1, -0.2),
            (1, 2) => Complex64::new(-0.05, 0.1),
            (2, 1) => Complex64::new(-0.05, -0.1),
            _ => Complex64::new(0.0, 0.0),
        });
        let d = ConvexDomainSpec::hermitian_ellipsoid(CPoint::zeros(3), m).unwrap();
        let q = CPoint::from_pairs(&[(0.6, 0.1), (0.3, -0.2), (0.1, 0.4)]);
        let c = contact_data(&d, &q, 1000, 0).unwrap();
        let a = centering_map(&c).unwrap();
        let h = hermitian_form_at(&d, &c, &a).unwrap();
        let rho = |w: &CPoint| d.level(&a.invert(w));
        let g = {
            let e = 1e-5;
            (rho(&CPoint::from_pairs(&[(e, 0.0), (0.0, 0.0), (0.0, 0.0)]))
                - rho(&CPoint::from_pairs(&[(-e, 0.0), (0.0, 0.0), (0.0, 0.0)])))
                / (2.0 * e)
        };
        let zp = [Complex64::new(0.3, -0.7), Complex64::new(0.5, 0.2)];
        let steps = 64;
        let s = 1e-3;
        let mut avg = 0.0;
        for k in 0..steps {
            let ph = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / steps as f64);
            let w = CPoint::new(vec![Complex64::new(0.0, 0.0), zp[0] * ph * s, zp[1] * ph * s]);
            // ρ(0, z′) ≈ ½ z′ᵀ Hess z′ and 2u = Q/|g| with g = ∂ρ/∂u < 0
            avg += 2.0 * rho(&w) / (s * s) / (-g);
        }
        avg /= steps as f64;
        assert!((avg - h.eval(&zp)).abs() < 1e-4, "{avg} vs {}", h.eval(&zp));
    }

    #[test]
    fn siegel_linear_examples() {
        let id = siegel_linear(&HermitianForm::identity(1)).unwrap();
        assert!((id.matrix() - CMatrix::identity(2, 2)).norm() < 1e-14);
        let quarter = HermitianForm::new(CMatrix::from_element(1, 1, Complex64::new(0.25, 0.0))).unwrap();
        let l = siegel_linear(&quarter).unwrap();
        assert!((l.matrix()[(1, 1)] - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        let diag = CMatrix::from_fn(2, 2, |i, j| {
            Complex64::new(if i != j { 0.0 } else if i == 0 { 2.0 } else { 1.0 }, 0.0)
        });
        let l = siegel_linear(&HermitianForm::new(diag).unwrap()).unwrap();
        assert!((l.matrix()[(1, 1)].re - 2f64.sqrt()).abs() < 1e-14);
        assert!((l.matrix()[(2, 2)].re - 1.0).abs() < 1e-14);
        let flat = HermitianForm::new(CMatrix::zeros(1, 1)).unwrap();
        assert!(matches!(siegel_linear(&flat), Err(SqueezeError::NotStronglyConvex { .. })));
    }

    #[test]
    fn strict_bound_examples() {
        let ball = ConvexDomainSpec::unit_ball(2);
        let cert = strict_bound(&ball, &pt(0.9, 0.0), &fast()).unwrap();
        assert!(cert.bound > 0.5 && cert.bound < 1.0, "{}", cert.bound);
        assert!(cert.r_out >= 1.0 - 1e-9 && cert.r_out < 1.5, "{}", cert.r_out);
        assert!(crate::certificate::replay(&cert, &Default::default()).passed());

        let cert = strict_bound(&ball, &pt(1.0 - 1e-3, 0.0), &fast()).unwrap();
        assert!(cert.bound >= 0.95, "{}", cert.bound);
        assert!(matches!(
            strict_bound(&ball, &CPoint::zeros(2), &fast()),
            Err(SqueezeError::NonUniqueNearestPoint)
        ));
    }

    #[test]
    fn ball_image_is_the_explicit_ellipsoid() {
        // G(𝔹) = {1 − |w₁|² − ‖w′‖² > (λ/2)|1 − w₁|²}
        let ball = ConvexDomainSpec::unit_ball(2);
        let lambda = 1e-3;
        let sc = build_strict_chain(&ball, &pt(1.0 - lambda, 0.0), &fast()).unwrap();
        assert!(sc.base_norm < 1e-12);
        let mut r = crate::sampling::rng(11);
        for _ in 0..1000 {
            let z = crate::sampling::random_in_ball(2, 1.0, &mut r);
            let w = sc.chain.apply(&z).unwrap();
            let one = Complex64::new(1.0, 0.0);
            let lhs = 1.0 - w.norm_sqr();
            let rhs = 0.5 * sc.contact.lambda * (one - w[0]).norm_sqr();
            // the defining functions agree up to the positive factor 2λ/|1 + w₁|²
            let f_ball = 1.0 - z.norm_sqr();
            let factor = 2.0 * sc.contact.lambda / (one + w[0]).norm_sqr();
            assert!((factor * (lhs - rhs) - f_ball).abs() < 1e-9, "{z}");
        }
    }

    #[test]
    fn limit_scans_converge() {
        let ball = ConvexDomainSpec::unit_ball(2);
        let p = pt(1.0, 0.0);
        let grid = [0.3, 0.1, 0.03, 0.01, 0.003, 0.001];
        let rows = limit_scan(&ball, &p, &Approach::Normal, &grid, &fast()).unwrap();
        assert_eq!(rows.len(), 6);
        for w in rows.windows(2) {
            assert!(w[0].t > w[1].t);
            assert!(w[1].bound >= w[0].bound - 1e-3, "{rows:?}");
        }
        assert!(rows[5].bound >= 0.95);

        let exit = Approach::Tangential {
            alpha: 0.6,
            tangent: CPoint::from_pairs(&[(0.0, 0.0), (1.0, 0.0)]),
        };
        let thin = ConvexDomainSpec::axis_ellipsoid(CPoint::zeros(2), &[1.0, 0.5]).unwrap();
        assert!(matches!(
            limit_scan(&thin, &p, &exit, &[0.3], &fast()),
            Err(SqueezeError::PointExited { .. })
        ));
        assert!(matches!(
            limit_scan(&ball, &p, &Approach::Normal, &[], &fast()),
            Err(SqueezeError::InvalidInput(_))
        ));
    }

    #[test]
    fn exhaustion_examples() {
        let ball = ConvexDomainSpec::unit_ball(2);
        let p = pt(1.0, 0.0);
        let certs = exhaustion_maps(&ball, &p, &[0.1, 0.01, 0.001], &fast()).unwrap();
        assert!(certs.windows(2).all(|w| w[1].bound > w[0].bound));
        assert!(certs[2].bound < 1.0 + 1e-9);
        assert_eq!(exhaustion_maps(&ball, &p, &[0.01], &fast()).unwrap().len(), 1);
        assert!(matches!(exhaustion_maps(&ball, &p, &[], &fast()), Err(SqueezeError::InvalidInput(_))));
    }
}
