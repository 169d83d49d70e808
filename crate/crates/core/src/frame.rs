//! Minimal-slice orthonormal frames.
//!
//! At an interior point q the frame is built inductively: e¹ points to a
//! nearest boundary point, and each e^{k+1} minimizes the exit distance over
//! unit directions orthogonal to e¹..e^k.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{ConvexDomainSpec, Quadric, Shape};
use crate::error::{Result, SqueezeError};
use crate::linalg::{nearest_on_ellipsoid, orthonormal_complement};
use crate::point::CPoint;
use crate::sampling::sphere_directions;

/// Candidates whose exit distance is within this of the minimum tie.
pub const TIE_TOL: f64 = 1e-8;
const LEX_TOL: f64 = 1e-9;
const CLUSTER_RADIUS: f64 = 1e-4;
const STARTS_PER_REAL_DIM: usize = 64;
const GRADIENT_TOL: f64 = 1e-10;
const SLICE_SEED: u64 = 0x51ce;

/// Exit distance λ(q, V) with an attaining direction and contact point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Slice {
    pub radius: f64,
    pub direction: CPoint,
    pub contact: CPoint,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Frame {
    pub base: CPoint,
    pub directions: Vec<CPoint>,
    pub radii: Vec<f64>,
    pub contacts: Vec<CPoint>,
}

impl Frame {
    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// Descriptions of every violated frame invariant; empty when valid.
    pub fn invariant_violations(&self, domain: &ConvexDomainSpec) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.dim();
        for j in 0..n {
            for k in 0..n {
                let want = if j == k { 1.0 } else { 0.0 };
                let got = self.directions[j].inner(&self.directions[k]);
                if (got - Complex64::new(want, 0.0)).norm() > 1e-10 {
                    out.push(format!("<e{j}, e{k}> = {got}"));
                }
            }
        }
        for k in 0..n {
            let expected = self.base.along(&self.directions[k], self.radii[k]);
            if expected.max_abs_diff(&self.contacts[k]) > 1e-9 {
                out.push(format!("contact {k} is not q + λe"));
            }
            let residual = domain.level(&self.contacts[k]).abs();
            if residual > 1e-9 {
                out.push(format!("contact {k} off the boundary by {residual:e}"));
            }
            let offset = &self.contacts[k] - &self.base;
            for l in 0..k {
                if offset.inner(&self.directions[l]).norm() > 1e-9 {
                    out.push(format!("contact {k} not orthogonal to e{l}"));
                }
            }
            if k > 0 && self.radii[k - 1] > self.radii[k] + 1e-9 {
                out.push(format!("radii decrease at {k}"));
            }
        }
        out
    }
}

/// Orthogonal projection onto span(basis) of `a`.
fn project(basis: &[CPoint], a: &CPoint) -> CPoint {
    let mut out = CPoint::zeros(a.dim());
    for v in basis {
        out = &out + &v.scale_c(a.inner(v));
    }
    out
}

/// Directions worth evaluating for the slice minimum of `shape`.
fn candidates(shape: &Shape, q: &CPoint, basis: &[CPoint], out: &mut Vec<CPoint>) {
    let n = q.dim();
    match shape {
        Shape::Polytope { planes } => {
            for p in planes {
                let pa = project(basis, &p.normal);
                if pa.norm() > 1e-14 {
                    out.extend(pa.normalized());
                }
            }
        }
        Shape::Polydisc { center, .. } => {
            for k in 0..n {
                let pe = project(basis, &CPoint::basis(n, k));
                if pe.norm() <= 1e-14 {
                    continue;
                }
                let d = q[k] - center[k];
                let phase = if d.norm() > 0.0 {
                    d / d.norm()
                } else {
                    Complex64::new(1.0, 0.0)
                };
                if let Some(w) = pe.scale_c(phase).normalized() {
                    out.push(w);
                }
            }
        }
        Shape::Intersection(parts) => {
            for p in parts {
                candidates(p, q, basis, out);
            }
        }
        Shape::Ball { quadric, .. }
        | Shape::HermitianEllipsoid { quadric, .. }
        | Shape::DiagonalRealEllipsoid { quadric, .. } => {
            // the secular solution is exact and unique; inexact descent
            // minimizers would only compete with it as spurious near-ties
            if let Some(w) = secular_direction(quadric, q, basis) {
                out.push(w);
                return;
            }
            for v in basis {
                for ph in [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)] {
                    out.push(v.scale_c(Complex64::new(ph.0, ph.1)));
                }
            }
            out.extend(multistart(quadric, q, basis));
        }
    }
}

/// Real 2n × 2m matrix whose columns v_j, i·v_j span the slice.
fn real_basis(basis: &[CPoint]) -> DMatrix<f64> {
    let n = basis[0].dim();
    let mut b = DMatrix::zeros(2 * n, 2 * basis.len());
    for (j, v) in basis.iter().enumerate() {
        let iv = v.scale_c(Complex64::new(0.0, 1.0));
        b.set_column(2 * j, &v.to_dvector());
        b.set_column(2 * j + 1, &iv.to_dvector());
    }
    b
}

/// Exact slice minimizer for a quadric: the nearest point of the slice
/// ellipsoid to q. `None` when that point is not unique.
fn secular_direction(quadric: &Quadric, q: &CPoint, basis: &[CPoint]) -> Option<CPoint> {
    let b = real_basis(basis);
    let d = q.to_dvector() - &quadric.center;
    let a = b.transpose() * &quadric.matrix * &b;
    let lin = b.transpose() * (&quadric.matrix * &d);
    let c0 = d.dot(&(&quadric.matrix * &d));
    let chol = a.clone().cholesky()?;
    let p = chol.solve(&lin);
    let kappa = 1.0 + lin.dot(&p) - c0;
    if !(kappa > 0.0) {
        return None;
    }
    let s = nearest_on_ellipsoid(&(a / kappa), &p)?;
    let x: DVector<f64> = s - p;
    CPoint::from_real((b * x).as_slice()).normalized()
}

/// Riemannian descent of the exit distance on the unit sphere of the slice,
/// from quasi-uniform starts.
fn multistart(quadric: &Quadric, q: &CPoint, basis: &[CPoint]) -> Vec<CPoint> {
    let b = real_basis(basis);
    let m = b.ncols();
    let starts = sphere_directions(m, STARTS_PER_REAL_DIM * m, SLICE_SEED);
    let qv = q.to_dvector();
    let proj = &b * b.transpose();
    starts
        .par_iter()
        .map(|s| {
            let w0 = &b * DVector::from_column_slice(s);
            descend(quadric, &qv, &proj, w0)
        })
        .map(|w| CPoint::from_real(w.as_slice()))
        .collect()
}

fn exit_and_gradient(
    quadric: &Quadric,
    q: &DVector<f64>,
    proj: &DMatrix<f64>,
    w: &DVector<f64>,
) -> (f64, DVector<f64>) {
    let t = quadric.ray_exit_real(q, w);
    let p = q + w * t;
    let nrm = &quadric.matrix * (&p - &quadric.center);
    let g = nrm.clone() * (-t / nrm.dot(w));
    let mut g = proj * g;
    let radial = g.dot(w);
    g -= w * radial;
    (t, g)
}

fn descend(
    quadric: &Quadric,
    q: &DVector<f64>,
    proj: &DMatrix<f64>,
    mut w: DVector<f64>,
) -> DVector<f64> {
    let (mut t, mut g) = exit_and_gradient(quadric, q, proj, &w);
    let mut step = 0.5 / t.max(1e-12);
    for _ in 0..500 {
        let gn = g.norm();
        if gn <= GRADIENT_TOL {
            break;
        }
        let mut accepted = false;
        for _ in 0..60 {
            // re-projecting keeps rounding drift from leaving the slice
            let mut cand = proj * (&w - &g * step);
            cand /= cand.norm();
            let (tc, gc) = exit_and_gradient(quadric, q, proj, &cand);
            if tc <= t - 1e-4 * step * gn * gn {
                w = cand;
                t = tc;
                g = gc;
                accepted = true;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    w
}

/// Lexicographic comparison of interleaved (Re, Im) coordinates with an
/// absolute tolerance.
fn lex_cmp(a: &CPoint, b: &CPoint) -> Ordering {
    for (x, y) in a.to_real().iter().zip(b.to_real()) {
        if (x - y).abs() > LEX_TOL {
            return x.total_cmp(&y);
        }
    }
    Ordering::Equal
}

/// Deterministic choice among near-minimizers.
///
/// Candidates whose phase-normalized keys lie within `CLUSTER_RADIUS` of each
/// other approximate the same minimizer; each cluster is represented by its
/// most accurate member (smallest exit distance, then an already
/// phase-normalized vector, then input order). The representative with the
/// lexicographically largest key wins.
fn select_tie(ties: Vec<(f64, CPoint)>) -> (f64, CPoint) {
    let mut order: Vec<usize> = (0..ties.len()).collect();
    let normalized: Vec<bool> = ties
        .iter()
        .map(|(_, w)| *w == w.phase_normalized(1e-12))
        .collect();
    order.sort_by(|&i, &j| {
        let (ti, tj) = (ties[i].0, ties[j].0);
        if (ti - tj).abs() > 1e-12 {
            return ti.total_cmp(&tj);
        }
        normalized[j].cmp(&normalized[i]).then(i.cmp(&j))
    });
    let keys: Vec<CPoint> = ties.iter().map(|(_, w)| w.phase_normalized(1e-12)).collect();
    let mut reps: Vec<usize> = Vec::new();
    for &i in &order {
        if !reps.iter().any(|&r| keys[r].distance(&keys[i]) < CLUSTER_RADIUS) {
            reps.push(i);
        }
    }
    let winner = reps
        .into_iter()
        .reduce(|a, b| match lex_cmp(&keys[b], &keys[a]) {
            Ordering::Greater => b,
            _ => a,
        })
        .expect("nonempty tie set");
    ties[winner].clone()
}

/// λ(q, V) = min over unit w ∈ span(basis) of the exit distance from q.
///
/// Among directions within `TIE_TOL` of the minimum, the one whose
/// phase-normalized coordinates are lexicographically largest is returned
/// (see `select_tie`).
pub fn slice_radius(domain: &ConvexDomainSpec, q: &CPoint, basis: &[CPoint]) -> Result<Slice> {
    let n = domain.dim();
    q.check_dim(n)?;
    if basis.is_empty() {
        return Err(SqueezeError::invalid("slice needs at least one direction"));
    }
    for v in basis {
        v.check_dim(n)?;
    }
    if !domain.contains(q) {
        return Err(SqueezeError::invalid("slice base point is not interior"));
    }
    let mut raw = Vec::new();
    candidates(&domain.shape, q, basis, &mut raw);
    let mut all = Vec::with_capacity(2 * raw.len());
    for w in raw {
        let pn = w.phase_normalized(1e-12);
        all.push(w);
        all.push(pn);
    }
    let scored: Vec<(f64, CPoint)> = all
        .into_iter()
        .filter_map(|w| {
            let w = w.normalized()?;
            match domain.shape.ray_exit(q, &w) {
                Ok(t) => Some(Ok((t, w))),
                Err(SqueezeError::Unbounded) => None,
                Err(e) => Some(Err(e)),
            }
        })
        .collect::<Result<_>>()?;
    let best = scored
        .iter()
        .map(|(t, _)| *t)
        .fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(SqueezeError::UnboundedSlice);
    }
    let ties: Vec<(f64, CPoint)> = scored
        .into_iter()
        .filter(|(t, _)| *t <= best + TIE_TOL)
        .collect();
    let (radius, direction) = select_tie(ties);
    Ok(Slice {
        radius,
        contact: q.along(&direction, radius),
        direction,
    })
}

pub fn build_frame(domain: &ConvexDomainSpec, q: &CPoint) -> Result<Frame> {
    let n = domain.dim();
    q.check_dim(n)?;
    if !domain.contains(q) {
        return Err(SqueezeError::invalid("frame base point is not interior"));
    }
    let mut directions: Vec<CPoint> = Vec::with_capacity(n);
    let mut radii = Vec::with_capacity(n);
    let mut contacts = Vec::with_capacity(n);
    for _ in 0..n {
        let basis = orthonormal_complement(&directions, n);
        let s = slice_radius(domain, q, &basis)?;
        // re-orthogonalize against earlier directions to remove drift
        let mut e = s.direction.clone();
        for d in &directions {
            e = &e - &d.scale_c(e.inner(d));
        }
        let e = e.normalized().expect("unit slice direction");
        radii.push(s.radius);
        contacts.push(q.along(&e, s.radius));
        directions.push(e);
    }
    Ok(Frame {
        base: q.clone(),
        directions,
        radii,
        contacts,
    })
}
