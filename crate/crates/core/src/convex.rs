//! Lower bounds at arbitrary interior points of bounded convex domains.
//!
//! The frame at q gives the stretch L (frame directions to coordinate axes,
//! radii to 1). After L the domain contains the unit acorn {Σ|z_k| < 1} and
//! lies in n supporting halfspaces whose normals form a lower-triangular
//! matrix B. Coordinatewise Möbius maps send each halfspace into a disc, so
//! Φ∘B∘L(Ω) lies in the unit polydisc and (1/√n)·Φ∘B∘L maps into the ball.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::certificate::{BoundCertificate, Pipeline};
use crate::domain::ConvexDomainSpec;
use crate::error::{Result, SqueezeError};
use crate::frame::{build_frame, Frame};
use crate::image::{boundary_max_norm, inner_radius, outer_radius, RadiusOptions};
use crate::maps::{pushforward_hyperplane, AffineMap, MapAtom, MapChain};
use crate::point::{CMatrix, CPoint};
use crate::sampling::complex_directions;

/// Trailing components above this abort the envelope.
pub const TRAILING_TOL: f64 = 1e-6;
const ACORN_SHRINK: f64 = 1e-7;
pub const ACORN_SAMPLES: usize = 10_000;

/// z ↦ Σ_k ⟨z − q, e^k⟩/λ^k ê^k.
pub fn stretch_map(frame: &Frame) -> AffineMap {
    let n = frame.dim();
    let m = CMatrix::from_fn(n, n, |k, j| frame.directions[k][j].conj() / frame.radii[k]);
    let t = -&crate::point::mat_vec(&m, &frame.base);
    AffineMap::new(m, t).expect("frame directions are orthonormal")
}

/// Rows of the lower-triangular envelope: the halfspaces
/// Re Σ_{ℓ≤k} a^{k,ℓ} z_ℓ < a^{k,k} contain L(Ω).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnvelopeRows {
    #[serde(serialize_with = "serialize_rows")]
    pub rows: Vec<Vec<Complex64>>,
    /// Largest |component ℓ > k| of each row before zeroing.
    pub trailing: Vec<f64>,
}

fn serialize_rows<S: serde::Serializer>(
    rows: &[Vec<Complex64>],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let pairs: Vec<Vec<[f64; 2]>> = rows
        .iter()
        .map(|r| r.iter().map(|c| [c.re, c.im]).collect())
        .collect();
    serde::Serialize::serialize(&pairs, s)
}

impl EnvelopeRows {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Diagonal entries a^{k,k}, which serve as Möbius centers.
    pub fn diagonal(&self) -> Vec<f64> {
        self.rows.iter().enumerate().map(|(k, r)| r[k].re).collect()
    }

    /// The n × n lower-triangular matrix B.
    pub fn matrix(&self) -> CMatrix {
        let n = self.dim();
        CMatrix::from_fn(n, n, |k, l| {
            if l <= k {
                self.rows[k][l]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (k, row) in self.rows.iter().enumerate() {
            let norm: f64 = row.iter().map(|c| c.norm_sqr()).sum();
            if (norm - 1.0).abs() > 1e-10 {
                out.push(format!("row {k} has squared norm {norm}"));
            }
            let d = row[k];
            if d.im.abs() > 1e-6 || !(d.re > 0.0) {
                out.push(format!("row {k} diagonal {d} is not real positive"));
            }
            let biggest = row.iter().map(|c| c.norm()).fold(0.0, f64::max);
            if d.re < biggest - 1e-8 {
                out.push(format!("row {k} diagonal {} below max modulus {biggest}", d.re));
            }
            if self.trailing[k] >= TRAILING_TOL {
                out.push(format!("row {k} trailing {}", self.trailing[k]));
            }
        }
        out
    }
}

/// Row from a pushed-forward hyperplane Re⟨w, a′⟩ = b′ through ê_k:
/// a^{k,ℓ} = conj(a′_ℓ), rotated so a^{k,k} is real positive.
/// Returns (row truncated to ℓ ≤ k and renormalized, largest trailing
/// component and its index, imaginary defect of the diagonal before rotation).
fn row_from_normal(normal: &CPoint, k: usize) -> (Vec<Complex64>, (f64, usize), f64) {
    let full: Vec<Complex64> = normal.coords().iter().map(|c| c.conj()).collect();
    let d = full[k];
    let imag = if d.norm() > 0.0 { (d.im / d.norm()).abs() } else { 1.0 };
    let phase = if d.norm() > 0.0 {
        d.conj() / d.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let rotated: Vec<Complex64> = full.iter().map(|c| c * phase).collect();
    let trailing = rotated
        .iter()
        .enumerate()
        .skip(k + 1)
        .map(|(i, c)| (c.norm(), i))
        .fold((0.0, k + 1), |a, b| if b.0 > a.0 { b } else { a });
    let mut row: Vec<Complex64> = rotated[..=k].to_vec();
    row[k] = Complex64::new(row[k].re, 0.0);
    let norm = row.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for c in &mut row {
        *c /= norm;
    }
    (row, trailing, imag)
}

pub fn envelope_rows(domain: &ConvexDomainSpec, frame: &Frame, l: &AffineMap) -> Result<EnvelopeRows> {
    let n = frame.dim();
    let mut rows = Vec::with_capacity(n);
    let mut trailing = Vec::with_capacity(n);
    for k in 0..n {
        let support = domain.supporting_hyperplane_at(&frame.contacts[k])?;
        // at a vertex several constraints are active; keep the one whose
        // image is closest to the triangular structure
        let mut best: Option<(Vec<Complex64>, (f64, usize), f64)> = None;
        for h in &support.alternatives {
            let pushed = pushforward_hyperplane(l, h)?;
            let cand = row_from_normal(&pushed.normal, k);
            let defect = |c: &(Vec<Complex64>, (f64, usize), f64)| c.1 .0.max(c.2);
            if best.as_ref().map_or(true, |b| defect(&cand) < defect(b) - 1e-12) {
                best = Some(cand);
            }
        }
        let (row, (tr, tr_idx), im) = best.expect("support has at least one hyperplane");
        if tr > TRAILING_TOL {
            return Err(SqueezeError::EnvelopeViolation {
                row: k,
                component: tr_idx,
                value: tr,
            });
        }
        if im > TRAILING_TOL {
            return Err(SqueezeError::EnvelopeViolation {
                row: k,
                component: k,
                value: im,
            });
        }
        if k == 0 {
            rows.push(vec![Complex64::new(1.0, 0.0)]);
        } else {
            rows.push(row);
        }
        trailing.push(tr);
    }
    Ok(EnvelopeRows { rows, trailing })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AcornReport {
    pub samples: usize,
    pub failures: usize,
    /// Largest boundary residual of a pulled-back acorn point (negative when
    /// every sample is inside).
    pub worst_margin: f64,
    pub worst_point: CPoint,
    pub passed: bool,
}

/// Checks {Σ|w_k| < 1} ⊂ L(Ω) on quasi-uniform points of ∂A shrunk by 1 − 1e-7.
pub fn acorn_check(domain: &ConvexDomainSpec, l: &AffineMap, samples: usize, seed: u64) -> AcornReport {
    let n = domain.dim();
    let mut pts: Vec<CPoint> = complex_directions(n, samples, seed)
        .into_iter()
        .map(|d| {
            let l1: f64 = d.coords().iter().map(|c| c.norm()).sum();
            d.scale((1.0 - ACORN_SHRINK) / l1)
        })
        .collect();
    for k in 0..n {
        pts.push(CPoint::basis(n, k).scale(1.0 - ACORN_SHRINK));
    }
    let margins: Vec<(f64, bool)> = pts
        .par_iter()
        .map(|w| {
            let z = l.invert(w);
            (domain.level(&z), domain.contains(&z))
        })
        .collect();
    let (worst_idx, worst) = margins
        .iter()
        .enumerate()
        .map(|(i, m)| (i, m.0))
        .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    let failures = margins.iter().filter(|m| !m.1).count();
    AcornReport {
        samples: pts.len(),
        failures,
        worst_margin: worst,
        worst_point: pts[worst_idx].clone(),
        passed: failures == 0,
    }
}

/// [L, B, Φ, 1/√n] with Φ_k(ζ) = ζ/(2a^{k,k} − ζ).
pub fn build_convex_chain(frame: &Frame, rows: &EnvelopeRows) -> Result<MapChain> {
    let n = frame.dim();
    let l = stretch_map(frame);
    let b = AffineMap::linear(rows.matrix())?;
    MapChain::new(
        n,
        vec![
            MapAtom::Affine(l),
            MapAtom::Affine(b),
            MapAtom::CoordMoebius {
                centers: rows.diagonal(),
            },
            MapAtom::Scale {
                factor: 1.0 / (n as f64).sqrt(),
            },
        ],
    )
}

/// Certified lower bound for the squeezing function at `q`.
pub fn convex_bound(domain: &ConvexDomainSpec, q: &CPoint, opts: &RadiusOptions) -> Result<BoundCertificate> {
    let n = domain.dim();
    q.check_dim(n)?;
    if !domain.contains(q) {
        return Err(SqueezeError::invalid("point is not interior"));
    }
    let frame = build_frame(domain, q)?;
    let l = stretch_map(&frame);
    let rows = envelope_rows(domain, &frame, &l)?;
    let acorn = acorn_check(domain, &l, ACORN_SAMPLES, opts.seed);
    let mut chain = build_convex_chain(&frame, &rows)?;

    // the image lies in the unit ball by construction; measure to confirm
    let boundary_max = boundary_max_norm(&chain, domain, opts.boundary_samples, opts.seed)?;
    let mut r_out = 1.0;
    if boundary_max > 1.0 + crate::certificate::BOUNDARY_SLACK {
        r_out = outer_radius(&chain, domain, opts)?.value;
        chain = chain.then(MapAtom::Scale { factor: 1.0 / r_out })?;
    }
    let inner = inner_radius(&chain, domain, opts)?;
    let bound = inner.value;
    let base_residual = chain.apply(q)?.norm();

    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("delta_analytic".into(), 1.0 / (n as f64).sqrt());
    diagnostics.insert("base_residual".into(), base_residual);
    diagnostics.insert("boundary_max_norm".into(), boundary_max);
    diagnostics.insert("acorn_failures".into(), acorn.failures as f64);
    diagnostics.insert("acorn_worst_margin".into(), acorn.worst_margin);
    diagnostics.insert("direction_count".into(), inner.direction_count as f64);
    diagnostics.insert("angular_gap".into(), inner.angular_gap);
    diagnostics.insert("refinement_tolerance".into(), inner.refinement_tolerance);
    diagnostics.insert(
        "max_trailing".into(),
        rows.trailing.iter().cloned().fold(0.0, f64::max),
    );
    diagnostics.insert(
        "min_diagonal".into(),
        rows.diagonal().into_iter().fold(f64::INFINITY, f64::min),
    );
    for (k, lam) in frame.radii.iter().enumerate() {
        diagnostics.insert(format!("lambda_{}", k + 1), *lam);
    }
    Ok(BoundCertificate {
        pipeline: Pipeline::Convex,
        domain: domain.clone(),
        point: q.clone(),
        chain,
        r_in: bound * r_out,
        r_out,
        bound,
        diagnostics,
    })
}

/// Result of scanning many points: the smallest bound and per-point errors.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantScan {
    pub min_bound: f64,
    pub bounds: Vec<Option<f64>>,
    pub errors: Vec<(usize, SqueezeError)>,
}

/// min over `points` of the convex bound: a lower bound for the squeezing
/// constant restricted to the sample. Failed points are recorded and skipped.
pub fn constant_scan(domain: &ConvexDomainSpec, points: &[CPoint], opts: &RadiusOptions) -> Result<ConstantScan> {
    if points.is_empty() {
        return Err(SqueezeError::invalid("no points to scan"));
    }
    let results: Vec<Result<f64>> = points
        .par_iter()
        .map(|q| convex_bound(domain, q, opts).map(|c| c.bound))
        .collect();
    let mut errors = Vec::new();
    let mut bounds = Vec::with_capacity(points.len());
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(b) => bounds.push(Some(b)),
            Err(e) => {
                errors.push((i, e));
                bounds.push(None);
            }
        }
    }
    let min_bound = bounds.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
    if !min_bound.is_finite() {
        return Err(errors[0].1.clone());
    }
    Ok(ConstantScan {
        min_bound,
        bounds,
        errors,
    })
}
