//! Inner and outer radii of chain images, and chain self-checks.
//!
//! The inner radius is measured with exact inverse membership: a point w is
//! in F(Ω) iff F⁻¹(w) is defined and lies in Ω. The only unverified slack is
//! the angular gap between tested directions, which is reported. The outer
//! radius samples ∂Ω and relies on the maximum principle for ‖F‖.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::ConvexDomainSpec;
use crate::error::{Result, SqueezeError};
use crate::maps::{MapAtom, MapChain};
use crate::point::CPoint;
use crate::sampling::{angular_gap, axis_directions, complex_directions, random_in_ball, rng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusEstimate {
    pub value: f64,
    pub direction_count: usize,
    pub refinement_tolerance: f64,
    pub worst_direction: CPoint,
    /// Estimated largest angle (radians) between a unit vector and the
    /// nearest tested direction.
    pub angular_gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadiusOptions {
    /// Sphere directions for the inner radius; `None` picks 4096 for n ≤ 2
    /// and 65536 otherwise.
    pub directions: Option<usize>,
    pub boundary_samples: usize,
    pub tol: f64,
    pub seed: u64,
    /// Local search from the worst sampled directions.
    pub refine: bool,
}

impl Default for RadiusOptions {
    fn default() -> Self {
        RadiusOptions {
            directions: None,
            boundary_samples: 100_000,
            tol: 1e-6,
            seed: 0,
            refine: true,
        }
    }
}

impl RadiusOptions {
    pub fn direction_count(&self, n: usize) -> usize {
        self.directions
            .unwrap_or(if n <= 2 { 4096 } else { 65_536 })
    }
}

const GAP_PROBES: usize = 64;
const REFINE_STARTS: usize = 8;
const MARCH_START: f64 = 1e-3;
const MARCH_FACTOR: f64 = 1.25;
const MARCH_MAX_STEP: f64 = 1.0 / 32.0;
const MARCH_LIMIT: f64 = 1e6;
const COARSE_REL: f64 = 1e-2;
const MIN_ANGLE: f64 = 1e-7;
/// Singular-set clearance below which a chain is treated as singular on ∂Ω.
const CLOSURE_CLEARANCE: f64 = 1e-6;

/// Bracket [lo, hi] of the first exit of the ray t ↦ t·d from the image:
/// every marched point up to `lo` is inside and `hi` is outside.
fn march(chain: &MapChain, domain: &ConvexDomainSpec, d: &CPoint) -> (f64, f64) {
    let mut lo = 0.0;
    let mut r = MARCH_START;
    while r < MARCH_LIMIT {
        if !chain.membership_in_image(domain, &d.scale(r)) {
            return (lo, r);
        }
        lo = r;
        r = (r * MARCH_FACTOR).min(r + MARCH_MAX_STEP);
    }
    (lo, f64::INFINITY)
}

fn bisect(chain: &MapChain, domain: &ConvexDomainSpec, d: &CPoint, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if chain.membership_in_image(domain, &d.scale(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

fn exit_radius(chain: &MapChain, domain: &ConvexDomainSpec, d: &CPoint, tol: f64) -> f64 {
    let (lo, hi) = march(chain, domain, d);
    if !hi.is_finite() {
        return lo;
    }
    bisect(chain, domain, d, lo, hi, tol).0
}

/// Orthonormal basis of the real tangent space of the unit sphere at `d`.
fn tangent_basis(d: &CPoint) -> Vec<CPoint> {
    let m = 2 * d.dim();
    let dv = d.to_real();
    let mut out: Vec<Vec<f64>> = Vec::new();
    for k in 0..m {
        let mut v = vec![0.0; m];
        v[k] = 1.0;
        for b in std::iter::once(&dv).chain(out.iter()) {
            let c: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv > 1e-6 {
            out.push(v.into_iter().map(|x| x / nv).collect());
        }
        if out.len() == m - 1 {
            break;
        }
    }
    out.iter().map(|v| CPoint::from_real(v)).collect()
}

fn rotate(d: &CPoint, t: &CPoint, angle: f64) -> CPoint {
    let w = &d.scale(angle.cos()) + &t.scale(angle.sin());
    w.normalized().expect("unit rotation")
}

/// Compass search on the unit sphere; `better(a, b)` says value a improves
/// on value b. Returns (direction, value, last step, max |Δf|/step seen at
/// the last step).
fn compass<F>(start: CPoint, value: f64, step0: f64, f: F, minimize: bool) -> (CPoint, f64, f64, f64)
where
    F: Fn(&CPoint) -> f64,
{
    let better = |a: f64, b: f64| if minimize { a < b } else { a > b };
    let mut d = start;
    let mut best = value;
    let mut step = step0;
    let mut slope = 0.0;
    while step > MIN_ANGLE {
        let mut improved = false;
        slope = 0.0f64;
        for t in tangent_basis(&d) {
            for sign in [1.0, -1.0] {
                let cand = rotate(&d, &t, sign * step);
                let v = f(&cand);
                slope = slope.max((v - best).abs() / step);
                if better(v, best) {
                    d = cand;
                    best = v;
                    improved = true;
                    break;
                }
            }
            if improved {
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (d, best, step, slope)
}

/// Radius of the largest origin-centered ball verified inside chain(Ω).
pub fn inner_radius(chain: &MapChain, domain: &ConvexDomainSpec, opts: &RadiusOptions) -> Result<RadiusEstimate> {
    let n = chain.dim;
    if domain.dim() != n {
        return Err(SqueezeError::invalid("chain and domain dimensions differ"));
    }
    if !chain.membership_in_image(domain, &CPoint::zeros(n)) {
        return Err(SqueezeError::ZeroNotInImage);
    }
    let mut dirs = complex_directions(n, opts.direction_count(n), opts.seed);
    dirs.extend(axis_directions(n));

    // coarse brackets for every direction
    let coarse: Vec<(f64, f64)> = dirs
        .par_iter()
        .map(|d| {
            let (lo, hi) = march(chain, domain, d);
            if !hi.is_finite() {
                return (lo, hi);
            }
            bisect(chain, domain, d, lo, hi, COARSE_REL * lo.max(MARCH_START))
        })
        .collect();
    let coarse_min = coarse.iter().map(|b| b.0).fold(f64::INFINITY, f64::min);
    let threshold = coarse
        .iter()
        .map(|b| b.1)
        .fold(f64::INFINITY, f64::min);
    // only directions whose bracket overlaps the smallest one can hold the minimum
    let refined: Vec<(usize, f64)> = coarse
        .par_iter()
        .enumerate()
        .filter(|(_, b)| b.0 <= threshold)
        .map(|(i, b)| (i, bisect(chain, domain, &dirs[i], b.0, b.1, opts.tol).0))
        .collect();
    let (mut worst_idx, mut value) = refined
        .iter()
        .copied()
        .fold((0usize, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    if !value.is_finite() {
        value = coarse_min;
        worst_idx = coarse.iter().position(|b| b.0 == coarse_min).unwrap_or(0);
    }
    let mut worst = dirs[worst_idx].clone();

    let gap = angular_gap(&dirs, GAP_PROBES, opts.seed);
    if opts.refine && value.is_finite() {
        let mut order: Vec<usize> = (0..dirs.len()).collect();
        order.sort_by(|&a, &b| coarse[a].0.total_cmp(&coarse[b].0));
        let results: Vec<(CPoint, f64)> = order
            .into_iter()
            .take(REFINE_STARTS)
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&i| {
                let f = |d: &CPoint| exit_radius(chain, domain, d, opts.tol);
                let v0 = f(&dirs[i]);
                let (d, v, _, _) = compass(dirs[i].clone(), v0, gap.max(1e-3), f, true);
                (d, v)
            })
            .collect();
        for (d, v) in results {
            if v < value {
                value = v;
                worst = d;
            }
        }
    }

    // every tested direction must be inside at the reported radius
    let shell_ok = dirs
        .par_iter()
        .all(|d| chain.membership_in_image(domain, &d.scale(value)));
    if !shell_ok {
        let lowest = dirs
            .par_iter()
            .map(|d| exit_radius(chain, domain, d, opts.tol))
            .reduce(|| f64::INFINITY, f64::min);
        value = value.min(lowest);
    }
    Ok(RadiusEstimate {
        value,
        direction_count: dirs.len(),
        refinement_tolerance: opts.tol,
        worst_direction: worst,
        angular_gap: gap,
    })
}

/// Largest ‖chain(z)‖ over `count` boundary samples of Ω.
pub fn boundary_max_norm(chain: &MapChain, domain: &ConvexDomainSpec, count: usize, seed: u64) -> Result<f64> {
    let pts = domain.boundary_samples(count, seed)?;
    let worst = pts
        .par_iter()
        .map(|z| match chain.apply_with_clearance(z) {
            Ok((w, c)) if c > CLOSURE_CLEARANCE => w.norm(),
            _ => f64::NAN,
        })
        .reduce(|| 0.0, |a, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) });
    if worst.is_nan() {
        Err(SqueezeError::SingularOnClosure)
    } else {
        Ok(worst)
    }
}

/// sup of ‖chain(z)‖ over ∂Ω, from boundary samples plus local maximization.
pub fn outer_radius(chain: &MapChain, domain: &ConvexDomainSpec, opts: &RadiusOptions) -> Result<RadiusEstimate> {
    let n = chain.dim;
    if domain.dim() != n {
        return Err(SqueezeError::invalid("chain and domain dimensions differ"));
    }
    let pts = domain.boundary_samples(opts.boundary_samples, opts.seed)?;
    let norms: Vec<f64> = pts
        .par_iter()
        .map(|z| match chain.apply_with_clearance(z) {
            Ok((w, c)) if c > CLOSURE_CLEARANCE => w.norm(),
            _ => f64::NAN,
        })
        .collect();
    if norms.iter().any(|v| !v.is_finite()) {
        return Err(SqueezeError::SingularOnClosure);
    }
    let dir_of = |z: &CPoint| (z - &domain.witness).normalized().expect("boundary differs from witness");
    // a maximizer approaching a singular set means the chain blows up on ∂Ω
    let eval = |d: &CPoint| -> f64 {
        match domain.boundary_point(d).and_then(|z| chain.apply_with_clearance(&z)) {
            Ok((w, c)) if c > CLOSURE_CLEARANCE => w.norm(),
            _ => f64::INFINITY,
        }
    };
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let mut best = norms[order[0]];
    let mut best_dir = dir_of(&pts[order[0]]);
    let dirs: Vec<CPoint> = pts.iter().map(|z| dir_of(z)).collect();
    let gap = angular_gap(&dirs, GAP_PROBES, opts.seed);
    let mut inflation = 0.0;
    if opts.refine {
        let starts: Vec<usize> = order.into_iter().take(REFINE_STARTS).collect();
        let results: Vec<(CPoint, f64, f64, f64)> = starts
            .par_iter()
            .map(|&i| compass(dirs[i].clone(), norms[i], gap.max(1e-3), eval, false))
            .collect();
        for (d, v, step, slope) in results {
            if !v.is_finite() {
                return Err(SqueezeError::SingularOnClosure);
            }
            if v > best {
                best = v;
                best_dir = d;
                inflation = slope * step;
            }
        }
    } else {
        inflation = gap * best;
    }
    Ok(RadiusEstimate {
        value: best + inflation,
        direction_count: pts.len(),
        refinement_tolerance: opts.tol,
        worst_direction: best_dir,
        angular_gap: gap,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelfCheckReport {
    pub samples: usize,
    pub worst_round_trip: f64,
    pub round_trip_tolerance: f64,
    pub worst_cauchy_riemann: f64,
    pub singular_points: usize,
    pub passed: bool,
}

const CR_STEP: f64 = 1e-5;
const CR_TOL: f64 = 1e-6;

/// Relative Cauchy–Riemann defect ‖∂f/∂y_k − i ∂f/∂x_k‖ of one atom at z.
fn cauchy_riemann(atom: &MapAtom, z: &CPoint) -> Option<f64> {
    let n = z.dim();
    let i = num_complex::Complex64::new(0.0, 1.0);
    let mut worst = 0.0f64;
    for k in 0..n {
        let diff = |delta: num_complex::Complex64| -> Option<CPoint> {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[k] += delta * CR_STEP;
            zm[k] -= delta * CR_STEP;
            let fp = atom.apply(&zp)?;
            let fm = atom.apply(&zm)?;
            Some((&fp - &fm).scale(0.5 / CR_STEP))
        };
        let dx = diff(num_complex::Complex64::new(1.0, 0.0))?;
        let dy = diff(i)?;
        let defect = (&dy - &dx.scale_c(i)).norm();
        worst = worst.max(defect / (1.0 + dx.norm()));
    }
    Some(worst)
}

/// Round-trip and holomorphy checks at explicit points.
pub fn chain_selfcheck_at(chain: &MapChain, points: &[CPoint]) -> SelfCheckReport {
    let tol = 1e-9 * chain.condition_estimate().max(1.0);
    let mut worst_rt = 0.0f64;
    let mut worst_cr = 0.0f64;
    let mut singular = 0;
    for z in points {
        let Ok(w) = chain.apply(z) else {
            singular += 1;
            continue;
        };
        match chain.invert(&w) {
            Ok(back) => worst_rt = worst_rt.max(back.max_abs_diff(z) / (1.0 + z.norm())),
            Err(_) => singular += 1,
        }
        let mut cur = z.clone();
        for atom in &chain.atoms {
            if let Some(r) = cauchy_riemann(atom, &cur) {
                worst_cr = worst_cr.max(r);
            }
            match atom.apply(&cur) {
                Some(next) => cur = next,
                None => break,
            }
        }
    }
    SelfCheckReport {
        samples: points.len(),
        worst_round_trip: worst_rt,
        round_trip_tolerance: tol,
        worst_cauchy_riemann: worst_cr,
        singular_points: singular,
        passed: singular == 0 && worst_rt <= tol && worst_cr < CR_TOL,
    }
}

/// Self-check at `samples` interior points of Ω (the witness included).
pub fn chain_selfcheck(chain: &MapChain, domain: &ConvexDomainSpec, samples: usize, seed: u64) -> SelfCheckReport {
    let n = domain.dim();
    let mut r = rng(seed ^ 0x5e1f);
    let mut points = vec![domain.witness.clone()];
    while points.len() < samples.max(1) {
        let d = random_in_ball(n, 1.0, &mut r);
        let Some(u) = d.normalized() else { continue };
        let t = match domain.ray_exit(&domain.witness, &u) {
            Ok(t) => t.min(1e3),
            Err(_) => 1e3,
        };
        let frac: f64 = r.gen_range(0.0..0.95);
        points.push(domain.witness.along(&u, frac * t));
    }
    chain_selfcheck_at(chain, &points)
}
