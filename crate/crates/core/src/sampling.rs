//! Deterministic quasi-uniform and seeded random sampling on spheres.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::point::CPoint;

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` unit vectors of ℝ^`dim` (`dim` even, at most 16) from a
/// Cranley–Patterson rotated Halton sequence pushed through Box–Muller.
/// Identical inputs give identical output.
pub fn sphere_directions(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(dim % 2 == 0 && dim <= PRIMES.len(), "unsupported dimension {dim}");
    let mut r = rng(seed ^ 0x5eed_0f_d1ec);
    let shift: Vec<f64> = (0..dim).map(|_| r.gen::<f64>()).collect();
    let mut out = Vec::with_capacity(count);
    let mut index = 1u64;
    while out.len() < count {
        let u: Vec<f64> = (0..dim)
            .map(|k| (radical_inverse(index, PRIMES[k]) + shift[k]).fract())
            .collect();
        index += 1;
        let mut v = Vec::with_capacity(dim);
        for pair in u.chunks_exact(2) {
            let u1 = (1.0 - pair[0]).max(1e-300);
            let rad = (-2.0 * u1.ln()).sqrt();
            let ang = std::f64::consts::TAU * pair[1];
            v.push(rad * ang.cos());
            v.push(rad * ang.sin());
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            out.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    out
}

/// Quasi-uniform unit directions of ℂⁿ.
pub fn complex_directions(n: usize, count: usize, seed: u64) -> Vec<CPoint> {
    sphere_directions(2 * n, count, seed)
        .iter()
        .map(|v| CPoint::from_real(v))
        .collect()
}

/// The 4n directions ±ê_k, ±iê_k.
pub fn axis_directions(n: usize) -> Vec<CPoint> {
    let mut out = Vec::with_capacity(4 * n);
    for k in 0..n {
        let e = CPoint::basis(n, k);
        for phase in [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)] {
            out.push(e.scale_c(num_complex::Complex64::new(phase.0, phase.1)));
        }
    }
    out
}

pub fn random_direction<R: Rng>(n: usize, rng: &mut R) -> CPoint {
    loop {
        let v: Vec<f64> = (0..2 * n).map(|_| rng.sample(StandardNormal)).collect();
        if let Some(d) = CPoint::from_real(&v).normalized() {
            return d;
        }
    }
}

/// Uniform point of the open ball of radius `r` in ℂⁿ.
pub fn random_in_ball<R: Rng>(n: usize, r: f64, rng: &mut R) -> CPoint {
    let d = random_direction(n, rng);
    let s: f64 = rng.gen::<f64>().powf(1.0 / (2 * n) as f64);
    d.scale(r * s)
}

/// Estimated covering gap (radians) of a direction set, from random probes.
pub fn angular_gap(dirs: &[CPoint], probes: usize, seed: u64) -> f64 {
    if dirs.is_empty() {
        return std::f64::consts::PI;
    }
    let n = dirs[0].dim();
    let mut r = rng(seed ^ 0x9a9);
    let mut worst = 0.0f64;
    for _ in 0..probes {
        let p = random_direction(n, &mut r);
        let best = dirs
            .iter()
            .map(|d| d.re_inner(&p))
            .fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max(best.clamp(-1.0, 1.0).acos());
    }
    worst
}
