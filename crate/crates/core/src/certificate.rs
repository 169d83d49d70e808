//! Bound certificates and their independent replay.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::ConvexDomainSpec;
use crate::error::{Result, SqueezeError};
use crate::maps::MapChain;
use crate::point::CPoint;
use crate::sampling::{random_direction, rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    Convex,
    Strict,
}

/// An explicit injective holomorphic chain F with F(q) = 0 and F(Ω) inside
/// the unit ball, together with the radius of a ball about 0 inside F(Ω).
///
/// `r_in` and `r_out` describe the chain before normalization by 1/r_out;
/// `bound = r_in / r_out` is the inner radius of the stored chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub pipeline: Pipeline,
    pub domain: ConvexDomainSpec,
    pub point: CPoint,
    pub chain: MapChain,
    pub r_in: f64,
    pub r_out: f64,
    pub bound: f64,
    pub diagnostics: BTreeMap<String, f64>,
}

impl BoundCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: BoundCertificate = serde_json::from_str(text)
            .map_err(|e| SqueezeError::invalid(format!("certificate: {e}")))?;
        MapChain::new(c.chain.dim, c.chain.atoms.clone())?;
        Ok(c)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplayOptions {
    pub sphere_samples: usize,
    pub boundary_samples: usize,
    pub seed: u64,
}

impl Default for ReplayOptions {
    fn default() -> Self {
        ReplayOptions {
            sphere_samples: 10_000,
            boundary_samples: 10_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// The measured quantity the check thresholds.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplayReport {
    pub checks: Vec<Check>,
}

impl ReplayReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &str, passed: bool, value: f64) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            value,
        });
    }
}

pub const BASE_TOL: f64 = 1e-11;
pub const SPHERE_SHRINK: f64 = 1e-6;
pub const BOUNDARY_SLACK: f64 = 1e-9;

/// Re-checks every claim of `cert` from the stored chain alone.
pub fn replay(cert: &BoundCertificate, opts: &ReplayOptions) -> ReplayReport {
    let mut report = ReplayReport { checks: Vec::new() };
    let domain = &cert.domain;
    let chain = &cert.chain;
    let n = domain.dim();

    let dims_ok = chain.dim == n && cert.point.dim() == n;
    report.push("dimensions", dims_ok, n as f64);
    if !dims_ok {
        return report;
    }
    report.push("base point interior", domain.contains(&cert.point), domain.level(&cert.point));

    let base = chain.apply(&cert.point).map(|w| w.norm()).unwrap_or(f64::INFINITY);
    report.push("chain(q) = 0", base <= BASE_TOL, base);

    let ratio_err = (cert.bound - cert.r_in / cert.r_out).abs();
    let ratio_ok = cert.r_in > 0.0
        && cert.r_out > 0.0
        && ratio_err <= 1e-12 * cert.bound.abs().max(1.0);
    report.push("bound = r_in / r_out", ratio_ok, ratio_err);
    report.push("bound <= 1", cert.bound > 0.0 && cert.bound <= 1.0 + 1e-6, cert.bound);

    let radius = cert.bound * (1.0 - SPHERE_SHRINK);
    let mut r = rng(opts.seed ^ 0x7e91a7);
    let dirs: Vec<CPoint> = (0..opts.sphere_samples)
        .map(|_| random_direction(n, &mut r))
        .collect();
    let outside = dirs
        .par_iter()
        .filter(|d| !chain.membership_in_image(domain, &d.scale(radius)))
        .count();
    report.push("inner sphere inside image", outside == 0, outside as f64);

    match domain.boundary_samples(opts.boundary_samples, opts.seed) {
        Ok(pts) => {
            let worst = pts
                .par_iter()
                .map(|z| chain.apply(z).map(|w| w.norm()).unwrap_or(f64::INFINITY))
                .reduce(|| 0.0, f64::max);
            report.push("boundary inside unit ball", worst <= 1.0 + BOUNDARY_SLACK, worst);
        }
        Err(_) => report.push("boundary inside unit ball", false, f64::INFINITY),
    }
    report
}
