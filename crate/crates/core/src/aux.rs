//! Model domains around a boundary point in centered coordinates, with
//! exact membership tests, and the local sandwich diagnostic
//! F_δ ∩ 𝔹(0,ρ) ⊂ A_q(Ω) ∩ 𝔹(0,ρ) ⊂ G_δ.
//!
//! Writing w = (u + iv, w′), every kind is a sublevel set of a function
//! that is homogeneous under Λ_λ(w) = (w₁/λ, w′/√λ), so membership is
//! stretch invariant.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{ConvexDomainSpec, HermitianForm};
use crate::error::{Result, SqueezeError};
use crate::maps::MapAtom;
use crate::point::CPoint;
use crate::sampling::{complex_directions, rng};
use crate::strict::{centering_map, contact_data, hermitian_form_at, siegel_linear};

/// Tolerance of the Cayley pullback identities.
pub const FORMULA_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum AuxDomain {
    /// 2u > −δ|v| + (1 − δ)H(w′).
    GDelta { delta: f64, form: HermitianForm },
    /// 2u > δ|v| + (1 + δ)H(w′).
    FDelta { delta: f64, form: HermitianForm },
    /// 2u > H(w′).
    Hq { form: HermitianForm },
    /// 2u > ‖w′‖².
    Siegel { dim: usize },
    /// 2R·u > ‖w′‖².
    E { radius: f64 },
    /// 2u > H_p(w′), the limit of the stretched domains.
    OmegaHat { form: HermitianForm },
}

impl AuxDomain {
    /// Signed margin of the defining inequality; positive inside.
    pub fn margin(&self, w: &CPoint) -> f64 {
        let u = w[0].re;
        let v = w[0].im;
        let tail = || w.coords()[1..].iter().map(|c| c.norm_sqr()).sum::<f64>();
        match self {
            AuxDomain::GDelta { delta, form } => 2.0 * u + delta * v.abs() - (1.0 - delta) * form.eval_tail(w),
            AuxDomain::FDelta { delta, form } => 2.0 * u - delta * v.abs() - (1.0 + delta) * form.eval_tail(w),
            AuxDomain::Hq { form } | AuxDomain::OmegaHat { form } => 2.0 * u - form.eval_tail(w),
            AuxDomain::Siegel { .. } => 2.0 * u - tail(),
            AuxDomain::E { radius } => 2.0 * radius * u - tail(),
        }
    }

    pub fn contains(&self, w: &CPoint) -> bool {
        self.margin(w) > 0.0
    }
}

/// κ(G_δ) or κ(F_δ) in closed form: |z₁|² ∓ δ|Im z₁| + (1 ∓ δ)H(z′) − 1,
/// negative inside. `sign` is −1 for G_δ and +1 for F_δ.
pub fn cayley_image_defining(sign: f64, delta: f64, form: &HermitianForm, z: &CPoint) -> f64 {
    z[0].norm_sqr() + sign * delta * z[0].im.abs() + (1.0 + sign * delta) * form.eval_tail(z) - 1.0
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuxReport {
    pub delta: f64,
    pub rho: f64,
    pub lambda_q: f64,
    pub c0: f64,
    /// Points of F_δ ∩ 𝔹(0,ρ) tested for membership in A_q(Ω).
    pub lower_checked: usize,
    /// Points of A_q(Ω) ∩ 𝔹(0,ρ) tested for membership in G_δ.
    pub upper_checked: usize,
    pub formula_max_residual: f64,
    /// max ‖L∘κ(w)‖ − 1 over sampled w ∈ ∂G_δ.
    pub epsilon: f64,
}

/// Sampling verification of the local sandwich at q, of the closed forms
/// of κ(G_δ) and κ(F_δ), and of the overshoot ε(δ) of L∘κ on ∂G_δ.
pub fn aux_inclusion_check(
    domain: &ConvexDomainSpec,
    q: &CPoint,
    delta: f64,
    rho: f64,
    samples: usize,
    seed: u64,
) -> Result<AuxReport> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(SqueezeError::invalid("delta must lie in (0, 1/2)"));
    }
    if !(rho > 0.0 && rho.is_finite()) || samples == 0 {
        return Err(SqueezeError::invalid("rho and the sample count must be positive"));
    }
    let contact = contact_data(domain, q, samples, seed)?;
    let a = centering_map(&contact)?;
    let form = hermitian_form_at(domain, &contact, &a)?;
    let l = siegel_linear(&form)?;
    let n = q.dim();
    let g_delta = AuxDomain::GDelta { delta, form: form.clone() };
    let f_delta = AuxDomain::FDelta { delta, form: form.clone() };

    // (a) sandwich in centered coordinates
    let mut r = rng(seed ^ 0xa0c5);
    let (mut lower, mut upper) = (0usize, 0usize);
    for _round in 0..20 {
        if lower >= samples && upper >= samples {
            break;
        }
        let batch: Vec<CPoint> = (0..4 * samples)
            .map(|i| local_sample(n, rho, delta, &form, i % 2 == 1, &mut r))
            .filter(|w| w.norm() < rho)
            .collect();
        let verdicts: Vec<(bool, bool, bool)> = batch
            .par_iter()
            .map(|w| (f_delta.contains(w), domain.contains(&a.invert(w)), g_delta.contains(w)))
            .collect();
        for (w, (in_f, in_omega, in_g)) in batch.iter().zip(verdicts) {
            if in_f {
                if !in_omega {
                    return Err(SqueezeError::InclusionViolated {
                        which: "F_delta ∩ B(0, rho) ⊂ A_q(Omega)".to_string(),
                        witness: w.clone(),
                    });
                }
                lower += 1;
            }
            if in_omega {
                if !in_g {
                    return Err(SqueezeError::InclusionViolated {
                        which: "A_q(Omega) ∩ B(0, rho) ⊂ G_delta".to_string(),
                        witness: w.clone(),
                    });
                }
                upper += 1;
            }
        }
    }

    // (b) closed forms of the Cayley images against the direct pullback
    let kappa = MapAtom::Cayley { dim: n };
    let mut worst = 0.0f64;
    let mut r = rng(seed ^ 0xca11);
    let mut tested = 0;
    while tested < samples {
        let z = crate::sampling::random_in_ball(n, 2.0, &mut r);
        let pole = (Complex64::new(1.0, 0.0) + z[0]).norm();
        if pole < 0.1 {
            continue;
        }
        tested += 1;
        let w = kappa.apply(&z).expect("away from the pole");
        for (sign, aux) in [(-1.0, &g_delta), (1.0, &f_delta)] {
            let pulled = aux.margin(&w) * pole * pole / 2.0;
            let closed = cayley_image_defining(sign, delta, &form, &z);
            let res = (pulled + closed).abs() / (1.0 + closed.abs());
            if !(res <= FORMULA_TOL) {
                let which = if sign < 0.0 { "Cayley image of G_delta" } else { "Cayley image of F_delta" };
                return Err(SqueezeError::InclusionViolated {
                    which: which.to_string(),
                    witness: z,
                });
            }
            worst = worst.max(res);
        }
    }

    // (c) overshoot on ∂κ(G_δ): solve |s d₁|² − δ|Im s d₁| + (1 − δ)H(s d′) = 1 for s > 0
    let epsilon = complex_directions(n, samples, seed)
        .par_iter()
        .map(|d| {
            let aa = d[0].norm_sqr() + (1.0 - delta) * form.eval_tail(d);
            let bb = delta * d[0].im.abs();
            let s = (bb + (bb * bb + 4.0 * aa).sqrt()) / (2.0 * aa);
            l.apply(&d.scale(s)).norm() - 1.0
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);

    Ok(AuxReport {
        delta,
        rho,
        lambda_q: contact.lambda,
        c0: form.min_eigenvalue(),
        lower_checked: lower,
        upper_checked: upper,
        formula_max_residual: worst,
        epsilon,
    })
}

/// Uniform points of 𝔹(0, ρ), or (when `near_graph`) points concentrated
/// around the graphs 2u = ±δ|v| + (1 ± δ)H(w′) where the inclusions are tight.
fn local_sample<R: Rng>(n: usize, rho: f64, delta: f64, form: &HermitianForm, near_graph: bool, r: &mut R) -> CPoint {
    let mut w = crate::sampling::random_in_ball(n, rho, r);
    if near_graph {
        let h = form.eval_tail(&w);
        let v = w[0].im;
        let u = 0.5 * h + 0.5 * delta * (v.abs() + h) * r.gen_range(-2.0..2.0);
        w[0] = Complex64::new(u, v);
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::random_in_ball;

    fn quarter() -> HermitianForm {
        HermitianForm::new(crate::point::CMatrix::from_element(1, 1, Complex64::new(0.25, 0.0))).unwrap()
    }

    fn kinds() -> Vec<AuxDomain> {
        vec![
            AuxDomain::GDelta { delta: 0.1, form: quarter() },
            AuxDomain::FDelta { delta: 0.1, form: quarter() },
            AuxDomain::Hq { form: quarter() },
            AuxDomain::Siegel { dim: 2 },
            AuxDomain::E { radius: 4.0 },
            AuxDomain::OmegaHat { form: HermitianForm::identity(1) },
        ]
    }

    #[test]
    fn membership_is_stretch_invariant() {
        let mut r = rng(5);
        for aux in kinds() {
            for lambda in [0.01, 1.0, 100.0] {
                let stretch = MapAtom::Stretch { lambda };
                for _ in 0..1000 {
                    let z = random_in_ball(2, 1.0, &mut r);
                    let s = stretch.apply(&z).unwrap();
                    if aux.margin(&z).abs() > 1e-12 {
                        assert_eq!(aux.contains(&z), aux.contains(&s), "{aux:?} {z}");
                    }
                }
            }
        }
    }

    #[test]
    fn cayley_image_of_limit_domain() {
        let form = quarter();
        let hat = AuxDomain::OmegaHat { form: form.clone() };
        let kappa = MapAtom::Cayley { dim: 2 };
        let mut r = rng(6);
        let mut checked = 0;
        while checked < 1000 {
            let z = random_in_ball(2, 3.0, &mut r);
            let Some(k) = kappa.apply(&z) else { continue };
            let inside = k[0].norm_sqr() + form.eval_tail(&k) < 1.0;
            if hat.margin(&z).abs() > 1e-9 {
                assert_eq!(hat.contains(&z), inside);
                checked += 1;
            }
        }
    }

    #[test]
    fn closed_form_matches_pullback_at_sample_point() {
        let form = HermitianForm::identity(1);
        let z = CPoint::from_pairs(&[(0.2, 0.1), (0.3, 0.0)]);
        let w = MapAtom::Cayley { dim: 2 }.apply(&z).unwrap();
        let g = AuxDomain::GDelta { delta: 0.1, form: form.clone() };
        assert_eq!(g.contains(&w), cayley_image_defining(-1.0, 0.1, &form, &z) < 0.0);
        let f = AuxDomain::FDelta { delta: 0.1, form: form.clone() };
        assert_eq!(f.contains(&w), cayley_image_defining(1.0, 0.1, &form, &z) < 0.0);
    }

    #[test]
    fn sandwich_holds_on_ball_and_ellipsoid() {
        let q = CPoint::from_pairs(&[(0.99, 0.0), (0.0, 0.0)]);
        let ball = ConvexDomainSpec::unit_ball(2);
        let rep = aux_inclusion_check(&ball, &q, 0.1, 0.05, 10_000, 0).unwrap();
        assert!(rep.lower_checked >= 10_000 && rep.upper_checked >= 10_000);
        assert!(rep.formula_max_residual <= FORMULA_TOL);
        assert!(rep.epsilon > 0.0 && rep.epsilon < 0.2, "{}", rep.epsilon);

        let e = ConvexDomainSpec::axis_ellipsoid(CPoint::zeros(2), &[1.0, 2.0]).unwrap();
        let rep = aux_inclusion_check(&e, &q, 0.1, 0.05, 10_000, 0).unwrap();
        assert!((rep.c0 - 0.25).abs() < 1e-12);
    }

    #[test]
    fn degenerate_delta_is_rejected() {
        let q = CPoint::from_pairs(&[(0.99, 0.0), (0.0, 0.0)]);
        let ball = ConvexDomainSpec::unit_ball(2);
        for delta in [0.0, 0.5, -0.1] {
            assert!(matches!(
                aux_inclusion_check(&ball, &q, delta, 0.05, 100, 0),
                Err(SqueezeError::InvalidInput(_))
            ));
        }
    }

    #[test]
    fn oversized_neighbourhood_breaks_the_sandwich() {
        // far from b the ball bends away from F_δ
        let q = CPoint::from_pairs(&[(0.99, 0.0), (0.0, 0.0)]);
        let ball = ConvexDomainSpec::unit_ball(2);
        assert!(matches!(
            aux_inclusion_check(&ball, &q, 0.1, 1.5, 10_000, 0),
            Err(SqueezeError::InclusionViolated { .. })
        ));
    }
}
