//! Exactly invertible holomorphic map atoms and their compositions.
//!
//! Chains keep atoms symbolically; the inverse of a chain is always the
//! right-to-left composition of closed-form atom inverses.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{ConvexDomainSpec, RealHyperplane};
use crate::error::{Result, SqueezeError};
use crate::linalg::singular_condition;
use crate::point::{cmatrix_from_rows, mat_vec, CMatrix, CPoint};

/// Minimum distance to an atom's singular set at which it is evaluated.
pub const SINGULAR_CLEARANCE: f64 = 1e-12;
const MIN_DET: f64 = 1e-14;

/// z ↦ M z + t with M invertible; the inverse matrix is cached.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AffineRepr", into = "AffineRepr")]
pub struct AffineMap {
    matrix: CMatrix,
    translation: CPoint,
    inverse: CMatrix,
    condition: f64,
}

#[derive(Serialize, Deserialize)]
struct AffineRepr {
    matrix: Vec<Vec<[f64; 2]>>,
    translation: CPoint,
}

impl TryFrom<AffineRepr> for AffineMap {
    type Error = SqueezeError;
    fn try_from(r: AffineRepr) -> Result<Self> {
        AffineMap::new(cmatrix_from_rows(&r.matrix)?, r.translation)
    }
}

impl From<AffineMap> for AffineRepr {
    fn from(a: AffineMap) -> Self {
        let m = &a.matrix;
        AffineRepr {
            matrix: (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
            translation: a.translation,
        }
    }
}

impl AffineMap {
    pub fn new(matrix: CMatrix, translation: CPoint) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n || translation.dim() != n {
            return Err(SqueezeError::invalid("affine map has inconsistent shape"));
        }
        if matrix.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(SqueezeError::invalid("affine matrix is not finite"));
        }
        if matrix.determinant().norm() <= MIN_DET {
            return Err(SqueezeError::SingularAffine);
        }
        let inverse = matrix
            .clone()
            .try_inverse()
            .ok_or(SqueezeError::SingularAffine)?;
        let condition = singular_condition(&matrix);
        Ok(AffineMap {
            matrix,
            translation,
            inverse,
            condition,
        })
    }

    pub fn linear(matrix: CMatrix) -> Result<Self> {
        let n = matrix.nrows();
        Self::new(matrix, CPoint::zeros(n))
    }

    pub fn identity(n: usize) -> Self {
        Self::linear(CMatrix::identity(n, n)).expect("identity")
    }

    pub fn diagonal(diag: &[Complex64]) -> Result<Self> {
        let n = diag.len();
        Self::linear(CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                diag[i]
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn translation_by(t: CPoint) -> Self {
        let n = t.dim();
        Self::new(CMatrix::identity(n, n), t).expect("translation")
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn translation(&self) -> &CPoint {
        &self.translation
    }

    pub fn inverse_matrix(&self) -> &CMatrix {
        &self.inverse
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, z: &CPoint) -> CPoint {
        &mat_vec(&self.matrix, z) + &self.translation
    }

    pub fn invert(&self, w: &CPoint) -> CPoint {
        mat_vec(&self.inverse, &(w - &self.translation))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &AffineMap) -> Result<AffineMap> {
        AffineMap::new(&self.matrix * &inner.matrix, self.apply(&inner.translation))
    }
}

/// A single invertible holomorphic map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "atom", rename_all = "snake_case")]
pub enum MapAtom {
    Affine(AffineMap),
    /// z_k ↦ z_k / (2c_k − z_k).
    CoordMoebius { centers: Vec<f64> },
    /// κ(z) = ((1 − z₁)/(1 + z₁), √2 z′/(1 + z₁)), an involution.
    Cayley { dim: usize },
    /// Λ_λ(z) = (z₁/λ, z′/√λ).
    Stretch { lambda: f64 },
    Scale { factor: f64 },
    /// The involutive ball automorphism exchanging `center` and 0.
    BallAutomorphism { center: CPoint },
}

fn ball_automorphism(a: &CPoint, z: &CPoint) -> Option<CPoint> {
    let aa = a.norm_sqr();
    let za = z.inner(a);
    let denom = Complex64::new(1.0, 0.0) - za;
    if denom.norm() <= SINGULAR_CLEARANCE {
        return None;
    }
    if aa == 0.0 {
        return Some(-z);
    }
    let s = (1.0 - aa).sqrt();
    let pz = a.scale_c(za / aa);
    let qz = z - &pz;
    let num = &(a - &pz) - &qz.scale(s);
    Some(num.scale_c(denom.inv()))
}

impl MapAtom {
    /// Condition contribution used in round-trip tolerances.
    pub fn condition(&self) -> f64 {
        match self {
            MapAtom::Affine(a) => a.condition(),
            MapAtom::Stretch { lambda } => lambda.sqrt().max(1.0 / lambda.sqrt()),
            _ => 1.0,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let ok = match self {
            MapAtom::Affine(a) => a.dim() == n,
            MapAtom::CoordMoebius { centers } => {
                centers.len() == n && centers.iter().all(|c| c.is_finite() && *c > 0.0)
            }
            MapAtom::Cayley { dim } => *dim == n,
            MapAtom::Stretch { lambda } => lambda.is_finite() && *lambda > 0.0,
            MapAtom::Scale { factor } => factor.is_finite() && *factor > 0.0,
            MapAtom::BallAutomorphism { center } => center.dim() == n && center.norm() < 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(SqueezeError::invalid(format!("invalid map atom {self:?} in dimension {n}")))
        }
    }

    /// Distance-like measure of `z` from the atom's singular set
    /// (∞ for atoms defined everywhere).
    pub fn clearance(&self, z: &CPoint) -> f64 {
        match self {
            MapAtom::CoordMoebius { centers } => centers
                .iter()
                .enumerate()
                .map(|(k, c)| (Complex64::new(2.0 * c, 0.0) - z[k]).norm())
                .fold(f64::INFINITY, f64::min),
            MapAtom::Cayley { .. } => (Complex64::new(1.0, 0.0) + z[0]).norm(),
            MapAtom::BallAutomorphism { center } => {
                (Complex64::new(1.0, 0.0) - z.inner(center)).norm()
            }
            _ => f64::INFINITY,
        }
    }

    /// `None` when `z` is within `SINGULAR_CLEARANCE` of the singular set.
    pub fn apply(&self, z: &CPoint) -> Option<CPoint> {
        let one = Complex64::new(1.0, 0.0);
        match self {
            MapAtom::Affine(a) => Some(a.apply(z)),
            MapAtom::CoordMoebius { centers } => {
                let mut out = z.clone();
                for (k, c) in centers.iter().enumerate() {
                    let d = Complex64::new(2.0 * c, 0.0) - z[k];
                    if d.norm() <= SINGULAR_CLEARANCE {
                        return None;
                    }
                    out[k] = z[k] / d;
                }
                Some(out)
            }
            MapAtom::Cayley { .. } => {
                let d = one + z[0];
                if d.norm() <= SINGULAR_CLEARANCE {
                    return None;
                }
                let inv = d.inv();
                let mut out = z.scale_c(inv * std::f64::consts::SQRT_2);
                out[0] = (one - z[0]) * inv;
                Some(out)
            }
            MapAtom::Stretch { lambda } => {
                let mut out = z.scale(1.0 / lambda.sqrt());
                out[0] = z[0] / *lambda;
                Some(out)
            }
            MapAtom::Scale { factor } => Some(z.scale(*factor)),
            MapAtom::BallAutomorphism { center } => ball_automorphism(center, z),
        }
    }

    pub fn invert(&self, w: &CPoint) -> Option<CPoint> {
        match self {
            MapAtom::Affine(a) => Some(a.invert(w)),
            MapAtom::CoordMoebius { centers } => {
                let mut out = w.clone();
                for (k, c) in centers.iter().enumerate() {
                    let d = Complex64::new(1.0, 0.0) + w[k];
                    if d.norm() <= SINGULAR_CLEARANCE {
                        return None;
                    }
                    out[k] = w[k] * (2.0 * c) / d;
                }
                Some(out)
            }
            MapAtom::Cayley { .. } | MapAtom::BallAutomorphism { .. } => self.apply(w),
            MapAtom::Stretch { lambda } => {
                let mut out = w.scale(lambda.sqrt());
                out[0] = w[0] * *lambda;
                Some(out)
            }
            MapAtom::Scale { factor } => Some(w.scale(1.0 / factor)),
        }
    }
}

/// Atoms applied left to right.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapChain {
    pub dim: usize,
    pub atoms: Vec<MapAtom>,
}

/// Outcome of an inverse-membership query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    Inside,
    Outside,
    /// Inversion hit a singular set; counted as outside.
    Singular,
}

impl Membership {
    pub fn is_inside(self) -> bool {
        self == Membership::Inside
    }
}

impl MapChain {
    pub fn new(dim: usize, atoms: Vec<MapAtom>) -> Result<Self> {
        for a in &atoms {
            a.validate(dim)?;
        }
        Ok(MapChain { dim, atoms })
    }

    pub fn identity(dim: usize) -> Self {
        MapChain {
            dim,
            atoms: Vec::new(),
        }
    }

    /// The chain followed by `atom`.
    pub fn then(mut self, atom: MapAtom) -> Result<Self> {
        atom.validate(self.dim)?;
        self.atoms.push(atom);
        Ok(self)
    }

    pub fn apply(&self, z: &CPoint) -> Result<CPoint> {
        z.check_dim(self.dim)?;
        let mut cur = z.clone();
        for (i, a) in self.atoms.iter().enumerate() {
            cur = a.apply(&cur).ok_or(SqueezeError::SingularPoint { atom: i })?;
        }
        Ok(cur)
    }

    /// Image of `z` and the smallest singular-set clearance met on the way.
    pub fn apply_with_clearance(&self, z: &CPoint) -> Result<(CPoint, f64)> {
        z.check_dim(self.dim)?;
        let mut cur = z.clone();
        let mut clearance = f64::INFINITY;
        for (i, a) in self.atoms.iter().enumerate() {
            clearance = clearance.min(a.clearance(&cur));
            cur = a.apply(&cur).ok_or(SqueezeError::SingularPoint { atom: i })?;
        }
        Ok((cur, clearance))
    }

    pub fn invert(&self, w: &CPoint) -> Result<CPoint> {
        w.check_dim(self.dim)?;
        let mut cur = w.clone();
        for (i, a) in self.atoms.iter().enumerate().rev() {
            cur = a.invert(&cur).ok_or(SqueezeError::SingularPoint { atom: i })?;
        }
        Ok(cur)
    }

    /// Product of the atoms' condition contributions.
    pub fn condition_estimate(&self) -> f64 {
        self.atoms.iter().map(MapAtom::condition).product()
    }

    pub fn classify(&self, domain: &ConvexDomainSpec, w: &CPoint) -> Membership {
        match self.invert(w) {
            Ok(z) if z.is_finite() && domain.contains(&z) => Membership::Inside,
            Ok(_) => Membership::Outside,
            Err(_) => Membership::Singular,
        }
    }

    /// Exact test of w ∈ chain(Ω); valid because every atom is injective.
    pub fn membership_in_image(&self, domain: &ConvexDomainSpec, w: &CPoint) -> bool {
        self.classify(domain, w).is_inside()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: MapChain = serde_json::from_str(text)
            .map_err(|e| SqueezeError::invalid(format!("map chain: {e}")))?;
        MapChain::new(c.dim, c.atoms)
    }
}

/// Image of the hyperplane `h` under the affine map `t`: z ∈ h ⇔ t(z) ∈ result.
pub fn pushforward_hyperplane(t: &AffineMap, h: &RealHyperplane) -> Result<RealHyperplane> {
    // Re⟨z, a⟩ = Re⟨M⁻¹(w − t), a⟩ = Re⟨w − t, (M⁻¹)* a⟩
    let a_new = mat_vec(&t.inverse_matrix().adjoint(), &h.normal);
    let norm = a_new.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(SqueezeError::SingularAffine);
    }
    let b_new = h.offset + t.translation().re_inner(&a_new);
    Ok(RealHyperplane {
        normal: a_new.scale(1.0 / norm),
        offset: b_new / norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_direction, random_in_ball, rng};
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn chain(n: usize, atoms: Vec<MapAtom>) -> MapChain {
        MapChain::new(n, atoms).unwrap()
    }

    #[test]
    fn apply_examples() {
        let k = chain(2, vec![MapAtom::Cayley { dim: 2 }]);
        assert_eq!(k.apply(&CPoint::basis(2, 0)).unwrap(), CPoint::zeros(2));
        assert_eq!(k.apply(&CPoint::zeros(2)).unwrap(), CPoint::basis(2, 0));
        let s = chain(2, vec![MapAtom::Stretch { lambda: 0.25 }]);
        let w = s.apply(&CPoint::from_pairs(&[(1.0, 0.0), (1.0, 0.0)])).unwrap();
        assert_eq!(w, CPoint::from_pairs(&[(4.0, 0.0), (2.0, 0.0)]));
        let singular = k.apply(&CPoint::from_pairs(&[(-1.0, 0.0), (0.0, 0.0)]));
        assert_eq!(singular, Err(SqueezeError::SingularPoint { atom: 0 }));
    }

    #[test]
    fn invert_examples() {
        let k = chain(2, vec![MapAtom::Cayley { dim: 2 }]);
        let z = CPoint::from_pairs(&[(0.3, 0.1), (0.2, 0.0)]);
        assert!(k.invert(&k.apply(&z).unwrap()).unwrap().max_abs_diff(&z) < 1e-12);
        let m = chain(1, vec![MapAtom::CoordMoebius { centers: vec![1.0] }]);
        let z = m.invert(&CPoint::from_pairs(&[(-1.0 / 3.0, 0.0)])).unwrap();
        assert!((z[0] - c(-1.0, 0.0)).norm() < 1e-15);
        let a = AffineMap::diagonal(&[c(2.0, 0.0), c(1.0, 0.0)]).unwrap();
        let z = a.invert(&CPoint::from_pairs(&[(2.0, 0.0), (3.0, 0.0)]));
        assert_eq!(z, CPoint::from_pairs(&[(1.0, 0.0), (3.0, 0.0)]));
    }

    #[test]
    fn pushforward_examples() {
        let h = RealHyperplane::new(CPoint::from_pairs(&[(0.6, 0.0), (0.0, 0.8)]), 0.7).unwrap();
        let id = pushforward_hyperplane(&AffineMap::identity(2), &h).unwrap();
        assert!(id.normal.max_abs_diff(&h.normal) < 1e-15 && (id.offset - h.offset).abs() < 1e-15);

        let t = AffineMap::diagonal(&[c(1.0, 0.0), c(0.5, 0.0)]).unwrap();
        let h = RealHyperplane::new(CPoint::basis(2, 1), 2.0).unwrap();
        let p = pushforward_hyperplane(&t, &h).unwrap();
        assert!(p.normal.max_abs_diff(&CPoint::basis(2, 1)) < 1e-15);
        assert!((p.offset - 1.0).abs() < 1e-15);

        let t = AffineMap::translation_by(CPoint::from_pairs(&[(-1.0, 0.0), (0.0, 0.0)]));
        let h = RealHyperplane::new(CPoint::basis(2, 0), 1.0).unwrap();
        let p = pushforward_hyperplane(&t, &h).unwrap();
        assert!(p.offset.abs() < 1e-15);
    }

    #[test]
    fn pushforward_preserves_incidence() {
        let mut r = rng(11);
        for _ in 0..200 {
            let m = CMatrix::from_fn(3, 3, |_, _| c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)));
            let Ok(t) = AffineMap::new(m, random_direction(3, &mut r)) else { continue };
            if t.condition() > 1e4 {
                continue;
            }
            let h = RealHyperplane::new(random_direction(3, &mut r), r.gen_range(-1.0..1.0)).unwrap();
            let p = pushforward_hyperplane(&t, &h).unwrap();
            for _ in 0..5 {
                let z = random_in_ball(3, 2.0, &mut r);
                let lhs = h.value(&z) * t.inverse_matrix().adjoint().norm();
                let rhs = p.value(&t.apply(&z));
                // signed values agree up to the positive normalization factor
                assert_eq!(lhs.signum(), rhs.signum());
            }
        }
    }

    #[test]
    fn membership_examples() {
        let ball = ConvexDomainSpec::unit_ball(2);
        let id = MapChain::identity(2);
        assert!(id.membership_in_image(&ball, &CPoint::from_pairs(&[(0.5, 0.0), (0.0, 0.0)])));
        assert!(!id.membership_in_image(&ball, &CPoint::from_pairs(&[(1.5, 0.0), (0.0, 0.0)])));
        let disc = ConvexDomainSpec::unit_ball(1);
        let m = chain(1, vec![MapAtom::CoordMoebius { centers: vec![1.0] }]);
        assert!(m.membership_in_image(&disc, &CPoint::from_pairs(&[(0.32, 0.0)])));
        assert!(!m.membership_in_image(&disc, &CPoint::from_pairs(&[(-0.34, 0.0)])));
        assert_eq!(m.classify(&disc, &CPoint::from_pairs(&[(-1.0, 0.0)])), Membership::Singular);
    }

    #[test]
    fn cayley_is_an_involution() {
        let k = MapAtom::Cayley { dim: 3 };
        let mut r = rng(2);
        let mut checked = 0;
        while checked < 1000 {
            let z = random_in_ball(3, 3.0, &mut r);
            if (z[0] + 1.0).norm() <= 0.1 {
                continue;
            }
            let back = k.apply(&k.apply(&z).unwrap()).unwrap();
            assert!(back.max_abs_diff(&z) < 1e-10);
            checked += 1;
        }
    }

    #[test]
    fn cayley_maps_sphere_to_siegel_boundary() {
        let k = MapAtom::Cayley { dim: 2 };
        let mut r = rng(3);
        for _ in 0..1000 {
            let z = random_direction(2, &mut r);
            if (z[0] + 1.0).norm() < 1e-3 {
                continue;
            }
            let w = k.apply(&z).unwrap();
            let tail = w[1].norm_sqr();
            assert!((2.0 * w[0].re - tail).abs() < 1e-8);
            let zi = random_in_ball(2, 1.0, &mut r);
            let wi = k.apply(&zi).unwrap();
            assert!(2.0 * wi[0].re > wi[1].norm_sqr());
        }
    }

    #[test]
    fn stretch_preserves_siegel_half_space() {
        let mut r = rng(4);
        let siegel = |z: &CPoint| 2.0 * z[0].re > z.coords()[1..].iter().map(|c| c.norm_sqr()).sum::<f64>();
        for lambda in [0.01, 0.1, 10.0] {
            let s = MapAtom::Stretch { lambda };
            for _ in 0..1000 {
                let z = random_in_ball(3, 2.0, &mut r);
                assert_eq!(siegel(&z), siegel(&s.apply(&z).unwrap()));
            }
        }
    }

    #[test]
    fn ball_automorphism_swaps_center_and_origin() {
        let a = CPoint::from_pairs(&[(0.3, -0.2), (0.1, 0.4)]);
        let phi = MapAtom::BallAutomorphism { center: a.clone() };
        assert!(phi.apply(&a).unwrap().norm() < 1e-15);
        assert!(phi.apply(&CPoint::zeros(2)).unwrap().max_abs_diff(&a) < 1e-15);
        let mut r = rng(8);
        for _ in 0..200 {
            let z = random_direction(2, &mut r);
            assert!((phi.apply(&z).unwrap().norm() - 1.0).abs() < 1e-12);
            let zi = random_in_ball(2, 0.99, &mut r);
            assert!(phi.invert(&phi.apply(&zi).unwrap()).unwrap().max_abs_diff(&zi) < 1e-12);
        }
    }

    #[test]
    fn chain_round_trips_through_json() {
        let ch = chain(
            2,
            vec![
                MapAtom::Affine(AffineMap::new(
                    CMatrix::from_fn(2, 2, |i, j| c(1.0 + i as f64, 0.1 * j as f64 - 0.3)),
                    CPoint::from_pairs(&[(0.1, 0.2), (-1.0 / 3.0, 0.0)]),
                )
                .unwrap()),
                MapAtom::CoordMoebius { centers: vec![1.0, 0.7] },
                MapAtom::Cayley { dim: 2 },
                MapAtom::Stretch { lambda: 1e-3 },
                MapAtom::Scale { factor: std::f64::consts::FRAC_1_SQRT_2 },
                MapAtom::BallAutomorphism { center: CPoint::from_pairs(&[(1e-10, 0.0), (0.0, 0.0)]) },
            ],
        );
        let back = MapChain::from_json(&ch.to_json()).unwrap();
        assert_eq!(back, ch);
    }
}
