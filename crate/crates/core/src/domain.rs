//! Convex domains in ℂⁿ as oracle objects.
//!
//! Every domain kind answers membership, ray-exit and supporting-hyperplane
//! queries in closed form. Balls and ellipsoids are stored as real quadrics
//! {(x − c)ᵀ M (x − c) < 1} on ℝ²ⁿ and additionally expose the gradient and
//! Hessian of that defining function.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SqueezeError};
use crate::linalg::hermitian_eigen;
use crate::point::{cmatrix_from_rows, realify, CMatrix, CPoint, MAX_DIM};
use crate::sampling::sphere_directions;

/// Absolute distance within which a point counts as lying on the boundary.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// The real hyperplane {Re⟨z, a⟩ = b}; the associated open halfspace is
/// {Re⟨z, a⟩ < b}. The normal always has unit length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealHyperplane {
    pub normal: CPoint,
    pub offset: f64,
}

impl RealHyperplane {
    /// Normalizes `normal` (and `offset` with it).
    pub fn new(normal: CPoint, offset: f64) -> Result<Self> {
        let n = normal.norm();
        if !(n > 0.0) || !normal.is_finite() || !offset.is_finite() {
            return Err(SqueezeError::invalid("hyperplane normal must be finite and nonzero"));
        }
        Ok(RealHyperplane {
            normal: normal.scale(1.0 / n),
            offset: offset / n,
        })
    }

    /// Re⟨z, a⟩ − b: negative inside the halfspace, the signed distance.
    pub fn value(&self, z: &CPoint) -> f64 {
        z.re_inner(&self.normal) - self.offset
    }
}

/// A Hermitian form H(z′) = z′* M z′.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianForm {
    pub matrix: CMatrix,
}

impl HermitianForm {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(SqueezeError::invalid("Hermitian form must be square"));
        }
        if (&matrix - matrix.adjoint()).norm() > 1e-12 * (1.0 + matrix.norm()) {
            return Err(SqueezeError::invalid("matrix is not Hermitian"));
        }
        Ok(HermitianForm { matrix })
    }

    pub fn identity(m: usize) -> Self {
        HermitianForm {
            matrix: CMatrix::identity(m, m),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Evaluates H on the trailing coordinates z′ = (z_2, …, z_n) of `z`.
    pub fn eval_tail(&self, z: &CPoint) -> f64 {
        let tail = &z.coords()[1..];
        self.eval(tail)
    }

    pub fn eval(&self, zp: &[Complex64]) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, zi) in zp.iter().enumerate() {
            for (j, zj) in zp.iter().enumerate() {
                acc += zi.conj() * self.matrix[(i, j)] * zj;
            }
        }
        acc.re
    }

    /// Smallest eigenvalue; +∞ for the empty form (n = 1).
    pub fn min_eigenvalue(&self) -> f64 {
        let (vals, _) = hermitian_eigen(&self.matrix);
        vals.first().copied().unwrap_or(f64::INFINITY)
    }
}

/// Real quadric {(x − c)ᵀ M (x − c) < 1} in interleaved coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadric {
    pub center: DVector<f64>,
    pub matrix: DMatrix<f64>,
}

impl Quadric {
    fn form(&self, z: &CPoint) -> f64 {
        let d = z.to_dvector() - &self.center;
        d.dot(&(&self.matrix * &d))
    }

    pub fn gradient(&self, z: &CPoint) -> DVector<f64> {
        (&self.matrix * (z.to_dvector() - &self.center)) * 2.0
    }

    /// Exit distance along `w` from an interior point `q`, both real vectors.
    pub fn ray_exit_real(&self, q: &DVector<f64>, w: &DVector<f64>) -> f64 {
        let d = q - &self.center;
        let mw = &self.matrix * w;
        let a = w.dot(&mw);
        let b = d.dot(&mw);
        let c = d.dot(&(&self.matrix * &d)) - 1.0;
        let disc = (b * b - a * c).max(0.0).sqrt();
        if b >= 0.0 {
            -c / (b + disc)
        } else {
            (-b + disc) / a
        }
    }
}

/// Domain kinds. Smooth kinds cache their quadric.
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Ball {
        center: CPoint,
        radius: f64,
        quadric: Quadric,
    },
    HermitianEllipsoid {
        center: CPoint,
        matrix: CMatrix,
        quadric: Quadric,
    },
    DiagonalRealEllipsoid {
        center: CPoint,
        re_axes: Vec<f64>,
        im_axes: Vec<f64>,
        quadric: Quadric,
    },
    Polytope {
        planes: Vec<RealHyperplane>,
    },
    Polydisc {
        center: CPoint,
        radii: Vec<f64>,
    },
    Intersection(Vec<Shape>),
}

fn positive_finite(xs: &[f64], what: &str) -> Result<()> {
    if xs.iter().all(|x| x.is_finite() && *x > 0.0) {
        Ok(())
    } else {
        Err(SqueezeError::invalid(format!("{what} must be positive and finite")))
    }
}

impl Shape {
    pub fn ball(center: CPoint, radius: f64) -> Result<Shape> {
        positive_finite(&[radius], "ball radius")?;
        let n = center.dim();
        let quadric = Quadric {
            center: center.to_dvector(),
            matrix: DMatrix::identity(2 * n, 2 * n) / (radius * radius),
        };
        Ok(Shape::Ball {
            center,
            radius,
            quadric,
        })
    }

    /// {(z − c)* Q (z − c) < 1} for a positive-definite Hermitian Q.
    pub fn hermitian_ellipsoid(center: CPoint, matrix: CMatrix) -> Result<Shape> {
        let n = center.dim();
        if matrix.shape() != (n, n) {
            return Err(SqueezeError::invalid("ellipsoid matrix has the wrong shape"));
        }
        let form = HermitianForm::new(matrix.clone())?;
        if !(form.min_eigenvalue() > 0.0) {
            return Err(SqueezeError::invalid("ellipsoid matrix is not positive definite"));
        }
        let quadric = Quadric {
            center: center.to_dvector(),
            matrix: realify(&form.matrix),
        };
        Ok(Shape::HermitianEllipsoid {
            center,
            matrix,
            quadric,
        })
    }

    /// Σ_k (x_k/a_k)² + (y_k/b_k)² < 1 around `center`.
    pub fn diagonal_real_ellipsoid(
        center: CPoint,
        re_axes: Vec<f64>,
        im_axes: Vec<f64>,
    ) -> Result<Shape> {
        let n = center.dim();
        if re_axes.len() != n || im_axes.len() != n {
            return Err(SqueezeError::invalid("axis count does not match dimension"));
        }
        positive_finite(&re_axes, "semi-axes")?;
        positive_finite(&im_axes, "semi-axes")?;
        let diag: Vec<f64> = re_axes
            .iter()
            .zip(&im_axes)
            .flat_map(|(a, b)| [1.0 / (a * a), 1.0 / (b * b)])
            .collect();
        let quadric = Quadric {
            center: center.to_dvector(),
            matrix: DMatrix::from_diagonal(&DVector::from_vec(diag)),
        };
        Ok(Shape::DiagonalRealEllipsoid {
            center,
            re_axes,
            im_axes,
            quadric,
        })
    }

    pub fn polytope(planes: Vec<RealHyperplane>) -> Result<Shape> {
        if planes.is_empty() {
            return Err(SqueezeError::invalid("polytope needs at least one hyperplane"));
        }
        let n = planes[0].normal.dim();
        if planes.iter().any(|p| p.normal.dim() != n) {
            return Err(SqueezeError::invalid("hyperplanes of mixed dimension"));
        }
        Ok(Shape::Polytope { planes })
    }

    pub fn polydisc(center: CPoint, radii: Vec<f64>) -> Result<Shape> {
        if radii.len() != center.dim() {
            return Err(SqueezeError::invalid("radius count does not match dimension"));
        }
        positive_finite(&radii, "polydisc radii")?;
        Ok(Shape::Polydisc { center, radii })
    }

    pub fn intersection(parts: Vec<Shape>) -> Result<Shape> {
        if parts.is_empty() {
            return Err(SqueezeError::invalid("empty intersection"));
        }
        let n = parts[0].dim();
        if parts.iter().any(|p| p.dim() != n) {
            return Err(SqueezeError::invalid("intersection of mixed dimension"));
        }
        Ok(Shape::Intersection(parts))
    }

    pub fn dim(&self) -> usize {
        match self {
            Shape::Ball { center, .. }
            | Shape::HermitianEllipsoid { center, .. }
            | Shape::DiagonalRealEllipsoid { center, .. }
            | Shape::Polydisc { center, .. } => center.dim(),
            Shape::Polytope { planes } => planes[0].normal.dim(),
            Shape::Intersection(parts) => parts[0].dim(),
        }
    }

    pub fn quadric(&self) -> Option<&Quadric> {
        match self {
            Shape::Ball { quadric, .. }
            | Shape::HermitianEllipsoid { quadric, .. }
            | Shape::DiagonalRealEllipsoid { quadric, .. } => Some(quadric),
            _ => None,
        }
    }

    pub fn is_smooth(&self) -> bool {
        self.quadric().is_some()
    }

    /// Whether the shape itself is bounded, independent of declarations.
    fn intrinsically_bounded(&self) -> bool {
        match self {
            Shape::Polytope { .. } => false,
            Shape::Intersection(parts) => parts.iter().any(|p| p.intrinsically_bounded()),
            _ => true,
        }
    }

    pub fn contains(&self, z: &CPoint) -> bool {
        match self {
            Shape::Ball { quadric, .. }
            | Shape::HermitianEllipsoid { quadric, .. }
            | Shape::DiagonalRealEllipsoid { quadric, .. } => quadric.form(z) < 1.0,
            Shape::Polytope { planes } => planes.iter().all(|p| p.value(z) < 0.0),
            Shape::Polydisc { center, radii } => center
                .coords()
                .iter()
                .zip(z.coords())
                .zip(radii)
                .all(|((c, zk), r)| (zk - c).norm() < *r),
            Shape::Intersection(parts) => parts.iter().all(|p| p.contains(z)),
        }
    }

    /// Signed boundary residual: negative inside, zero on the boundary. For
    /// quadrics this is the gauge minus one, otherwise a signed distance.
    pub fn level(&self, z: &CPoint) -> f64 {
        match self {
            Shape::Ball { quadric, .. }
            | Shape::HermitianEllipsoid { quadric, .. }
            | Shape::DiagonalRealEllipsoid { quadric, .. } => quadric.form(z).max(0.0).sqrt() - 1.0,
            Shape::Polytope { planes } => planes
                .iter()
                .map(|p| p.value(z))
                .fold(f64::NEG_INFINITY, f64::max),
            Shape::Polydisc { center, radii } => center
                .coords()
                .iter()
                .zip(z.coords())
                .zip(radii)
                .map(|((c, zk), r)| (zk - c).norm() - r)
                .fold(f64::NEG_INFINITY, f64::max),
            Shape::Intersection(parts) => parts
                .iter()
                .map(|p| p.level(z))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// sup{t > 0 : q + t w ∈ Ω} for interior `q`, or `Unbounded`.
    pub fn ray_exit(&self, q: &CPoint, w: &CPoint) -> Result<f64> {
        match self {
            Shape::Ball { quadric, .. }
            | Shape::HermitianEllipsoid { quadric, .. }
            | Shape::DiagonalRealEllipsoid { quadric, .. } => {
                Ok(quadric.ray_exit_real(&q.to_dvector(), &w.to_dvector()))
            }
            Shape::Polytope { planes } => {
                let mut best = f64::INFINITY;
                for p in planes {
                    let s = w.re_inner(&p.normal);
                    if s > 0.0 {
                        best = best.min(-p.value(q) / s);
                    }
                }
                if best.is_finite() {
                    Ok(best)
                } else {
                    Err(SqueezeError::Unbounded)
                }
            }
            Shape::Polydisc { center, radii } => {
                let mut best = f64::INFINITY;
                for ((c, (qk, wk)), r) in center
                    .coords()
                    .iter()
                    .zip(q.coords().iter().zip(w.coords()))
                    .zip(radii)
                {
                    let a = wk.norm_sqr();
                    if a == 0.0 {
                        continue;
                    }
                    let d = qk - c;
                    let b = (d.conj() * wk).re;
                    let cc = d.norm_sqr() - r * r;
                    let disc = (b * b - a * cc).max(0.0).sqrt();
                    let t = if b >= 0.0 { -cc / (b + disc) } else { (-b + disc) / a };
                    best = best.min(t);
                }
                Ok(best)
            }
            Shape::Intersection(parts) => {
                let mut best = f64::INFINITY;
                for p in parts {
                    match p.ray_exit(q, w) {
                        Ok(t) => best = best.min(t),
                        Err(SqueezeError::Unbounded) => {}
                        Err(e) => return Err(e),
                    }
                }
                if best.is_finite() {
                    Ok(best)
                } else {
                    Err(SqueezeError::Unbounded)
                }
            }
        }
    }

    /// Supporting hyperplanes of all constraints active at `z` (within
    /// `BOUNDARY_TOL`), in constraint order.
    fn active_supports(&self, z: &CPoint) -> Vec<RealHyperplane> {
        match self {
            Shape::Ball { quadric, .. }
            | Shape::HermitianEllipsoid { quadric, .. }
            | Shape::DiagonalRealEllipsoid { quadric, .. } => {
                if self.level(z).abs() > BOUNDARY_TOL {
                    return Vec::new();
                }
                let g = CPoint::from_real(quadric.gradient(z).as_slice());
                match g.normalized() {
                    Some(a) => {
                        let b = z.re_inner(&a);
                        vec![RealHyperplane { normal: a, offset: b }]
                    }
                    None => Vec::new(),
                }
            }
            Shape::Polytope { planes } => planes
                .iter()
                .filter(|p| p.value(z).abs() <= BOUNDARY_TOL)
                .cloned()
                .collect(),
            Shape::Polydisc { center, radii } => {
                let n = center.dim();
                let mut out = Vec::new();
                for k in 0..n {
                    let d = z[k] - center[k];
                    if (d.norm() - radii[k]).abs() <= BOUNDARY_TOL && d.norm() > 0.0 {
                        let u = d / d.norm();
                        let mut a = CPoint::zeros(n);
                        a[k] = u;
                        let b = (center[k] * u.conj()).re + radii[k];
                        out.push(RealHyperplane { normal: a, offset: b });
                    }
                }
                out
            }
            Shape::Intersection(parts) => parts
                .iter()
                .filter(|p| p.level(z).abs() <= BOUNDARY_TOL)
                .flat_map(|p| p.active_supports(z))
                .collect(),
        }
    }
}

/// Result of a supporting-hyperplane query. `hyperplane` is the chosen
/// support (lowest active constraint index); `alternatives` lists every
/// active constraint, `hyperplane` first.
#[derive(Clone, Debug, PartialEq)]
pub struct Support {
    pub hyperplane: RealHyperplane,
    pub alternatives: Vec<RealHyperplane>,
}

impl Support {
    /// More than one constraint is active (vertex or edge of a polytope).
    pub fn ambiguous(&self) -> bool {
        self.alternatives.len() > 1
    }
}

/// Gradient and real Hessian of the canonical quadratic defining function
/// ρ(x) = (x − c)ᵀ M (x − c) − 1 at a boundary point.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryHessian {
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

/// A convex domain together with a witness interior point and a declared
/// bounding radius (`None` for unbounded).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainFile", into = "DomainFile")]
pub struct ConvexDomainSpec {
    pub shape: Shape,
    pub witness: CPoint,
    pub bounding_radius: Option<f64>,
}

impl ConvexDomainSpec {
    pub fn new(shape: Shape, witness: CPoint, bounding_radius: Option<f64>) -> Result<Self> {
        let n = shape.dim();
        if n == 0 || n > MAX_DIM {
            return Err(SqueezeError::invalid(format!(
                "dimension {n} outside 1..={MAX_DIM}"
            )));
        }
        witness.check_dim(n)?;
        if !witness.is_finite() || !shape.contains(&witness) {
            return Err(SqueezeError::invalid("witness point is not interior"));
        }
        if let Some(r) = bounding_radius {
            positive_finite(&[r], "bounding radius")?;
        }
        Ok(ConvexDomainSpec {
            shape,
            witness,
            bounding_radius,
        })
    }

    /// Ball with the center as witness.
    pub fn ball(center: CPoint, radius: f64) -> Result<Self> {
        let br = center.norm() + radius;
        Self::new(Shape::ball(center.clone(), radius)?, center, Some(br))
    }

    pub fn unit_ball(n: usize) -> Self {
        Self::ball(CPoint::zeros(n), 1.0).expect("unit ball")
    }

    pub fn hermitian_ellipsoid(center: CPoint, matrix: CMatrix) -> Result<Self> {
        let shape = Shape::hermitian_ellipsoid(center.clone(), matrix)?;
        let (vals, _) = hermitian_eigen(match &shape {
            Shape::HermitianEllipsoid { matrix, .. } => matrix,
            _ => unreachable!(),
        });
        let br = center.norm() + 1.0 / vals[0].sqrt();
        Self::new(shape, center, Some(br))
    }

    /// {Σ |z_k − c_k|² / r_k² < 1}.
    pub fn axis_ellipsoid(center: CPoint, semi_axes: &[f64]) -> Result<Self> {
        let n = center.dim();
        if semi_axes.len() != n {
            return Err(SqueezeError::invalid("axis count does not match dimension"));
        }
        let m = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(1.0 / (semi_axes[i] * semi_axes[i]), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self::hermitian_ellipsoid(center, m)
    }

    pub fn diagonal_real_ellipsoid(
        center: CPoint,
        re_axes: Vec<f64>,
        im_axes: Vec<f64>,
    ) -> Result<Self> {
        let longest = re_axes.iter().chain(&im_axes).cloned().fold(0.0, f64::max);
        let br = center.norm() + longest;
        Self::new(
            Shape::diagonal_real_ellipsoid(center.clone(), re_axes, im_axes)?,
            center,
            Some(br),
        )
    }

    pub fn polydisc(center: CPoint, radii: Vec<f64>) -> Result<Self> {
        let br = center.norm() + radii.iter().map(|r| r * r).sum::<f64>().sqrt();
        Self::new(Shape::polydisc(center.clone(), radii)?, center, Some(br))
    }

    pub fn polytope(
        planes: Vec<RealHyperplane>,
        witness: CPoint,
        bounding_radius: Option<f64>,
    ) -> Result<Self> {
        Self::new(Shape::polytope(planes)?, witness, bounding_radius)
    }

    /// The cube {|Re z_k| < 1, |Im z_k| < 1} in ℂⁿ.
    pub fn unit_cube(n: usize) -> Self {
        let mut planes = Vec::new();
        for k in 0..n {
            for phase in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
                let mut a = CPoint::zeros(n);
                a[k] = Complex64::new(phase.0, phase.1);
                planes.push(RealHyperplane::new(a, 1.0).expect("unit normal"));
            }
        }
        Self::polytope(planes, CPoint::zeros(n), Some((2.0 * n as f64).sqrt())).expect("cube")
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    pub fn is_bounded(&self) -> bool {
        self.bounding_radius.is_some() || self.shape.intrinsically_bounded()
    }

    pub fn contains(&self, z: &CPoint) -> bool {
        z.dim() == self.dim() && z.is_finite() && self.shape.contains(z)
    }

    pub fn level(&self, z: &CPoint) -> f64 {
        self.shape.level(z)
    }

    pub fn ray_exit(&self, q: &CPoint, w: &CPoint) -> Result<f64> {
        q.check_dim(self.dim())?;
        w.check_dim(self.dim())?;
        if !self.contains(q) {
            return Err(SqueezeError::invalid("ray base point is not interior"));
        }
        if (w.norm() - 1.0).abs() > 1e-9 {
            return Err(SqueezeError::invalid("ray direction must be a unit vector"));
        }
        self.shape.ray_exit(q, w)
    }

    pub fn supporting_hyperplane_at(&self, z: &CPoint) -> Result<Support> {
        z.check_dim(self.dim())?;
        let residual = self.level(z);
        if residual.abs() > BOUNDARY_TOL {
            return Err(SqueezeError::NotOnBoundary { residual });
        }
        let alternatives = self.shape.active_supports(z);
        match alternatives.first() {
            Some(h) => Ok(Support {
                hyperplane: h.clone(),
                alternatives: alternatives.clone(),
            }),
            None => Err(SqueezeError::NotOnBoundary { residual }),
        }
    }

    /// Deterministic boundary points: radial projection of quasi-uniform
    /// directions from the witness point. `UnboundedDomain` as soon as one
    /// ray never exits.
    pub fn boundary_samples(&self, count: usize, seed: u64) -> Result<Vec<CPoint>> {
        if count == 0 {
            return Err(SqueezeError::invalid("sample count must be positive"));
        }
        let n = self.dim();
        sphere_directions(2 * n, count, seed)
            .iter()
            .map(|v| {
                let d = CPoint::from_real(v);
                match self.shape.ray_exit(&self.witness, &d) {
                    Ok(t) => Ok(self.witness.along(&d, t)),
                    Err(SqueezeError::Unbounded) => Err(SqueezeError::UnboundedDomain),
                    Err(e) => Err(e),
                }
            })
            .collect()
    }

    /// Boundary point in direction `d` (unit) from the witness.
    pub fn boundary_point(&self, d: &CPoint) -> Result<CPoint> {
        let t = self.shape.ray_exit(&self.witness, d)?;
        Ok(self.witness.along(d, t))
    }

    pub fn boundary_hessian(&self, z: &CPoint) -> Result<BoundaryHessian> {
        let quadric = self.shape.quadric().ok_or(SqueezeError::NonSmoothKind)?;
        z.check_dim(self.dim())?;
        let residual = self.level(z);
        if residual.abs() > BOUNDARY_TOL {
            return Err(SqueezeError::NotOnBoundary { residual });
        }
        Ok(BoundaryHessian {
            gradient: quadric.gradient(z),
            hessian: &quadric.matrix * 2.0,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| SqueezeError::invalid(format!("domain file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

// ---- file format ----------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct PlaneRepr {
    normal: CPoint,
    offset: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameters", rename_all = "snake_case")]
enum ShapeRepr {
    Ball {
        center: CPoint,
        radius: f64,
    },
    HermitianEllipsoid {
        center: CPoint,
        matrix: Vec<Vec<[f64; 2]>>,
    },
    DiagonalRealEllipsoid {
        center: CPoint,
        re_axes: Vec<f64>,
        im_axes: Vec<f64>,
    },
    HalfspacePolytope {
        hyperplanes: Vec<PlaneRepr>,
    },
    Polydisc {
        center: CPoint,
        radii: Vec<f64>,
    },
    Intersection {
        components: Vec<ShapeRepr>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BoundingRepr {
    Radius(f64),
    Word(String),
}

#[derive(Serialize, Deserialize)]
struct DomainFile {
    #[serde(flatten)]
    shape: ShapeRepr,
    witness_point: CPoint,
    bounding_radius: BoundingRepr,
}

impl ShapeRepr {
    fn into_shape(self) -> Result<Shape> {
        match self {
            ShapeRepr::Ball { center, radius } => Shape::ball(center, radius),
            ShapeRepr::HermitianEllipsoid { center, matrix } => {
                Shape::hermitian_ellipsoid(center, cmatrix_from_rows(&matrix)?)
            }
            ShapeRepr::DiagonalRealEllipsoid {
                center,
                re_axes,
                im_axes,
            } => Shape::diagonal_real_ellipsoid(center, re_axes, im_axes),
            ShapeRepr::HalfspacePolytope { hyperplanes } => Shape::polytope(
                hyperplanes
                    .into_iter()
                    .map(|p| RealHyperplane::new(p.normal, p.offset))
                    .collect::<Result<_>>()?,
            ),
            ShapeRepr::Polydisc { center, radii } => Shape::polydisc(center, radii),
            ShapeRepr::Intersection { components } => Shape::intersection(
                components
                    .into_iter()
                    .map(ShapeRepr::into_shape)
                    .collect::<Result<_>>()?,
            ),
        }
    }

    fn from_shape(shape: &Shape) -> Self {
        match shape {
            Shape::Ball { center, radius, .. } => ShapeRepr::Ball {
                center: center.clone(),
                radius: *radius,
            },
            Shape::HermitianEllipsoid { center, matrix, .. } => ShapeRepr::HermitianEllipsoid {
                center: center.clone(),
                matrix: (0..matrix.nrows())
                    .map(|i| {
                        (0..matrix.ncols())
                            .map(|j| [matrix[(i, j)].re, matrix[(i, j)].im])
                            .collect()
                    })
                    .collect(),
            },
            Shape::DiagonalRealEllipsoid {
                center,
                re_axes,
                im_axes,
                ..
            } => ShapeRepr::DiagonalRealEllipsoid {
                center: center.clone(),
                re_axes: re_axes.clone(),
                im_axes: im_axes.clone(),
            },
            Shape::Polytope { planes } => ShapeRepr::HalfspacePolytope {
                hyperplanes: planes
                    .iter()
                    .map(|p| PlaneRepr {
                        normal: p.normal.clone(),
                        offset: p.offset,
                    })
                    .collect(),
            },
            Shape::Polydisc { center, radii } => ShapeRepr::Polydisc {
                center: center.clone(),
                radii: radii.clone(),
            },
            Shape::Intersection(parts) => ShapeRepr::Intersection {
                components: parts.iter().map(ShapeRepr::from_shape).collect(),
            },
        }
    }
}

impl TryFrom<DomainFile> for ConvexDomainSpec {
    type Error = SqueezeError;
    fn try_from(f: DomainFile) -> Result<Self> {
        f.into_spec()
    }
}

impl From<ConvexDomainSpec> for DomainFile {
    fn from(spec: ConvexDomainSpec) -> Self {
        DomainFile::from_spec(&spec)
    }
}

impl DomainFile {
    fn into_spec(self) -> Result<ConvexDomainSpec> {
        let bounding = match self.bounding_radius {
            BoundingRepr::Radius(r) => Some(r),
            BoundingRepr::Word(w) if w == "unbounded" => None,
            BoundingRepr::Word(w) => {
                return Err(SqueezeError::invalid(format!(
                    "bounding_radius must be a number or \"unbounded\", got `{w}`"
                )))
            }
        };
        ConvexDomainSpec::new(self.shape.into_shape()?, self.witness_point, bounding)
    }

    fn from_spec(spec: &ConvexDomainSpec) -> Self {
        DomainFile {
            shape: ShapeRepr::from_shape(&spec.shape),
            witness_point: spec.witness.clone(),
            bounding_radius: match spec.bounding_radius {
                Some(r) => BoundingRepr::Radius(r),
                None => BoundingRepr::Word("unbounded".into()),
            },
        }
    }
}
