//! Points of ℂⁿ and small complex-matrix helpers.
//!
//! Real coordinates are interleaved: index `2k` holds `Re z_k` and `2k + 1`
//! holds `Im z_k`. All real Hessians, gradients and realified matrices in the
//! crate use this ordering.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, SqueezeError};

pub type CMatrix = DMatrix<Complex64>;

/// Hard cap on the complex dimension.
pub const MAX_DIM: usize = 8;

#[derive(Clone, Debug, PartialEq, Default)]
pub struct CPoint(Vec<Complex64>);

impl CPoint {
    pub fn new(coords: Vec<Complex64>) -> Self {
        CPoint(coords)
    }

    pub fn zeros(n: usize) -> Self {
        CPoint(vec![Complex64::new(0.0, 0.0); n])
    }

    /// Canonical basis vector `ê_k` (zero-based `k`).
    pub fn basis(n: usize, k: usize) -> Self {
        let mut p = Self::zeros(n);
        p.0[k] = Complex64::new(1.0, 0.0);
        p
    }

    pub fn from_real(v: &[f64]) -> Self {
        CPoint(
            v.chunks_exact(2)
                .map(|c| Complex64::new(c[0], c[1]))
                .collect(),
        )
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        CPoint(pairs.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
    }

    pub fn to_real(&self) -> Vec<f64> {
        self.0.iter().flat_map(|c| [c.re, c.im]).collect()
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        DVector::from_vec(self.to_real())
    }

    pub fn to_cvector(&self) -> DVector<Complex64> {
        DVector::from_column_slice(&self.0)
    }

    pub fn from_cvector(v: &DVector<Complex64>) -> Self {
        CPoint(v.iter().copied().collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<Complex64> {
        self.0
    }

    /// Hermitian inner product ⟨z, a⟩ = Σ z_k conj(a_k).
    pub fn inner(&self, other: &CPoint) -> Complex64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(z, a)| z * a.conj())
            .sum()
    }

    /// Re⟨z, a⟩, which is the Euclidean dot product in ℝ²ⁿ.
    pub fn re_inner(&self, other: &CPoint) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(z, a)| z.re * a.re + z.im * a.im)
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn distance(&self, other: &CPoint) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, s: f64) -> CPoint {
        CPoint(self.0.iter().map(|c| c * s).collect())
    }

    pub fn scale_c(&self, s: Complex64) -> CPoint {
        CPoint(self.0.iter().map(|c| c * s).collect())
    }

    /// `self + t * dir`.
    pub fn along(&self, dir: &CPoint, t: f64) -> CPoint {
        CPoint(self.0.iter().zip(&dir.0).map(|(a, d)| a + d * t).collect())
    }

    pub fn normalized(&self) -> Option<CPoint> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self.scale(1.0 / n))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn max_abs_diff(&self, other: &CPoint) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// The vector rotated by a unit phase so that its first entry of modulus
    /// above `tol` is real and positive.
    pub fn phase_normalized(&self, tol: f64) -> CPoint {
        match self.0.iter().find(|c| c.norm() > tol) {
            Some(lead) => self.scale_c(lead.conj() / lead.norm()),
            None => self.clone(),
        }
    }

    pub fn check_dim(&self, n: usize) -> Result<()> {
        if self.dim() != n {
            return Err(SqueezeError::invalid(format!(
                "expected a point of dimension {n}, got {}",
                self.dim()
            )));
        }
        Ok(())
    }
}

impl Index<usize> for CPoint {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for CPoint {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.0[i]
    }
}

impl Add for &CPoint {
    type Output = CPoint;
    fn add(self, rhs: &CPoint) -> CPoint {
        CPoint(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &CPoint {
    type Output = CPoint;
    fn sub(self, rhs: &CPoint) -> CPoint {
        CPoint(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &CPoint {
    type Output = CPoint;
    fn neg(self) -> CPoint {
        CPoint(self.0.iter().map(|a| -a).collect())
    }
}

impl Mul<f64> for &CPoint {
    type Output = CPoint;
    fn mul(self, rhs: f64) -> CPoint {
        self.scale(rhs)
    }
}

impl fmt::Display for CPoint {
    /// Command-line syntax: `re,im;re,im`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ";")?;
            }
            write!(f, "{},{}", c.re, c.im)?;
        }
        Ok(())
    }
}

impl FromStr for CPoint {
    type Err = SqueezeError;

    fn from_str(s: &str) -> Result<Self> {
        let mut coords = Vec::new();
        for part in s.split(';') {
            let mut it = part.split(',');
            let (re, im) = match (it.next(), it.next(), it.next()) {
                (Some(re), Some(im), None) => (re, im),
                _ => {
                    return Err(SqueezeError::invalid(format!(
                        "coordinate `{part}` is not of the form re,im"
                    )))
                }
            };
            let parse = |t: &str| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| SqueezeError::invalid(format!("bad number `{t}`")))
            };
            coords.push(Complex64::new(parse(re)?, parse(im)?));
        }
        let p = CPoint(coords);
        if !p.is_finite() || p.dim() == 0 {
            return Err(SqueezeError::invalid("point must be finite and nonempty"));
        }
        Ok(p)
    }
}

impl Serialize for CPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.0.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(CPoint(
            pairs
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
        ))
    }
}

pub fn mat_vec(m: &CMatrix, z: &CPoint) -> CPoint {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, zj) in z.coords().iter().enumerate() {
            acc += m[(i, j)] * zj;
        }
        out.push(acc);
    }
    CPoint(out)
}

/// Real 2n×2n matrix of the ℝ-linear map z ↦ M z in interleaved coordinates.
pub fn realify(m: &CMatrix) -> DMatrix<f64> {
    let (r, c) = m.shape();
    let mut out = DMatrix::zeros(2 * r, 2 * c);
    for i in 0..r {
        for j in 0..c {
            let e = m[(i, j)];
            out[(2 * i, 2 * j)] = e.re;
            out[(2 * i, 2 * j + 1)] = -e.im;
            out[(2 * i + 1, 2 * j)] = e.im;
            out[(2 * i + 1, 2 * j + 1)] = e.re;
        }
    }
    out
}

pub(crate) fn cmatrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    if rows.iter().any(|row| row.len() != c) {
        return Err(SqueezeError::invalid("ragged matrix"));
    }
    Ok(CMatrix::from_fn(r, c, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}
